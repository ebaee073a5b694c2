#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace fewscale {

using SampleId = std::uint64_t;
using ClassId = std::uint32_t;

struct DatasetMeta {
    std::string dataset;
    std::string model;
    std::string checkpoint;

    bool operator==(const DatasetMeta&) const = default;
};

struct RecordKey {
    SampleId sample_id = 0;
    ClassId class_id = 0;

    bool operator==(const RecordKey&) const = default;
};

/// Fixed-width embedding vectors with class labels. Vectors are stored
/// contiguously in single precision, `dim` floats per record, in record
/// order. The constructor validates every invariant (finite values,
/// unique sample ids) and throws ValidationError otherwise; instances are
/// immutable afterwards.
class EmbeddingDataset {
public:
    EmbeddingDataset(std::uint32_t dim, std::vector<RecordKey> keys,
                     std::vector<float> values, DatasetMeta meta = {});

    std::uint32_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return keys_.size(); }
    bool empty() const noexcept { return keys_.empty(); }

    const RecordKey& key(std::size_t i) const { return keys_[i]; }
    std::span<const RecordKey> keys() const noexcept { return keys_; }
    std::span<const float> vector(std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }
    std::span<const float> values() const noexcept { return values_; }
    const DatasetMeta& meta() const noexcept { return meta_; }

    /// Sorted distinct class ids.
    std::vector<ClassId> class_ids() const;

    bool operator==(const EmbeddingDataset& other) const;

private:
    std::uint32_t dim_;
    std::vector<RecordKey> keys_;
    std::vector<float> values_;
    DatasetMeta meta_;
};

/// Incremental construction helper for tests and generators.
class DatasetBuilder {
public:
    explicit DatasetBuilder(std::uint32_t dim, DatasetMeta meta = {})
        : dim_(dim), meta_(std::move(meta)) {}

    DatasetBuilder& add(SampleId id, ClassId cls, std::span<const float> v);
    DatasetBuilder& add(SampleId id, ClassId cls, std::initializer_list<float> v) {
        return add(id, cls, std::span<const float>(v.begin(), v.size()));
    }
    /// Moves the accumulated records out; the builder is empty afterwards.
    EmbeddingDataset build();

private:
    std::uint32_t dim_;
    DatasetMeta meta_;
    std::vector<RecordKey> keys_;
    std::vector<float> values_;
};

struct ClassGroup {
    ClassId class_id = 0;
    /// Indices into the base dataset, ascending.
    std::vector<std::size_t> records;
};

/// A subset of an EmbeddingDataset grouped by class. Views share the base
/// dataset and only carry record indices, so subsampling never copies
/// vectors. Groups are ordered by class id.
class DatasetView {
public:
    explicit DatasetView(std::shared_ptr<const EmbeddingDataset> base);
    DatasetView(std::shared_ptr<const EmbeddingDataset> base, std::vector<ClassGroup> groups);

    const EmbeddingDataset& base() const noexcept { return *base_; }
    const std::shared_ptr<const EmbeddingDataset>& base_ptr() const noexcept { return base_; }
    std::span<const ClassGroup> classes() const noexcept { return groups_; }
    std::size_t class_count() const noexcept { return groups_.size(); }
    std::size_t record_count() const noexcept;
    std::set<ClassId> class_set() const;
    std::set<SampleId> sample_ids() const;

    /// Keeps only the listed classes; unknown ids are ignored.
    DatasetView restrict_to(const std::set<ClassId>& keep) const;

    /// Materializes the view into a standalone dataset (record order:
    /// class id, then base order).
    EmbeddingDataset materialize() const;

private:
    std::shared_ptr<const EmbeddingDataset> base_;
    std::vector<ClassGroup> groups_;
};

} // namespace fewscale
