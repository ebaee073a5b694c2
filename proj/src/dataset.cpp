#include "fewscale/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <string>
#include <unordered_set>

#include "fewscale/errors.hpp"

namespace fewscale {

EmbeddingDataset::EmbeddingDataset(std::uint32_t dim, std::vector<RecordKey> keys,
                                   std::vector<float> values, DatasetMeta meta)
    : dim_(dim), keys_(std::move(keys)), values_(std::move(values)), meta_(std::move(meta)) {
    if (dim_ == 0) throw ValidationError("embedding dim must be positive");
    if (values_.size() != keys_.size() * dim_) {
        throw ValidationError("expected " + std::to_string(keys_.size() * dim_) +
                              " vector components, got " + std::to_string(values_.size()));
    }
    std::unordered_set<SampleId> seen;
    seen.reserve(keys_.size());
    for (std::size_t i = 0; i < keys_.size(); ++i) {
        if (!seen.insert(keys_[i].sample_id).second) {
            throw ValidationError("duplicate sample_id " + std::to_string(keys_[i].sample_id) +
                                  " at record " + std::to_string(i));
        }
        for (float v : vector(i)) {
            if (!std::isfinite(v)) {
                throw ValidationError("non-finite component in record " + std::to_string(i));
            }
        }
    }
}

std::vector<ClassId> EmbeddingDataset::class_ids() const {
    std::vector<ClassId> ids;
    ids.reserve(keys_.size());
    for (const auto& k : keys_) ids.push_back(k.class_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

bool EmbeddingDataset::operator==(const EmbeddingDataset& other) const {
    if (dim_ != other.dim_ || keys_ != other.keys_ || meta_ != other.meta_) return false;
    // Bitwise, so -0.0 and 0.0 differ and round trips are checked exactly.
    return values_.size() == other.values_.size() &&
           std::equal(values_.begin(), values_.end(), other.values_.begin(),
                      [](float a, float b) {
                          return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b);
                      });
}

DatasetBuilder& DatasetBuilder::add(SampleId id, ClassId cls, std::span<const float> v) {
    if (v.size() != dim_) {
        throw ValidationError("vector for sample " + std::to_string(id) + " has " +
                              std::to_string(v.size()) + " components, expected " +
                              std::to_string(dim_));
    }
    keys_.push_back({id, cls});
    values_.insert(values_.end(), v.begin(), v.end());
    return *this;
}

EmbeddingDataset DatasetBuilder::build() {
    return EmbeddingDataset(dim_, std::move(keys_), std::move(values_), std::move(meta_));
}

DatasetView::DatasetView(std::shared_ptr<const EmbeddingDataset> base) : base_(std::move(base)) {
    std::map<ClassId, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < base_->size(); ++i) by_class[base_->key(i).class_id].push_back(i);
    groups_.reserve(by_class.size());
    for (auto& [cls, idx] : by_class) groups_.push_back({cls, std::move(idx)});
}

DatasetView::DatasetView(std::shared_ptr<const EmbeddingDataset> base,
                         std::vector<ClassGroup> groups)
    : base_(std::move(base)), groups_(std::move(groups)) {
    std::sort(groups_.begin(), groups_.end(),
              [](const ClassGroup& a, const ClassGroup& b) { return a.class_id < b.class_id; });
    for (auto& g : groups_) std::sort(g.records.begin(), g.records.end());
    std::erase_if(groups_, [](const ClassGroup& g) { return g.records.empty(); });
}

std::size_t DatasetView::record_count() const noexcept {
    std::size_t n = 0;
    for (const auto& g : groups_) n += g.records.size();
    return n;
}

std::set<ClassId> DatasetView::class_set() const {
    std::set<ClassId> out;
    for (const auto& g : groups_) out.insert(g.class_id);
    return out;
}

std::set<SampleId> DatasetView::sample_ids() const {
    std::set<SampleId> out;
    for (const auto& g : groups_)
        for (auto i : g.records) out.insert(base_->key(i).sample_id);
    return out;
}

DatasetView DatasetView::restrict_to(const std::set<ClassId>& keep) const {
    std::vector<ClassGroup> kept;
    for (const auto& g : groups_)
        if (keep.contains(g.class_id)) kept.push_back(g);
    return DatasetView(base_, std::move(kept));
}

EmbeddingDataset DatasetView::materialize() const {
    DatasetBuilder builder(base_->dim(), base_->meta());
    for (const auto& g : groups_)
        for (auto i : g.records) builder.add(base_->key(i).sample_id, g.class_id, base_->vector(i));
    return std::move(builder).build();
}

} // namespace fewscale
