#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "fewscale/dataset.hpp"
#include "fewscale/embedding_io.hpp"

namespace fewscale::testing {

/// `classes` isotropic Gaussian clusters. Class c is centered at
/// `spacing * e_c` (so centers are spacing * sqrt(2) apart) when dim >=
/// classes; otherwise centers are spread along a diagonal.
inline EmbeddingDataset gaussian_clusters(std::size_t classes, std::size_t per_class, std::uint32_t dim,
                                          double spacing, double sigma, std::uint64_t seed,
                                          DatasetMeta meta = {}) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    DatasetBuilder b(dim, std::move(meta));
    std::vector<float> v(dim);
    SampleId id = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            for (std::uint32_t d = 0; d < dim; ++d) {
                double center = 0.0;
                if (dim >= classes) center = d == c ? spacing : 0.0;
                else center = spacing * static_cast<double>(c);
                v[d] = static_cast<float>(center + noise(gen));
            }
            b.add(id++, static_cast<ClassId>(c), v);
        }
    }
    return std::move(b).build();
}

/// Same vectors with class labels permuted uniformly at random.
inline EmbeddingDataset shuffle_labels(const EmbeddingDataset& d, std::uint64_t seed) {
    std::vector<ClassId> labels;
    for (const auto& k : d.keys()) labels.push_back(k.class_id);
    std::mt19937_64 gen(seed);
    std::shuffle(labels.begin(), labels.end(), gen);
    DatasetBuilder b(d.dim(), d.meta());
    for (std::size_t i = 0; i < d.size(); ++i) b.add(d.key(i).sample_id, labels[i], d.vector(i));
    return std::move(b).build();
}

/// `classes` classes with `per_class` standard-normal vectors each.
inline EmbeddingDataset random_dataset(std::size_t classes, std::size_t per_class, std::uint32_t dim,
                                       std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    DatasetBuilder b(dim);
    std::vector<float> v(dim);
    SampleId id = 1000;
    for (std::size_t c = 0; c < classes; ++c)
        for (std::size_t i = 0; i < per_class; ++i) {
            for (auto& x : v) x = static_cast<float>(n01(gen));
            b.add(id++, static_cast<ClassId>(c * 3 + 1), v);
        }
    return std::move(b).build();
}

inline std::shared_ptr<const EmbeddingDataset> share(EmbeddingDataset d) {
    return std::make_shared<const EmbeddingDataset>(std::move(d));
}

/// Fresh scratch directory under the system temp dir, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& name) {
        path_ = std::filesystem::temp_directory_path() /
                ("fewscale_" + name + "_" + std::to_string(std::random_device{}()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};


/// Cluster separation used for the "model trained at `ratio`": grows with
/// the amount of training data, mimicking better embeddings.
inline double family_separation(double ratio) { return 10.0 * (4.0 - 1.0 * std::pow(ratio, -0.4)); }

/// Writes one source and one external target file per ratio (and per
/// checkpoint) and returns a pipeline config referencing them by relative
/// path. Checkpoint "late" is slightly better separated than "early".
inline nlohmann::json write_scaling_family(const std::filesystem::path& dir,
                                           const std::vector<double>& ratios,
                                           const std::vector<std::string>& checkpoints = {"final"},
                                           std::size_t trials = 300) {
    nlohmann::json runs = nlohmann::json::array();
    std::uint64_t seed = 100;
    for (double r : ratios) {
        for (std::size_t ci = 0; ci < checkpoints.size(); ++ci) {
            const double sep = family_separation(r) * (1.0 + 0.05 * double(ci));
            const std::string tag = std::to_string(static_cast<int>(r * 10000)) + "_" + checkpoints[ci];
            write_embeddings(gaussian_clusters(30, 40, 32, sep, 10.0, ++seed, {"source", "synthetic", checkpoints[ci]}),
                             dir / ("source_" + tag + ".embd"));
            write_embeddings(gaussian_clusters(10, 30, 32, sep, 10.0, ++seed, {"target", "synthetic", checkpoints[ci]}),
                             dir / ("target_" + tag + ".embd"));
            runs.push_back({{"ratio", r},
                            {"checkpoint", checkpoints[ci]},
                            {"source", "source_" + tag + ".embd"},
                            {"targets", nlohmann::json::array({{{"name", "self"}, {"holdout", true}},
                                                               {{"name", "other"}, {"path", "target_" + tag + ".embd"}}})}});
        }
    }
    return {{"label", "synthetic"},
            {"schedule", {{"variable", "DatasetSize"}, {"ratios", {1.0, 0.5, 0.25, 0.125, 0.0625}}}},
            {"split", {{"fraction", 0.8}, {"seed", 7}}},
            {"subsample_seed", 11},
            {"episode", {{"way", 5}, {"shot", 1}, {"queries_per_class", 15}, {"trials", trials}, {"master_seed", 42}}},
            {"methods", {"FineTune", "Matching", "Prototypical"}},
            {"runs", runs},
            {"output_dir", "report"}};
}

} // namespace fewscale::testing
