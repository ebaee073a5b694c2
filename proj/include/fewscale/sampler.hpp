#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fewscale/dataset.hpp"
#include "fewscale/power_law.hpp"
#include "fewscale/types.hpp"

namespace fewscale {

struct ScalingSchedule {
    ScaleVariable variable = ScaleVariable::DatasetSize;
    std::vector<double> ratios;

    /// 100%, 50%, 25%, 12.5%, 6.25% for dataset size; the first four for
    /// class count.
    static ScalingSchedule defaults(ScaleVariable variable);
    /// Ratios must lie in (0, 1], start at 1.0 and strictly decrease.
    void validate() const;
};

struct EpisodeConfig {
    std::size_t way = 5;
    std::size_t shot = 1;
    std::size_t queries_per_class = 15;
    std::size_t trials = 2000;
    std::uint64_t master_seed = 0;
    /// Scale episode vectors to unit norm before classification.
    bool l2_normalize = false;

    void validate() const;
};

/// Number of train classes for a split: floor(fraction * total + 0.5),
/// clamped so both sides keep at least one class.
std::size_t split_train_count(std::size_t total, double fraction);

ClassSplit split_classes(const DatasetView& view, double fraction, std::uint64_t seed);
ClassSplit split_classes(const EmbeddingDataset& dataset, double fraction, std::uint64_t seed);

/// Per class keeps max(1, floor(ratio * n_c)) samples, chosen uniformly
/// without replacement from a stream keyed by (seed, class_id).
DatasetView subsample_data(const DatasetView& view, double ratio, std::uint64_t seed);

/// Keeps max(2, floor(ratio * class_count)) whole classes.
DatasetView subsample_classes(const DatasetView& view, double ratio, std::uint64_t seed);

/// Throws EpisodeInfeasibleError if fewer than `way` classes own at least
/// shot + 1 samples.
void check_episode_feasible(const DatasetView& view, const EpisodeConfig& config);

/// Draws trial `trial_index`. The randomness depends only on
/// (config.master_seed, trial_index). Classes are drawn among those with
/// at least shot + 1 samples.
Episode sample_episode(const DatasetView& view, const EpisodeConfig& config,
                       std::uint64_t trial_index);

} // namespace fewscale
