#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fewscale/fewshot.hpp"
#include "fewscale/sampler.hpp"
#include "fewscale/types.hpp"

namespace fewscale {

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for `successes` out of `total` at the given z.
Interval wilson_interval(std::uint64_t successes, std::uint64_t total, double z = kZ95);

struct TrialOutcome {
    std::uint64_t correct = 0;
    std::uint64_t total = 0;
};

/// Classifies every query of one episode with one method.
TrialOutcome evaluate_episode(const Episode& episode, Method method, const FineTuneConfig& ft,
                              std::uint64_t master_seed);

/// Runs `config.trials` episodes on `workers` threads. Per-trial counts are
/// summed as integers so the result is independent of the worker count.
/// Results are returned in the order of `methods`.
std::vector<AccuracyEstimate> run_evaluation(const DatasetView& view, const EpisodeConfig& config,
                                             std::span<const Method> methods,
                                             const FineTuneConfig& ft, std::size_t workers = 1);

} // namespace fewscale
