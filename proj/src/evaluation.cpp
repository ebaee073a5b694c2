#include "fewscale/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "fewscale/random.hpp"

namespace fewscale {

Interval wilson_interval(std::uint64_t successes, std::uint64_t total, double z) {
    if (total == 0) return {0.0, 1.0};
    const double n = static_cast<double>(total);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    // The exact interval always contains p; clamp away rounding.
    return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

TrialOutcome evaluate_episode(const Episode& episode, Method method, const FineTuneConfig& ft,
                              std::uint64_t master_seed) {
    TrialOutcome out;
    out.total = episode.query.size();
    switch (method) {
    case Method::Prototypical: {
        const auto protos = compute_prototypes(episode);
        for (const auto& q : episode.query) out.correct += classify_prototypical(q.x, protos) == q.slot;
        break;
    }
    case Method::Matching:
        for (const auto& q : episode.query) out.correct += classify_matching(q.x, episode) == q.slot;
        break;
    case Method::FineTune: {
        const auto head = finetune_linear_head(
            episode, ft, derive_seed(master_seed, kStreamHeadInit, episode.trial_index));
        for (const auto& q : episode.query) out.correct += classify_head(head, q.x) == q.slot;
        break;
    }
    }
    return out;
}

std::vector<AccuracyEstimate> run_evaluation(const DatasetView& view, const EpisodeConfig& config,
                                             std::span<const Method> methods,
                                             const FineTuneConfig& ft, std::size_t workers) {
    config.validate();
    ft.validate();
    check_episode_feasible(view, config);

    const std::size_t m = methods.size();
    std::vector<TrialOutcome> outcomes(config.trials * m);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= config.trials) return;
            try {
                Episode ep = sample_episode(view, config, t);
                if (config.l2_normalize) ep = l2_normalized(std::move(ep));
                for (std::size_t i = 0; i < m; ++i)
                    outcomes[t * m + i] = evaluate_episode(ep, methods[i], ft, config.master_seed);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(config.trials);
                return;
            }
        }
    };

    workers = std::clamp<std::size_t>(workers, 1, config.trials);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<AccuracyEstimate> estimates;
    for (std::size_t i = 0; i < m; ++i) {
        AccuracyEstimate e;
        e.method = methods[i];
        e.trials = config.trials;
        for (std::size_t t = 0; t < config.trials; ++t) {
            e.correct += outcomes[t * m + i].correct;
            e.total += outcomes[t * m + i].total;
        }
        e.mean_accuracy = static_cast<double>(e.correct) / static_cast<double>(e.total);
        const auto ci = wilson_interval(e.correct, e.total);
        e.ci_low = ci.low;
        e.ci_high = ci.high;
        estimates.push_back(e);
    }
    return estimates;
}

} // namespace fewscale
