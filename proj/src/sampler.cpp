#include "fewscale/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fewscale/errors.hpp"
#include "fewscale/random.hpp"

namespace fewscale {
namespace {

// floor(ratio * n), tolerant of products like 0.29 * 100 = 28.999999999999996.
std::size_t scaled_floor(double ratio, std::size_t n) {
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
}

void check_ratio(double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0))
        throw ArgumentError("subsample ratio " + std::to_string(ratio) + " outside (0, 1]");
}

} // namespace

ScalingSchedule ScalingSchedule::defaults(ScaleVariable variable) {
    if (variable == ScaleVariable::DatasetSize) return {variable, {1.0, 0.5, 0.25, 0.125, 0.0625}};
    return {variable, {1.0, 0.5, 0.25, 0.125}};
}

void ScalingSchedule::validate() const {
    if (ratios.empty()) throw ValidationError("schedule has no ratios");
    if (ratios.front() != 1.0) throw ValidationError("schedule must start at ratio 1.0");
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (!(ratios[i] > 0.0 && ratios[i] <= 1.0))
            throw ValidationError("schedule ratio " + std::to_string(ratios[i]) + " outside (0, 1]");
        if (i > 0 && !(ratios[i] < ratios[i - 1]))
            throw ValidationError("schedule ratios must strictly decrease");
    }
}

void EpisodeConfig::validate() const {
    if (way < 2) throw ValidationError("episode way must be at least 2");
    if (shot < 1) throw ValidationError("episode shot must be at least 1");
    if (queries_per_class < 1) throw ValidationError("queries_per_class must be at least 1");
    if (trials < 1) throw ValidationError("trials must be at least 1");
}

std::size_t split_train_count(std::size_t total, double fraction) {
    if (total < 2)
        throw InsufficientClassesError("class split needs at least 2 classes, got " +
                                       std::to_string(total));
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ArgumentError("split fraction " + std::to_string(fraction) + " outside (0, 1)");
    auto n = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(total) + 0.5));
    return std::clamp<std::size_t>(n, 1, total - 1);
}

ClassSplit split_classes(const DatasetView& view, double fraction, std::uint64_t seed) {
    std::vector<ClassId> classes;
    for (const auto& g : view.classes()) classes.push_back(g.class_id);
    const std::size_t n_train = split_train_count(classes.size(), fraction);

    Rng rng(derive_seed(seed, kStreamSplit));
    rng.partial_shuffle(std::span<ClassId>(classes), n_train);

    ClassSplit split;
    split.seed = seed;
    split.fraction = fraction;
    split.train_classes.insert(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.holdout_classes.insert(classes.begin() + static_cast<std::ptrdiff_t>(n_train), classes.end());
    return split;
}

ClassSplit split_classes(const EmbeddingDataset& dataset, double fraction, std::uint64_t seed) {
    // Non-owning alias; the view does not outlive this call.
    std::shared_ptr<const EmbeddingDataset> alias(std::shared_ptr<void>{}, &dataset);
    return split_classes(DatasetView(alias), fraction, seed);
}

DatasetView subsample_data(const DatasetView& view, double ratio, std::uint64_t seed) {
    check_ratio(ratio);
    std::vector<ClassGroup> kept;
    kept.reserve(view.class_count());
    for (const auto& g : view.classes()) {
        const std::size_t n = g.records.size();
        const std::size_t keep = std::max<std::size_t>(1, scaled_floor(ratio, n));
        ClassGroup out{g.class_id, g.records};
        if (keep < n) {
            Rng rng(derive_seed(seed, kStreamSubsampleData, g.class_id));
            rng.partial_shuffle(std::span<std::size_t>(out.records), keep);
            out.records.resize(keep);
        }
        kept.push_back(std::move(out));
    }
    return DatasetView(view.base_ptr(), std::move(kept));
}

DatasetView subsample_classes(const DatasetView& view, double ratio, std::uint64_t seed) {
    check_ratio(ratio);
    const std::size_t total = view.class_count();
    if (total < 2)
        throw InsufficientClassesError("class subsampling needs at least 2 classes, got " +
                                       std::to_string(total));
    const std::size_t keep = std::max<std::size_t>(2, scaled_floor(ratio, total));

    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    Rng rng(derive_seed(seed, kStreamSubsampleClasses));
    rng.partial_shuffle(std::span<std::size_t>(order), keep);

    std::vector<ClassGroup> kept;
    for (std::size_t i = 0; i < keep; ++i) kept.push_back(view.classes()[order[i]]);
    return DatasetView(view.base_ptr(), std::move(kept));
}

namespace {

std::vector<std::size_t> eligible_groups(const DatasetView& view, const EpisodeConfig& config) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < view.class_count(); ++i)
        if (view.classes()[i].records.size() >= config.shot + 1) eligible.push_back(i);
    return eligible;
}

} // namespace

void check_episode_feasible(const DatasetView& view, const EpisodeConfig& config) {
    config.validate();
    const auto eligible = eligible_groups(view, config);
    if (eligible.size() >= config.way) return;
    std::string msg = std::to_string(config.way) + "-way " + std::to_string(config.shot) +
                      "-shot episodes need " + std::to_string(config.way) + " classes with at least " +
                      std::to_string(config.shot + 1) + " samples; only " +
                      std::to_string(eligible.size()) + " qualify";
    for (const auto& g : view.classes()) {
        if (g.records.size() < config.shot + 1) {
            msg += " (class " + std::to_string(g.class_id) + " has " +
                   std::to_string(g.records.size()) + ")";
            break;
        }
    }
    throw EpisodeInfeasibleError(msg);
}

Episode sample_episode(const DatasetView& view, const EpisodeConfig& config,
                       std::uint64_t trial_index) {
    auto eligible = eligible_groups(view, config);
    if (eligible.size() < config.way) check_episode_feasible(view, config);

    Rng rng(derive_seed(config.master_seed, kStreamEpisode, trial_index));
    rng.partial_shuffle(std::span<std::size_t>(eligible), config.way);

    const auto& base = view.base();
    auto labeled = [&](std::size_t slot, std::size_t record) {
        LabeledVector lv;
        lv.slot = slot;
        lv.sample_id = base.key(record).sample_id;
        const auto v = base.vector(record);
        lv.x.assign(v.begin(), v.end());
        return lv;
    };

    Episode ep;
    ep.way = config.way;
    ep.shot = config.shot;
    ep.trial_index = trial_index;
    ep.support.reserve(config.way * config.shot);
    ep.query.reserve(config.way * config.queries_per_class);
    for (std::size_t slot = 0; slot < config.way; ++slot) {
        const ClassGroup& g = view.classes()[eligible[slot]];
        ep.classes.push_back(g.class_id);
        std::vector<std::size_t> records = g.records;
        const std::size_t queries = std::min(config.queries_per_class, records.size() - config.shot);
        rng.partial_shuffle(std::span<std::size_t>(records), config.shot + queries);
        for (std::size_t i = 0; i < config.shot; ++i) ep.support.push_back(labeled(slot, records[i]));
        for (std::size_t i = 0; i < queries; ++i)
            ep.query.push_back(labeled(slot, records[config.shot + i]));
    }
    return ep;
}

} // namespace fewscale
