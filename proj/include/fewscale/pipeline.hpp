#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fewscale/fewshot.hpp"
#include "fewscale/sampler.hpp"
#include "fewscale/types.hpp"

namespace fewscale {

struct TargetSpec {
    std::string name;
    /// Empty when `holdout` is set.
    std::filesystem::path path;
    /// Evaluate on the held-out classes of the run's source file.
    bool holdout = false;
};

/// Embeddings produced by one model checkpoint trained at one schedule
/// ratio: the source (training) dataset and the targets embedded by it.
struct RunEntry {
    double ratio = 1.0;
    std::string checkpoint;
    std::filesystem::path source;
    std::vector<TargetSpec> targets;
};

struct RunConfig {
    std::string label = "model";
    ScalingSchedule schedule = ScalingSchedule::defaults(ScaleVariable::DatasetSize);
    double split_fraction = 0.8;
    std::uint64_t split_seed = 0;
    std::uint64_t subsample_seed = 0;
    EpisodeConfig episode;
    FineTuneConfig finetune;
    std::vector<Method> methods = {Method::FineTune, Method::Matching, Method::Prototypical};
    std::vector<RunEntry> runs;
    std::filesystem::path output_dir = "report";
    /// Optional in-distribution curve (value,error_percent CSV) compared
    /// against each method's fit for convergence speed.
    std::optional<std::filesystem::path> reference_curve;
    double convergence_epsilon = 1.0;

    void validate() const;
};

/// Relative paths in the JSON are resolved against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

struct CellResult {
    double ratio = 0.0;
    std::string checkpoint;
    std::string target;
    AccuracyEstimate estimate;
};

/// Report files keyed by path relative to the output directory.
struct ReportBundle {
    std::vector<CellResult> cells;
    std::map<std::string, std::string> files;
};

/// split -> subsample -> evaluate -> max over checkpoints -> mean over
/// targets -> fit, per method. Module errors are rethrown with the
/// (ratio, method, checkpoint) coordinate prefixed.
ReportBundle run_pipeline(const RunConfig& config, std::size_t workers = 1);

void write_bundle(const ReportBundle& bundle, const std::filesystem::path& dir);

} // namespace fewscale
