#include "fewscale/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>

#include "fewscale/curve_io.hpp"
#include "fewscale/embedding_io.hpp"
#include "fewscale/errors.hpp"
#include "fewscale/evaluation.hpp"
#include "fewscale/fit.hpp"
#include "fewscale/report.hpp"

namespace fewscale {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    try {
        return j[key].get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config field '") + key + "': " + e.what());
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

// Rethrows the in-flight fewscale::Error with `context` prefixed, keeping
// its dynamic type so callers can still tell I/O from validation failures.
[[noreturn]] void rethrow_with_context(const std::string& context) {
    try {
        throw;
    } catch (const IoError& e) { throw IoError(context + ": " + e.what()); }
    catch (const FormatError& e) { throw FormatError(context + ": " + e.what()); }
    catch (const CorruptionError& e) { throw CorruptionError(context + ": " + e.what()); }
    catch (const InsufficientClassesError& e) { throw InsufficientClassesError(context + ": " + e.what()); }
    catch (const EpisodeInfeasibleError& e) { throw EpisodeInfeasibleError(context + ": " + e.what()); }
    catch (const DegenerateInputError& e) { throw DegenerateInputError(context + ": " + e.what()); }
    catch (const ArgumentError& e) { throw ArgumentError(context + ": " + e.what()); }
    catch (const Error& e) { throw ValidationError(context + ": " + e.what()); }
}

std::string coordinate(double ratio, std::string_view method, const std::string& checkpoint,
                       const std::string& target) {
    return "(ratio=" + format_double(ratio) + ", method=" + std::string(method) +
           ", checkpoint=" + checkpoint + ", target=" + target + ")";
}

std::string method_file_stem(Method m) {
    std::string s(to_string(m));
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace

void RunConfig::validate() const {
    schedule.validate();
    episode.validate();
    finetune.validate();
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw ValidationError("split fraction must lie in (0, 1)");
    if (methods.empty()) throw ValidationError("config lists no evaluation methods");
    if (std::set<Method>(methods.begin(), methods.end()).size() != methods.size())
        throw ValidationError("config lists a method twice");
    if (runs.empty()) throw ValidationError("config needs at least one run (source embedding file)");
    if (!(convergence_epsilon > 0.0)) throw ValidationError("convergence_epsilon must be positive");
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        const std::string where = "run " + std::to_string(i);
        if (std::find(schedule.ratios.begin(), schedule.ratios.end(), r.ratio) == schedule.ratios.end())
            throw ValidationError(where + ": ratio " + format_double(r.ratio) + " is not in the schedule");
        if (r.source.empty()) throw ValidationError(where + ": missing source embedding file");
        if (r.targets.empty()) throw ValidationError(where + ": needs at least one target");
        for (const auto& t : r.targets)
            if (!t.holdout && t.path.empty())
                throw ValidationError(where + ": target '" + t.name + "' has neither path nor holdout");
        for (std::size_t j = 0; j < i; ++j)
            if (runs[j].ratio == r.ratio && runs[j].checkpoint == r.checkpoint)
                throw ValidationError(where + ": duplicate (ratio, checkpoint) pair");
    }
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    RunConfig c;
    c.label = get_or<std::string>(j, "label", c.label);
    if (j.contains("schedule")) {
        const auto& s = j["schedule"];
        c.schedule.variable = parse_scale_variable(get_or<std::string>(s, "variable", "DatasetSize"));
        c.schedule = ScalingSchedule::defaults(c.schedule.variable);
        c.schedule.ratios = get_or<std::vector<double>>(s, "ratios", c.schedule.ratios);
    }
    if (j.contains("split")) {
        c.split_fraction = get_or<double>(j["split"], "fraction", c.split_fraction);
        c.split_seed = get_or<std::uint64_t>(j["split"], "seed", c.split_seed);
    }
    c.subsample_seed = get_or<std::uint64_t>(j, "subsample_seed", c.subsample_seed);
    if (j.contains("episode")) {
        const auto& e = j["episode"];
        c.episode.way = get_or<std::size_t>(e, "way", c.episode.way);
        c.episode.shot = get_or<std::size_t>(e, "shot", c.episode.shot);
        c.episode.queries_per_class = get_or<std::size_t>(e, "queries_per_class", c.episode.queries_per_class);
        c.episode.trials = get_or<std::size_t>(e, "trials", c.episode.trials);
        c.episode.master_seed = get_or<std::uint64_t>(e, "master_seed", c.episode.master_seed);
        c.episode.l2_normalize = get_or<bool>(e, "l2_normalize", c.episode.l2_normalize);
    }
    if (j.contains("finetune")) {
        const auto& f = j["finetune"];
        c.finetune.steps = get_or<std::size_t>(f, "steps", c.finetune.steps);
        c.finetune.learning_rate = get_or<double>(f, "learning_rate", c.finetune.learning_rate);
        if (f.contains("init_scale") && !f["init_scale"].is_null())
            c.finetune.init_scale = get_or<double>(f, "init_scale", 0.0);
    }
    if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& m : get_or<std::vector<std::string>>(j, "methods", {}))
            c.methods.push_back(parse_method(m));
    }
    if (j.contains("runs")) {
        if (!j["runs"].is_array()) throw ValidationError("config field 'runs' must be an array");
        for (const auto& r : j["runs"]) {
            RunEntry run;
            run.ratio = get_or<double>(r, "ratio", 1.0);
            run.checkpoint = get_or<std::string>(r, "checkpoint", "final");
            run.source = resolve(base_dir, get_or<std::string>(r, "source", ""));
            if (r.contains("targets")) {
                for (const auto& t : r["targets"]) {
                    TargetSpec spec;
                    spec.holdout = get_or<bool>(t, "holdout", false);
                    const auto path = get_or<std::string>(t, "path", "");
                    if (!path.empty()) spec.path = resolve(base_dir, path);
                    spec.name = get_or<std::string>(t, "name", spec.holdout ? "holdout" : path);
                    run.targets.push_back(std::move(spec));
                }
            }
            c.runs.push_back(std::move(run));
        }
    }
    c.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", c.output_dir.string()));
    if (j.contains("reference_curve") && !j["reference_curve"].is_null())
        c.reference_curve = resolve(base_dir, get_or<std::string>(j, "reference_curve", ""));
    c.convergence_epsilon = get_or<double>(j, "convergence_epsilon", c.convergence_epsilon);
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError("config " + path.string() + " is not valid JSON");
    return parse_run_config(j, path.parent_path());
}

json to_json(const RunConfig& c) {
    json j;
    j["label"] = c.label;
    j["schedule"] = {{"variable", to_string(c.schedule.variable)}, {"ratios", c.schedule.ratios}};
    j["split"] = {{"fraction", c.split_fraction}, {"seed", c.split_seed}};
    j["subsample_seed"] = c.subsample_seed;
    j["episode"] = {{"way", c.episode.way},
                    {"shot", c.episode.shot},
                    {"queries_per_class", c.episode.queries_per_class},
                    {"trials", c.episode.trials},
                    {"master_seed", c.episode.master_seed},
                    {"l2_normalize", c.episode.l2_normalize}};
    j["finetune"] = {{"steps", c.finetune.steps}, {"learning_rate", c.finetune.learning_rate}};
    j["finetune"]["init_scale"] = c.finetune.init_scale ? json(*c.finetune.init_scale) : json(nullptr);
    j["methods"] = json::array();
    for (Method m : c.methods) j["methods"].push_back(to_string(m));
    j["runs"] = json::array();
    for (const auto& r : c.runs) {
        json run = {{"ratio", r.ratio}, {"checkpoint", r.checkpoint}, {"source", r.source.string()}};
        run["targets"] = json::array();
        for (const auto& t : r.targets) {
            json tj = {{"name", t.name}};
            if (t.holdout) tj["holdout"] = true;
            else tj["path"] = t.path.string();
            run["targets"].push_back(tj);
        }
        j["runs"].push_back(run);
    }
    j["output_dir"] = c.output_dir.string();
    if (c.reference_curve) j["reference_curve"] = c.reference_curve->string();
    j["convergence_epsilon"] = c.convergence_epsilon;
    return j;
}

ReportBundle run_pipeline(const RunConfig& config, std::size_t workers) {
    config.validate();

    std::map<std::filesystem::path, std::shared_ptr<const EmbeddingDataset>> cache;
    auto load = [&](const std::filesystem::path& p) {
        auto it = cache.find(p);
        if (it == cache.end())
            it = cache.emplace(p, std::make_shared<const EmbeddingDataset>(read_embeddings(p))).first;
        return it->second;
    };

    ReportBundle bundle;
    std::map<double, double> scale_value; // ratio -> retained N or C
    // (ratio, method, target) -> best accuracy across checkpoints
    std::map<std::tuple<double, Method, std::string>, double> best;

    for (const auto& run : config.runs) {
        DatasetView source_view(nullptr, {});
        ClassSplit split;
        try {
            source_view = DatasetView(load(run.source));
            split = split_classes(source_view, config.split_fraction, config.split_seed);
            const DatasetView train = source_view.restrict_to(split.train_classes);
            const bool by_size = config.schedule.variable == ScaleVariable::DatasetSize;
            const DatasetView sub = by_size ? subsample_data(train, run.ratio, config.subsample_seed)
                                            : subsample_classes(train, run.ratio, config.subsample_seed);
            const double value = static_cast<double>(by_size ? sub.record_count() : sub.class_count());
            auto [it, inserted] = scale_value.emplace(run.ratio, value);
            if (!inserted && it->second != value)
                throw ValidationError("source files for one ratio disagree on the retained " +
                                      std::string(by_size ? "sample" : "class") + " count (" +
                                      format_double(it->second) + " vs " + format_double(value) + ")");
        } catch (const Error&) {
            rethrow_with_context(coordinate(run.ratio, "-", run.checkpoint, "source " + run.source.string()));
        }

        for (const auto& target : run.targets) {
            for (Method method : config.methods) {
                const Method one[] = {method};
                AccuracyEstimate estimate;
                try {
                    const DatasetView view = target.holdout ? source_view.restrict_to(split.holdout_classes)
                                                            : DatasetView(load(target.path));
                    estimate = run_evaluation(view, config.episode, one, config.finetune, workers).front();
                } catch (const Error&) {
                    rethrow_with_context(coordinate(run.ratio, to_string(method), run.checkpoint, target.name));
                }
                bundle.cells.push_back({run.ratio, run.checkpoint, target.name, estimate});
                auto key = std::make_tuple(run.ratio, method, target.name);
                auto [it, inserted] = best.emplace(key, estimate.mean_accuracy);
                if (!inserted) it->second = std::max(it->second, estimate.mean_accuracy);
            }
        }
    }

    std::string acc_csv = "ratio,value,checkpoint,target,method,mean_accuracy,ci_low,ci_high,trials,correct,total\n";
    for (const auto& c : bundle.cells) {
        const auto& e = c.estimate;
        acc_csv += format_double(c.ratio) + "," + format_double(scale_value.at(c.ratio)) + "," +
                   c.checkpoint + "," + c.target + "," + std::string(to_string(e.method)) + "," +
                   format_double(e.mean_accuracy) + "," + format_double(e.ci_low) + "," +
                   format_double(e.ci_high) + "," + std::to_string(e.trials) + "," +
                   std::to_string(e.correct) + "," + std::to_string(e.total) + "\n";
    }
    bundle.files["accuracy.csv"] = acc_csv;

    std::optional<FitResult> reference_fit;
    json summary;
    summary["config"] = to_json(config);
    summary["notes"] = json::array();
    if (config.reference_curve) {
        const auto ref = ingest_curve_csv(*config.reference_curve, config.schedule.variable);
        reference_fit = fit_power_law(ref);
        summary["reference_fit"] = fit_json(*reference_fit);
    }

    std::string best_csv = "ratio,value,method,accuracy,error_percent\n";
    std::vector<TableEntry> table;
    json fits = json::object();
    json comparisons = json::object();
    for (Method method : config.methods) {
        const std::string name(to_string(method));
        std::vector<CurvePoint> points;
        for (const auto& [ratio, value] : scale_value) {
            double acc_sum = 0.0;
            std::size_t n_targets = 0;
            for (const auto& [key, acc] : best) {
                if (std::get<0>(key) == ratio && std::get<1>(key) == method) {
                    acc_sum += acc;
                    ++n_targets;
                }
            }
            const double accuracy = acc_sum / static_cast<double>(n_targets);
            const double error = 100.0 * (1.0 - accuracy);
            best_csv += format_double(ratio) + "," + format_double(value) + "," + name + "," +
                        format_double(accuracy) + "," + format_double(error) + "\n";
            points.push_back({value, error});
        }
        const ScalingCurve curve(config.schedule.variable, points, config.label + " " + std::string(display_name(method)));
        bundle.files["curve_" + method_file_stem(method) + ".csv"] = format_curve_csv(curve);

        std::optional<FitResult> fit;
        if (curve.size() < 3) {
            summary["notes"].push_back(name + ": " + std::to_string(curve.size()) +
                                       " point(s), a power-law fit needs at least 3; no fit");
            fits[name] = {{"status", "insufficient_points"}, {"points", curve.size()}};
        } else {
            try {
                fit = fit_power_law(curve);
            } catch (const Error& e) {
                summary["notes"].push_back(name + ": fit failed: " + e.what());
            }
            if (fit) {
                fits[name] = fit_json(*fit);
                if (!fit->note.empty()) summary["notes"].push_back(name + ": " + fit->note);
                table.push_back({config.label, method, *fit});
                if (reference_fit && fit->converged && reference_fit->converged) {
                    const auto cmp = compare_convergence(*fit, *reference_fit, config.convergence_epsilon);
                    comparisons[name] = {{"epsilon", cmp.epsilon},
                                         {"alpha_fewshot", cmp.alpha_a},
                                         {"alpha_reference", cmp.alpha_b},
                                         {"n_star_fewshot", cmp.n_star_a},
                                         {"n_star_reference", cmp.n_star_b},
                                         {"faster", cmp.faster == Faster::A   ? "fewshot"
                                                    : cmp.faster == Faster::B ? "reference"
                                                                              : "tie"}};
                }
            }
        }
        const auto plot = render_plot(curve, fit);
        bundle.files["plot_" + method_file_stem(method) + ".svg"] = plot.svg;
        bundle.files["plot_" + method_file_stem(method) + ".csv"] = plot.sidecar_csv;
    }
    bundle.files["best.csv"] = best_csv;
    bundle.files["fits.json"] = fits.dump(2) + "\n";
    bundle.files["table.md"] = emit_table(table);
    if (reference_fit) bundle.files["convergence.json"] = comparisons.dump(2) + "\n";
    summary["cells"] = bundle.cells.size();
    bundle.files["summary.json"] = summary.dump(2) + "\n";
    return bundle;
}

void write_bundle(const ReportBundle& bundle, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    for (const auto& [name, contents] : bundle.files) write_text_file(dir / name, contents);
}

} // namespace fewscale
