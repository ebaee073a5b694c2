// fewscale: episodic few-shot evaluation and power-law scaling reports.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdint>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fewscale/curve_io.hpp"
#include "fewscale/embedding_io.hpp"
#include "fewscale/errors.hpp"
#include "fewscale/evaluation.hpp"
#include "fewscale/fit.hpp"
#include "fewscale/pipeline.hpp"
#include "fewscale/report.hpp"
#include "fewscale/sampler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fewscale;

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 1;
    std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_config) {
    if (with_config) cmd->add_option("--config", f.config, "JSON config file");
    cmd->add_option("--seed", f.seed, "Master seed (overrides the config)");
    cmd->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "Output path");
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty()) std::cout << text;
    else write_text_file(out, text);
}

json estimate_json(const AccuracyEstimate& e) {
    return {{"method", to_string(e.method)}, {"mean_accuracy", e.mean_accuracy},
            {"ci_low", e.ci_low},            {"ci_high", e.ci_high},
            {"trials", e.trials},            {"correct", e.correct},
            {"total", e.total}};
}

int cmd_split(const std::string& input, double fraction, const CommonFlags& f) {
    auto dataset = std::make_shared<const EmbeddingDataset>(read_embeddings(input));
    const DatasetView view(dataset);
    const auto split = split_classes(view, fraction, f.seed.value_or(0));
    json j = {{"fraction", fraction},
              {"seed", split.seed},
              {"train_classes", split.train_classes},
              {"holdout_classes", split.holdout_classes}};
    if (f.out.empty()) {
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::error_code ec;
    fs::create_directories(f.out, ec);
    if (ec) throw IoError("cannot create " + f.out + ": " + ec.message());
    write_embeddings(view.restrict_to(split.train_classes).materialize(), fs::path(f.out) / "train.embd");
    write_embeddings(view.restrict_to(split.holdout_classes).materialize(), fs::path(f.out) / "holdout.embd");
    write_text_file(fs::path(f.out) / "split.json", j.dump(2) + "\n");
    return 0;
}

int cmd_eval(const std::string& input, const CommonFlags& f) {
    RunConfig cfg;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw IoError("cannot open config " + f.config);
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) throw ValidationError("config is not valid JSON");
        // Only the evaluation sections are needed here; borrow the run parser
        // with a placeholder run so validation of the rest passes.
        j["runs"] = json::array({{{"source", input}, {"targets", json::array({{{"holdout", true}}})}}});
        j.erase("schedule");
        cfg = parse_run_config(j);
    }
    if (f.seed) cfg.episode.master_seed = *f.seed;
    auto dataset = std::make_shared<const EmbeddingDataset>(read_embeddings(input));
    const auto estimates = run_evaluation(DatasetView(dataset), cfg.episode, cfg.methods, cfg.finetune, f.workers);
    json j = json::array();
    for (const auto& e : estimates) j.push_back(estimate_json(e));
    emit(f.out, j.dump(2) + "\n");
    return 0;
}

int cmd_fit(const std::string& input, const std::string& variable, const std::string& compare,
            double epsilon, const CommonFlags& f) {
    const auto var = parse_scale_variable(variable);
    const auto fit = fit_power_law(ingest_curve_csv(input, var));
    json j = {{"fit", fit_json(fit)}};
    if (!compare.empty()) {
        const auto other = fit_power_law(ingest_curve_csv(compare, var));
        j["other"] = fit_json(other);
        const auto cmp = compare_convergence(fit, other, epsilon);
        j["comparison"] = {{"epsilon", cmp.epsilon},   {"alpha_a", cmp.alpha_a},
                           {"alpha_b", cmp.alpha_b},   {"n_star_a", cmp.n_star_a},
                           {"n_star_b", cmp.n_star_b},
                           {"faster", cmp.faster == Faster::A ? "a" : cmp.faster == Faster::B ? "b" : "tie"}};
    }
    emit(f.out, j.dump(2) + "\n");
    return 0;
}

int cmd_report(const std::vector<std::string>& specs, const std::string& variable, const CommonFlags& f) {
    const auto var = parse_scale_variable(variable);
    std::vector<TableEntry> entries;
    for (const auto& spec : specs) {
        const auto colon = spec.find(':');
        const auto eq = spec.find('=');
        if (colon == std::string::npos || eq == std::string::npos || eq < colon)
            throw ArgumentError("report inputs look like MODEL:METHOD=curve.csv, got '" + spec + "'");
        TableEntry e;
        e.model = spec.substr(0, colon);
        e.method = parse_method(spec.substr(colon + 1, eq - colon - 1));
        e.fit = fit_power_law(ingest_curve_csv(spec.substr(eq + 1), var));
        entries.push_back(std::move(e));
    }
    emit(f.out, emit_table(entries));
    return 0;
}

int cmd_plot(const std::string& input, const std::string& variable, bool no_fit, const CommonFlags& f) {
    if (f.out.empty()) throw ArgumentError("plot needs --out <file.svg>");
    const auto curve = ingest_curve_csv(input, parse_scale_variable(variable));
    std::optional<FitResult> fit;
    if (!no_fit && curve.size() >= 3) fit = fit_power_law(curve);
    emit_plot(curve, fit, f.out);
    return 0;
}

int cmd_pipeline(const CommonFlags& f) {
    if (f.config.empty()) throw ArgumentError("pipeline needs --config <file.json>");
    auto cfg = load_run_config(f.config);
    if (f.seed) cfg.episode.master_seed = *f.seed;
    if (!f.out.empty()) cfg.output_dir = f.out;
    const auto bundle = run_pipeline(cfg, f.workers);
    write_bundle(bundle, cfg.output_dir);
    std::cout << bundle.files.at("table.md");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Few-shot episodic evaluation and power-law scaling reports"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string input;
    double fraction = 0.8;
    std::string variable = "DatasetSize";
    std::string compare;
    double epsilon = 1.0;
    bool no_fit = false;
    std::vector<std::string> report_specs;

    auto* split = app.add_subcommand("split", "Split an embedding file's classes into train/holdout");
    split->add_option("embeddings", input, "Embedding file")->required();
    split->add_option("--fraction", fraction, "Train class fraction");
    add_common(split, flags, false);

    auto* eval = app.add_subcommand("eval", "Episodic accuracy of an embedding file");
    eval->add_option("embeddings", input, "Embedding file")->required();
    add_common(eval, flags, true);

    auto* fit = app.add_subcommand("fit", "Fit a power law to a value,error_percent curve");
    fit->add_option("curve", input, "Curve CSV")->required();
    fit->add_option("--variable", variable, "DatasetSize or ClassCount");
    fit->add_option("--compare", compare, "Second curve for a convergence comparison");
    fit->add_option("--epsilon", epsilon, "Reducible error level for the comparison (percent)");
    add_common(fit, flags, false);

    auto* report = app.add_subcommand("report", "Power-law table from MODEL:METHOD=curve.csv inputs");
    report->add_option("curves", report_specs, "MODEL:METHOD=curve.csv")->required();
    report->add_option("--variable", variable, "DatasetSize or ClassCount");
    add_common(report, flags, false);

    auto* plot = app.add_subcommand("plot", "Log-log SVG of a curve and its fit");
    plot->add_option("curve", input, "Curve CSV")->required();
    plot->add_option("--variable", variable, "DatasetSize or ClassCount");
    plot->add_flag("--no-fit", no_fit, "Plot the points only");
    add_common(plot, flags, false);

    auto* pipeline = app.add_subcommand("pipeline", "Split, subsample, evaluate, fit and report");
    add_common(pipeline, flags, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*split) return cmd_split(input, fraction, flags);
        if (*eval) return cmd_eval(input, flags);
        if (*fit) return cmd_fit(input, variable, compare, epsilon, flags);
        if (*report) return cmd_report(report_specs, variable, flags);
        if (*plot) return cmd_plot(input, variable, no_fit, flags);
        if (*pipeline) return cmd_pipeline(flags);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_io() ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
