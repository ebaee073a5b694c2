// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "episode_support.hpp"
#include "fewscale/curve_io.hpp"
#include "fewscale/evaluation.hpp"
#include "fewscale/fewshot.hpp"
#include "fewscale/fit.hpp"
#include "fewscale/pipeline.hpp"
#include "fewscale/power_law.hpp"
#include "fewscale/sampler.hpp"
#include "published_laws.hpp"
#include "test_support.hpp"

using namespace fewscale;
using fewscale::testing::TempDir;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    double limit_seconds; // <= 0: no runtime limit
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome published_predictions() {
    double worst = 0.0;
    for (const auto& p : testing::kPublishedLaws) {
        const double want = p.law.err_inf + 1.0;
        worst = std::max(worst, std::abs(predict_error(p.law, p.law.scale) - want));
        worst = std::max(worst, std::abs(predict_error(denormalize(p.law), p.law.scale) - want));
    }
    return {worst <= 1e-9, "12 laws, max |Err(scale) - (Err_inf + 1)| = " + fmt("%.3g", worst)};
}

Outcome published_round_trip() {
    double worst = 0.0;
    std::size_t failed = 0;
    for (const auto& p : testing::kPublishedLaws) {
        std::vector<CurvePoint> pts;
        for (double r : testing::kDataRatios) pts.push_back({r * 1e6, predict_error(p.law, r * 1e6)});
        const FitResult fit = fit_power_law(ScalingCurve(ScaleVariable::DatasetSize, pts));
        const NormalizedPowerLaw got = normalize(fit.law);
        const double e = std::max({rel(got.err_inf, p.law.err_inf), rel(got.scale, p.law.scale),
                                   rel(got.alpha, p.law.alpha)});
        worst = std::max(worst, e);
        if (!fit.converged || !(e <= 1e-3)) ++failed;
    }
    return {failed == 0, std::to_string(12 - failed) + "/12 recovered, max relative error " + fmt("%.3g", worst)};
}

Outcome noisy_alpha() {
    const PowerLaw truth{30.0, 500.0, -0.5};
    const std::vector<double> values{1e3, 1e4, 1e5, 1e6, 1e7};
    std::mt19937_64 gen(2026);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<double> errors;
    for (int i = 0; i < 100; ++i) {
        std::vector<CurvePoint> pts;
        for (double v : values) pts.push_back({v, predict_error(truth, v) * (1.0 + noise(gen))});
        errors.push_back(std::abs(fit_power_law(ScalingCurve(ScaleVariable::DatasetSize, pts)).law.alpha - truth.alpha));
    }
    std::sort(errors.begin(), errors.end());
    const double median = 0.5 * (errors[49] + errors[50]);
    return {median <= 0.05, "median |alpha error| over 100 resamples = " + fmt("%.4f", median)};
}

Outcome one_shot_equivalence() {
    const DatasetView view(testing::share(testing::random_dataset(40, 30, 64, 64)));
    EpisodeConfig cfg;
    cfg.way = 5;
    cfg.shot = 1;
    cfg.master_seed = 2024;
    std::size_t queries = 0, agree = 0;
    for (std::uint64_t t = 0; t < 10000; ++t) {
        const Episode ep = l2_normalized(sample_episode(view, cfg, t));
        const Prototypes protos = compute_prototypes(ep);
        for (const auto& q : ep.query) {
            ++queries;
            agree += classify_matching(q.x, ep) == classify_prototypical(q.x, protos);
        }
    }
    return {agree == queries, std::to_string(agree) + "/" + std::to_string(queries) + " queries agree"};
}

Outcome separability() {
    const Method methods[] = {Method::FineTune, Method::Matching, Method::Prototypical};
    bool ok = true;
    std::string detail;
    // Centers 100 * e_c (141 apart), sigma 0.01.
    const DatasetView clean(testing::share(testing::gaussian_clusters(10, 60, 16, 100.0, 0.01, 5)));
    const auto control_base = testing::gaussian_clusters(5, 2000, 16, 100.0, 0.01, 6);
    const DatasetView control(testing::share(testing::shuffle_labels(control_base, 7)));
    for (std::size_t shot : {1u, 5u}) {
        EpisodeConfig cfg;
        cfg.shot = shot;
        cfg.trials = 1000;
        cfg.master_seed = 0;
        for (const auto& e : run_evaluation(clean, cfg, methods, {}, 4)) {
            ok = ok && e.mean_accuracy >= 0.99;
            detail += std::to_string(shot) + "-shot " + std::string(to_string(e.method)) + " " +
                      fmt("%.4f", e.mean_accuracy) + "; ";
        }
        for (const auto& e : run_evaluation(control, cfg, methods, {}, 4)) {
            const double band = kZ95 * std::sqrt(0.2 * 0.8 / static_cast<double>(e.total));
            ok = ok && std::abs(e.mean_accuracy - 0.2) <= band;
            detail += "shuffled " + fmt("%.4f", e.mean_accuracy) + " (band +/-" + fmt("%.4f", band) + "); ";
        }
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

Outcome gradient_check() {
    std::mt19937_64 gen(99);
    const double h = 1e-6;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto ep = testing::random_episode(gen, 5, 1 + trial % 5, 16);
        // A few large steps move the head away from its near-uniform init.
        auto head = finetune_linear_head(ep, {.steps = 3, .learning_rate = 0.5}, gen());
        const auto grad = support_loss_gradient(head, ep);
        auto check = [&](double& param, double analytic) {
            const double saved = param;
            param = saved + h;
            const double up = support_loss(head, ep);
            param = saved - h;
            const double down = support_loss(head, ep);
            param = saved;
            const double numeric = (up - down) / (2 * h);
            // Relative to the gradient scale; tiny components are judged absolutely.
            worst = std::max(worst, std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-3}));
        };
        for (std::size_t i = 0; i < head.weights.data().size(); ++i) check(head.weights.data()[i], grad.weights.data()[i]);
        for (std::size_t c = 0; c < head.way(); ++c) check(head.bias[c], grad.bias[c]);
    }
    return {worst <= 1e-4, "max relative error over 100 episodes = " + fmt("%.3g", worst)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
    TempDir dir("acceptance_det");
    const RunConfig cfg = parse_run_config(
        testing::write_scaling_family(dir.path(), {1.0, 0.5, 0.25, 0.125}, {"early", "late"}, 200), dir.path());
    const std::size_t workers[] = {1, 1, 8, 8};
    std::vector<std::filesystem::path> outs;
    for (std::size_t i = 0; i < std::size(workers); ++i) {
        outs.push_back(dir / ("bundle" + std::to_string(i)));
        write_bundle(run_pipeline(cfg, workers[i]), outs.back());
    }
    std::size_t files = 0, mismatched = 0;
    for (const auto& entry : std::filesystem::directory_iterator(outs[0])) {
        ++files;
        const std::string ref = slurp(entry.path());
        for (std::size_t i = 1; i < outs.size(); ++i)
            if (slurp(outs[i] / entry.path().filename()) != ref) ++mismatched;
    }
    for (std::size_t i = 1; i < outs.size(); ++i)
        if (static_cast<std::size_t>(std::distance(std::filesystem::directory_iterator(outs[i]),
                                                   std::filesystem::directory_iterator())) != files)
            ++mismatched;
    return {files > 0 && mismatched == 0,
            std::to_string(files) + " files x 4 runs (1,1,8,8 workers), " + std::to_string(mismatched) + " mismatches"};
}

Outcome monotone_scaling() {
    TempDir dir("acceptance_mono");
    const RunConfig cfg = parse_run_config(
        testing::write_scaling_family(dir.path(), {1.0, 0.5, 0.25, 0.125, 0.0625}, {"final"}, 1000), dir.path());
    const ReportBundle bundle = run_pipeline(cfg, 4);
    const auto fits = nlohmann::json::parse(bundle.files.at("fits.json"));
    bool ok = true;
    std::string detail;
    for (Method m : cfg.methods) {
        const std::string name(to_string(m));
        std::string stem = name;
        std::transform(stem.begin(), stem.end(), stem.begin(), [](unsigned char c) { return std::tolower(c); });
        const auto curve = parse_curve_csv(bundle.files.at("curve_" + stem + ".csv"), ScaleVariable::DatasetSize);
        bool decreasing = curve.size() == 5;
        for (std::size_t i = 1; i < curve.size(); ++i)
            decreasing = decreasing && curve.points()[i].error_percent < curve.points()[i - 1].error_percent;
        const bool converged = fits[name].value("status", "") == "converged";
        const double alpha = converged ? fits[name]["law"]["alpha"].get<double>() : 0.0;
        ok = ok && decreasing && converged && alpha < 0.0;
        detail += name + ": err " + fmt("%.1f", curve.points().front().error_percent) + "->" +
                  fmt("%.1f", curve.points().back().error_percent) + (decreasing ? " decreasing" : " NOT decreasing") +
                  ", alpha " + fmt("%.3f", alpha) + (converged ? "" : " (not converged)") + "; ";
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"published-law-predict", 1.0, published_predictions},
        {"published-law-round-trip", 10.0, published_round_trip},
        {"noisy-alpha-recovery", 30.0, noisy_alpha},
        {"one-shot-equivalence", 30.0, one_shot_equivalence},
        {"separability", 120.0, separability},
        {"gradient-check", 0.0, gradient_check},
        {"determinism", 0.0, determinism},
        {"monotone-scaling", 0.0, monotone_scaling},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.limit_seconds <= 0.0 || secs < c.limit_seconds;
        const bool pass = out.pass && in_time;
        failures += !pass;
        std::string timing = fmt("%.2f s", secs);
        if (c.limit_seconds > 0.0) timing += fmt(" (limit %g s)", c.limit_seconds);
        std::printf("%s %-26s %s | %s\n", pass ? "PASS" : "FAIL", c.name.c_str(), timing.c_str(), out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
