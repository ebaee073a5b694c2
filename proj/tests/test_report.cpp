#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <limits>
#include <doctest.h>

#include <charconv>
#include <cmath>
#include <random>
#include <regex>
#include <sstream>

#include "fewscale/curve_io.hpp"
#include "fewscale/errors.hpp"
#include "fewscale/report.hpp"
#include "published_laws.hpp"
#include "test_support.hpp"

using namespace fewscale;
using fewscale::testing::TempDir;

namespace {

FitResult converged_fit(NormalizedPowerLaw n) {
    FitResult f;
    f.law = denormalize(n);
    f.converged = true;
    f.status = FitStatus::Converged;
    return f;
}

std::size_t count(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

} // namespace

TEST_CASE("law cells use the published notation") {
    CHECK(format_law_cell({39.95, 8.18e5, -0.82}) == "39.95 + (N/8.18e5)^-0.82");
    CHECK(format_law_cell({32.51, 5.59e9, -0.25}) == "32.51 + (N/5.59e9)^-0.25");
    CHECK(format_law_cell({1.0, 9.996e5, -1.0}) == "1.00 + (N/1.00e6)^-1.00");
    CHECK(format_law_cell({0.0, std::numeric_limits<double>::infinity(), -0.003}) == "0.00 + (N/inf)^-0.00");
    CHECK(format_law_cell({1.0, 0.5, -2.0, ScaleVariable::ClassCount}) == "1.00 + (C/5.00e-1)^-2.00");
    FitResult infeasible;
    infeasible.status = FitStatus::Infeasible;
    CHECK(format_fit_cell(infeasible) == "n/a (no decreasing trend)");
    CHECK(format_fit_cell(converged_fit({39.95, 8.18e5, -0.82})) == "39.95 + (N/8.18e5)^-0.82");
}

TEST_CASE("rendered cells parse back within printed precision") {
    for (const auto& row : testing::kPublishedLaws) {
        const auto back = parse_law_cell(format_law_cell(row.law));
        CHECK(back.err_inf == doctest::Approx(row.law.err_inf).epsilon(1e-12));
        CHECK(back.scale == doctest::Approx(row.law.scale).epsilon(1e-12));
        CHECK(back.alpha == doctest::Approx(row.law.alpha).epsilon(1e-12));
    }
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> err(0.0, 90.0), lscale(-2.0, 12.0), alpha(-3.0, -0.01);
    for (int i = 0; i < 1000; ++i) {
        const NormalizedPowerLaw law{err(gen), std::pow(10.0, lscale(gen)), alpha(gen)};
        const auto back = parse_law_cell(format_law_cell(law));
        CHECK(std::abs(back.err_inf - law.err_inf) <= 0.005 + 1e-12);
        CHECK(std::abs(back.alpha - law.alpha) <= 0.005 + 1e-12);
        // two-decimal mantissa in [1, 10): relative error at most 0.005
        CHECK(std::abs(back.scale - law.scale) <= 0.0051 * law.scale);
    }
    CHECK_THROWS_AS(parse_law_cell("n/a (no decreasing trend)"), ParseError);
}

TEST_CASE("table layout") {
    SUBCASE("empty table is header only") {
        const auto t = emit_table({});
        CHECK(t == "| Model | Fine-Tuning Err(N) | Matching Network Err(N) | Prototypical Network Err(N) |\n"
                   "|---|---|---|---|\n");
    }
    SUBCASE("published rows") {
        std::vector<TableEntry> entries;
        for (const auto& row : testing::kPublishedLaws)
            entries.push_back({std::string(row.model), row.method, converged_fit(row.law)});
        const auto t = emit_table(entries);
        CHECK(t.find("| ResNet18 | 39.95 + (N/8.18e5)^-0.82 | 34.95 + (N/4.25e5)^-1.06 | "
                     "37.55 + (N/1.54e6)^-0.69 |") != std::string::npos);
        CHECK(t.find("| EfficientNet B0 | 38.41 + (N/1.54e7)^-0.37 | 27.72 + (N/7.68e7)^-0.35 | "
                     "30.10 + (N/3.51e8)^-0.30 |") != std::string::npos);
        CHECK(count(t, "\n") == 6);
    }
    SUBCASE("missing and infeasible cells") {
        FitResult infeasible;
        infeasible.status = FitStatus::Infeasible;
        const auto t = emit_table({{"A", Method::Prototypical, infeasible},
                                   {"B", Method::Matching, converged_fit({1, 10, -1})}});
        CHECK(t.find("| A | - | n/a (no decreasing trend) |") != std::string::npos);
        CHECK(t.find("| B | 1.00 + (N/1.00e1)^-1.00 | - |") != std::string::npos);
    }
}

TEST_CASE("ingest_curve_csv") {
    SUBCASE("direct parse") {
        const auto c = parse_curve_csv("value,error_percent\n1000,60\n10000,50\n100000,45");
        REQUIRE(c.size() == 3);
        CHECK(c.points()[0].value == 1000);
        CHECK(c.points()[2].error_percent == 45);
    }
    SUBCASE("rows are sorted") {
        const auto c = parse_curve_csv("value,error_percent\r\n100000,45\r\n1000,60\r\n10000,50\r\n");
        CHECK(c.points()[0].value == 1000);
        CHECK(c.points()[1].value == 10000);
    }
    SUBCASE("malformed row cites its line") {
        CHECK_THROWS_WITH_AS(parse_curve_csv("value,error_percent\n1e4,abc\n"), doctest::Contains("line 2"),
                             ParseError);
        CHECK_THROWS_WITH_AS(parse_curve_csv("value,error_percent\n1,2\n\n3,4,5\n"), doctest::Contains("line 4"),
                             ParseError);
        CHECK_THROWS_AS(parse_curve_csv("n,err\n1,2\n"), ParseError);
        CHECK_THROWS_AS(parse_curve_csv(""), ParseError);
    }
    SUBCASE("duplicates and ranges") {
        CHECK_THROWS_WITH_AS(parse_curve_csv("value,error_percent\n10,5\n10,6\n"), doctest::Contains("line 3"),
                             ValidationError);
        CHECK_THROWS_AS(parse_curve_csv("value,error_percent\n10,101\n"), ValidationError);
        CHECK_THROWS_AS(parse_curve_csv("value,error_percent\n-10,1\n"), ValidationError);
    }
    SUBCASE("file round trip") {
        TempDir dir("curve");
        const ScalingCurve c(ScaleVariable::DatasetSize, {{62500, 51.1}, {1e6, 40.123456789012345}});
        write_text_file(dir / "c.csv", format_curve_csv(c));
        const auto back = ingest_curve_csv(dir / "c.csv");
        CHECK(back.points()[1].error_percent == 40.123456789012345);
        CHECK_THROWS_AS(ingest_curve_csv(dir / "missing.csv"), IoError);
    }
}

TEST_CASE("plots") {
    const NormalizedPowerLaw law{39.95, 8.18e5, -0.82};
    std::vector<CurvePoint> pts;
    for (double r : testing::kDataRatios) pts.push_back({r * 1e6, predict_error(law, r * 1e6)});
    const ScalingCurve curve(ScaleVariable::DatasetSize, pts, "ResNet18 <fine-tuning>");

    SUBCASE("points and fitted path") {
        const auto files = render_plot(curve, converged_fit(law));
        CHECK(count(files.svg, "<circle") == 5);
        CHECK(count(files.svg, "<path") == 1);
        CHECK(files.svg.find("&lt;fine-tuning&gt;") != std::string::npos);
        CHECK(count(files.sidecar_csv, "\nfit,") == kFitSamples);
        CHECK(count(files.sidecar_csv, "\ndata,") == 5);
    }
    SUBCASE("curve only") {
        const auto files = render_plot(curve, std::nullopt);
        CHECK(count(files.svg, "<circle") == 5);
        CHECK(count(files.svg, "<path") == 0);
        FitResult infeasible;
        infeasible.status = FitStatus::Infeasible;
        CHECK(count(render_plot(curve, infeasible).svg, "<path") == 0);
    }
    SUBCASE("fitted series equals predict_error") {
        const auto fit = converged_fit(law);
        const auto files = render_plot(curve, fit);
        std::istringstream in(files.sidecar_csv);
        std::string line;
        std::size_t rows = 0;
        double prev_x = 0.0;
        while (std::getline(in, line)) {
            if (line.rfind("fit,", 0) != 0) continue;
            const auto comma = line.find(',', 4);
            const double x = std::stod(line.substr(4, comma - 4));
            const double y = std::stod(line.substr(comma + 1));
            CHECK(x > prev_x);
            CHECK(std::abs(y - predict_error(fit.law, x)) <= 1e-9);
            prev_x = x;
            ++rows;
        }
        CHECK(rows == kFitSamples);
        CHECK(prev_x == 1e6);
    }
    SUBCASE("written files") {
        TempDir dir("plot");
        emit_plot(curve, converged_fit(law), dir / "p.svg");
        CHECK(std::filesystem::exists(dir / "p.svg"));
        CHECK(std::filesystem::exists(dir / "p.csv"));
        CHECK_THROWS_AS(emit_plot(curve, std::nullopt, "/nonexistent/dir/p.svg"), IoError);
    }
}
