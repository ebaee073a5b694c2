#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fewscale/fit.hpp"
#include "fewscale/power_law.hpp"
#include "fewscale/types.hpp"

namespace fewscale {

inline constexpr std::string_view kInfeasibleCell = "n/a (no decreasing trend)";

/// `39.95 + (N/8.18e5)^-0.82`: err_inf and alpha with two decimals, scale
/// as a two-decimal mantissa and a plain exponent.
std::string format_law_cell(const NormalizedPowerLaw& law);
std::string format_fit_cell(const FitResult& fit);

/// {err_inf, k, alpha, scale}; scale is null when it overflows.
nlohmann::json law_json(const PowerLaw& law);
/// Status, law, table cell, residuals and notes of a fit.
nlohmann::json fit_json(const FitResult& fit);

/// Inverse of format_law_cell, up to the printed precision.
NormalizedPowerLaw parse_law_cell(std::string_view cell);

struct TableEntry {
    std::string model;
    Method method = Method::Prototypical;
    FitResult fit;
};

/// One row per model (first-seen order), one column per method present in
/// `entries` (fine-tuning, matching, prototypical order).
std::string emit_table(const std::vector<TableEntry>& entries);

inline constexpr std::size_t kFitSamples = 100;

struct PlotFiles {
    std::string svg;
    std::string sidecar_csv;
};

/// Log-log SVG of the curve points (one <circle> each) and, when a fit is
/// given and feasible, a single <path> through 100 log-spaced samples of
/// the law. The sidecar CSV lists both series.
PlotFiles render_plot(const ScalingCurve& curve, const std::optional<FitResult>& fit);

/// Writes `path` (SVG) and `path` with extension `.csv`.
void emit_plot(const ScalingCurve& curve, const std::optional<FitResult>& fit,
               const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view contents);
std::string read_text_file(const std::filesystem::path& path);

} // namespace fewscale
