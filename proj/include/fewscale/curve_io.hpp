#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "fewscale/types.hpp"

namespace fewscale {

/// Parses `value,error_percent` CSV text. Rows are sorted by value.
/// Throws ParseError (with the 1-based line number) on malformed rows and
/// ValidationError on duplicate values or out-of-range errors.
ScalingCurve parse_curve_csv(std::string_view text,
                             ScaleVariable variable = ScaleVariable::DatasetSize,
                             std::string label = {});
ScalingCurve ingest_curve_csv(const std::filesystem::path& path,
                              ScaleVariable variable = ScaleVariable::DatasetSize);

std::string format_curve_csv(const ScalingCurve& curve);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

} // namespace fewscale
