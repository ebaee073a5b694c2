#include "fewscale/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fewscale/errors.hpp"

namespace fewscale {

std::string_view to_string(Method m) {
    switch (m) {
    case Method::FineTune: return "FineTune";
    case Method::Prototypical: return "Prototypical";
    case Method::Matching: return "Matching";
    }
    return "?";
}

std::string_view display_name(Method m) {
    switch (m) {
    case Method::FineTune: return "Fine-Tuning";
    case Method::Prototypical: return "Prototypical Network";
    case Method::Matching: return "Matching Network";
    }
    return "?";
}

Method parse_method(std::string_view s) {
    for (Method m : kAllMethods)
        if (s == to_string(m)) return m;
    throw ArgumentError("unknown method '" + std::string(s) + "'");
}

ScalingCurve::ScalingCurve(ScaleVariable variable, std::vector<CurvePoint> points, std::string label)
    : variable_(variable), points_(std::move(points)), label_(std::move(label)) {
    std::stable_sort(points_.begin(), points_.end(),
                     [](const CurvePoint& a, const CurvePoint& b) { return a.value < b.value; });
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        if (!(p.value > 0.0) || !std::isfinite(p.value))
            throw ValidationError("curve point " + std::to_string(i) + " has non-positive value");
        if (!(p.error_percent >= 0.0 && p.error_percent <= 100.0))
            throw ValidationError("curve point " + std::to_string(i) + " error outside [0, 100]");
        if (i > 0 && !(points_[i - 1].value < p.value))
            throw ValidationError("duplicate curve value at point " +
                                  std::to_string(i) + ")");
    }
}

} // namespace fewscale
