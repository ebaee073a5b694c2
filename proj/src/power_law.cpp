#include "fewscale/power_law.hpp"

#include <cmath>
#include <string>

#include "fewscale/errors.hpp"

namespace fewscale {

std::string_view to_string(ScaleVariable v) {
    return v == ScaleVariable::DatasetSize ? "DatasetSize" : "ClassCount";
}

ScaleVariable parse_scale_variable(std::string_view s) {
    if (s == "DatasetSize") return ScaleVariable::DatasetSize;
    if (s == "ClassCount") return ScaleVariable::ClassCount;
    throw ArgumentError("unknown scale variable '" + std::string(s) + "'");
}

NormalizedPowerLaw normalize(const PowerLaw& law) {
    if (law.alpha == 0.0) throw DegenerateLawError("power law with alpha = 0 has no scale");
    if (!(law.k > 0.0)) throw ArgumentError("power law k must be positive");
    return {law.err_inf, std::pow(law.k, -1.0 / law.alpha), law.alpha, law.variable};
}

PowerLaw denormalize(const NormalizedPowerLaw& law) {
    if (law.alpha == 0.0) throw DegenerateLawError("power law with alpha = 0 has no scale");
    if (!(law.scale > 0.0)) throw ArgumentError("power law scale must be positive");
    return {law.err_inf, std::pow(law.scale, -law.alpha), law.alpha, law.variable};
}

double predict_error(const PowerLaw& law, double value) {
    if (!(value > 0.0)) throw ArgumentError("predict_error needs a positive value");
    return law.err_inf + law.k * std::pow(value, law.alpha);
}

double predict_error(const NormalizedPowerLaw& law, double value) {
    if (!(value > 0.0)) throw ArgumentError("predict_error needs a positive value");
    return law.err_inf + std::pow(value / law.scale, law.alpha);
}

double convergence_point(const PowerLaw& law, double epsilon) {
    if (!(epsilon > 0.0)) throw ArgumentError("convergence epsilon must be positive");
    if (law.alpha == 0.0) throw DegenerateLawError("power law with alpha = 0 never converges");
    return std::pow(epsilon / law.k, 1.0 / law.alpha);
}

} // namespace fewscale
