#pragma once

#include <string_view>

namespace fewscale {

enum class ScaleVariable { DatasetSize, ClassCount };

std::string_view to_string(ScaleVariable v);
ScaleVariable parse_scale_variable(std::string_view s);

/// Err(x) = err_inf + k * x^alpha, errors in percent.
struct PowerLaw {
    double err_inf = 0.0;
    double k = 1.0;
    double alpha = -1.0;
    ScaleVariable variable = ScaleVariable::DatasetSize;
};

/// Err(x) = err_inf + (x / scale)^alpha; the same law with k = scale^-alpha.
struct NormalizedPowerLaw {
    double err_inf = 0.0;
    double scale = 1.0;
    double alpha = -1.0;
    ScaleVariable variable = ScaleVariable::DatasetSize;
};

/// Throws DegenerateLawError for alpha == 0 and ArgumentError for k <= 0.
NormalizedPowerLaw normalize(const PowerLaw& law);
PowerLaw denormalize(const NormalizedPowerLaw& law);

/// err_inf + k * value^alpha. Throws ArgumentError for value <= 0.
double predict_error(const PowerLaw& law, double value);
double predict_error(const NormalizedPowerLaw& law, double value);

/// Value at which the reducible term k * x^alpha falls to epsilon.
double convergence_point(const PowerLaw& law, double epsilon);

} // namespace fewscale
