#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fewscale/power_law.hpp"
#include "fewscale/types.hpp"

namespace fewscale {

enum class FitStatus {
    Converged,
    /// Refinement hit the iteration limit before the tolerance.
    NotConverged,
    /// The curve does not decrease, so no power law is fitted.
    Infeasible,
};

struct FitResult {
    PowerLaw law;
    double sse = 0.0;
    std::vector<double> residuals; // observed - predicted, in point order
    bool converged = false;
    FitStatus status = FitStatus::NotConverged;
    std::size_t iterations = 0;
    std::string note;
};

struct FitOptions {
    std::size_t grid_size = 200;
    double grid_margin = 1e-6;
    std::size_t max_iterations = 200;
    double tolerance = 1e-10;
    double alpha_min = -10.0;
    double alpha_max = -1e-3;
    double k_min = 1e-12;
    double k_max = 1e12;
};

/// Least-squares fit of err = err_inf + k * value^alpha in raw percent
/// space. A grid over err_inf seeds a log-log OLS for (k, alpha); the best
/// grid point is refined by Levenberg-Marquardt on all three parameters.
///
/// Throws InsufficientDataError for fewer than 3 points and ValidationError
/// for a zero error rate. A curve whose last point is not below its first
/// yields status Infeasible instead of throwing.
FitResult fit_power_law(const ScalingCurve& curve, const FitOptions& options = {});

enum class Faster { A, B, Tie };

struct ConvergenceComparison {
    double epsilon = 0.0;
    double alpha_a = 0.0;
    double alpha_b = 0.0;
    double n_star_a = 0.0;
    double n_star_b = 0.0;
    Faster faster = Faster::Tie;
};

/// The faster-converging law is the one whose reducible error reaches
/// `epsilon` at the smaller scale. Throws ComparisonUnavailableError if
/// either fit did not converge or the variables differ.
ConvergenceComparison compare_convergence(const FitResult& a, const FitResult& b, double epsilon);

} // namespace fewscale
