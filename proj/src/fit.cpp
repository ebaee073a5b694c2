#include "fewscale/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fewscale/errors.hpp"

namespace fewscale {
namespace {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

// Gaussian elimination with partial pivoting; false if singular.
bool solve3(Mat3 a, Vec3 b, Vec3& x) {
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (a[pivot][col] == 0.0 || !std::isfinite(a[pivot][col])) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 3; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

// The refinement works in (err_inf, beta, alpha) with
//   err(v) = err_inf + exp(beta + alpha * (ln v - mean ln v)),
// i.e. beta = ln k + alpha * mean_ln_v. Centering decorrelates beta and alpha.
class Problem {
public:
    Problem(const ScalingCurve& curve, const FitOptions& opt) : opt_(opt) {
        for (const auto& p : curve.points()) {
            x_.push_back(std::log(p.value));
            y_.push_back(p.error_percent);
        }
        x_mean_ = std::accumulate(x_.begin(), x_.end(), 0.0) / static_cast<double>(x_.size());
        for (double& x : x_) x -= x_mean_;
        min_err_ = *std::min_element(y_.begin(), y_.end());
        grid_max_ = std::max(0.0, min_err_ - opt.grid_margin);
        c_max_ = std::nextafter(min_err_, 0.0);
    }

    std::size_t size() const { return x_.size(); }
    double min_err() const { return min_err_; }
    double grid_max() const { return grid_max_; }

    double model(const Vec3& t, std::size_t i) const { return t[0] + std::exp(t[1] + t[2] * x_[i]); }

    double sse(const Vec3& t) const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            const double r = y_[i] - model(t, i);
            s += r * r;
        }
        return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
    }

    Vec3 project(Vec3 t) const {
        t[0] = std::clamp(t[0], 0.0, c_max_);
        t[2] = std::clamp(t[2], opt_.alpha_min, opt_.alpha_max);
        // ln k = beta - alpha * mean_ln_v must stay inside the k bounds.
        const double lo = std::log(opt_.k_min) + t[2] * x_mean_;
        const double hi = std::log(opt_.k_max) + t[2] * x_mean_;
        t[1] = std::clamp(t[1], lo, hi);
        return t;
    }

    // Log-log OLS of (err - c) on value for a fixed err_inf candidate.
    Vec3 seed_for(double c) const {
        const double n = static_cast<double>(size());
        double sy = 0.0;
        for (double y : y_) sy += std::log(y - c);
        const double ybar = sy / n;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            sxy += x_[i] * (std::log(y_[i] - c) - ybar);
            sxx += x_[i] * x_[i];
        }
        const double alpha = sxx > 0.0 ? sxy / sxx : opt_.alpha_max;
        // x is centered, so the intercept at mean ln v is the mean of ln(err - c).
        return project({c, ybar, alpha});
    }

    void normal_equations(const Vec3& t, Mat3& a, Vec3& g) const {
        a = {};
        g = {};
        for (std::size_t i = 0; i < size(); ++i) {
            const double e = std::exp(t[1] + t[2] * x_[i]);
            const Vec3 j{1.0, e, e * x_[i]};
            const double r = y_[i] - (t[0] + e);
            for (int p = 0; p < 3; ++p) {
                g[p] += j[p] * r;
                for (int q = 0; q < 3; ++q) a[p][q] += j[p] * j[q];
            }
        }
    }

    PowerLaw to_law(const Vec3& t, ScaleVariable variable) const {
        return {t[0], std::exp(t[1] - t[2] * x_mean_), t[2], variable};
    }

private:
    const FitOptions& opt_;
    std::vector<double> x_;
    std::vector<double> y_;
    double x_mean_ = 0.0;
    double min_err_ = 0.0;
    double grid_max_ = 0.0;
    double c_max_ = 0.0;
};

} // namespace

FitResult fit_power_law(const ScalingCurve& curve, const FitOptions& options) {
    const auto& pts = curve.points();
    if (pts.size() < 3)
        throw InsufficientDataError("power-law fit needs at least 3 points, got " +
                                    std::to_string(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (!(pts[i].error_percent > 0.0))
            throw ValidationError("power-law fit needs error rates in (0, 100]; point " +
                                  std::to_string(i) + " is " + std::to_string(pts[i].error_percent));

    FitResult result;
    result.law.variable = curve.variable();
    if (!(pts.back().error_percent < pts.front().error_percent)) {
        result.status = FitStatus::Infeasible;
        result.converged = false;
        result.note = "no decreasing trend: last error is not below the first";
        return result;
    }

    const Problem prob(curve, options);

    // Grid over err_inf, each candidate seeded by log-log OLS.
    Vec3 theta{};
    double best = std::numeric_limits<double>::infinity();
    const std::size_t grid = std::max<std::size_t>(options.grid_size, 2);
    for (std::size_t j = 0; j < grid; ++j) {
        const double c = prob.grid_max() * static_cast<double>(j) / static_cast<double>(grid - 1);
        const Vec3 t = prob.seed_for(c);
        const double s = prob.sse(t);
        if (s < best) {
            best = s;
            theta = t;
        }
    }

    // Levenberg-Marquardt with Marquardt diagonal scaling and projection
    // onto the parameter box.
    double lambda = 1e-3;
    bool converged = false;
    std::size_t iter = 0;
    while (iter < options.max_iterations && !converged) {
        ++iter;
        if (best == 0.0) {
            converged = true;
            break;
        }
        Mat3 a;
        Vec3 g;
        prob.normal_equations(theta, a, g);
        Mat3 damped = a;
        for (int p = 0; p < 3; ++p) damped[p][p] += lambda * a[p][p];
        Vec3 step{};
        Vec3 candidate = theta;
        double s = std::numeric_limits<double>::infinity();
        bool solved = solve3(damped, g, step);
        // Parameters sitting on a bound whose step points outward are held
        // fixed and the remaining ones re-solved; projecting the coupled
        // step alone makes the free parameters crawl.
        std::array<bool, 3> frozen{};
        for (int round = 0; solved && round < 3; ++round) {
            const Vec3 raw{theta[0] + step[0], theta[1] + step[1], theta[2] + step[2]};
            const Vec3 proj = prob.project(raw);
            bool changed = false;
            for (int p = 0; p < 3; ++p) {
                if (!frozen[p] && proj[p] != raw[p] && std::abs(proj[p] - theta[p]) <= 1e-12 * (1.0 + std::abs(theta[p]))) {
                    frozen[p] = true;
                    changed = true;
                }
            }
            if (!changed) break;
            Mat3 reduced = damped;
            Vec3 rhs = g;
            for (int p = 0; p < 3; ++p) {
                if (!frozen[p]) continue;
                for (int q = 0; q < 3; ++q) reduced[p][q] = reduced[q][p] = 0.0;
                reduced[p][p] = 1.0;
                rhs[p] = 0.0;
            }
            solved = solve3(reduced, rhs, step);
        }
        if (solved) {
            candidate = prob.project({theta[0] + step[0], theta[1] + step[1], theta[2] + step[2]});
            s = prob.sse(candidate);
        }
        if (s < best) {
            double change = 0.0;
            for (int p = 0; p < 3; ++p) {
                const double scale = std::abs(theta[p]) + options.tolerance;
                change = std::max(change, std::abs(candidate[p] - theta[p]) / scale);
            }
            theta = candidate;
            best = s;
            lambda = std::max(lambda / 10.0, 1e-15);
            converged = change <= options.tolerance;
        } else {
            lambda *= 10.0;
            // No descent even for a vanishing step: stationary to working precision.
            if (lambda > 1e16) converged = true;
        }
    }

    result.law = prob.to_law(theta, curve.variable());
    result.iterations = iter;
    result.converged = converged;
    result.status = converged ? FitStatus::Converged : FitStatus::NotConverged;
    if (!converged) result.note = "refinement did not reach tolerance within the iteration limit";
    result.sse = 0.0;
    for (const auto& p : pts) {
        const double r = p.error_percent - predict_error(result.law, p.value);
        result.residuals.push_back(r);
        result.sse += r * r;
    }
    return result;
}

ConvergenceComparison compare_convergence(const FitResult& a, const FitResult& b, double epsilon) {
    if (!a.converged || !b.converged)
        throw ComparisonUnavailableError("convergence comparison needs two converged fits");
    if (a.law.variable != b.law.variable)
        throw ComparisonUnavailableError("convergence comparison needs fits over the same variable");
    ConvergenceComparison out;
    out.epsilon = epsilon;
    out.alpha_a = a.law.alpha;
    out.alpha_b = b.law.alpha;
    out.n_star_a = convergence_point(a.law, epsilon);
    out.n_star_b = convergence_point(b.law, epsilon);
    const double tie_tol = 1e-12 * std::max(out.n_star_a, out.n_star_b);
    if (std::abs(out.n_star_a - out.n_star_b) <= tie_tol) out.faster = Faster::Tie;
    else out.faster = out.n_star_a < out.n_star_b ? Faster::A : Faster::B;
    return out;
}

} // namespace fewscale
