#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fewscale/dataset.hpp"
#include "fewscale/power_law.hpp"

namespace fewscale {

struct ClassSplit {
    std::set<ClassId> train_classes;
    std::set<ClassId> holdout_classes;
    std::uint64_t seed = 0;
    double fraction = 0.8;
};

struct LabeledVector {
    std::size_t slot = 0;
    SampleId sample_id = 0;
    std::vector<double> x;
};

/// One N-way K-shot trial. Slot c corresponds to `classes[c]`.
struct Episode {
    std::size_t way = 0;
    std::size_t shot = 0;
    std::uint64_t trial_index = 0;
    std::vector<ClassId> classes;
    std::vector<LabeledVector> support;
    std::vector<LabeledVector> query;

    std::size_t dim() const { return support.empty() ? 0 : support.front().x.size(); }
};

enum class Method { FineTune, Prototypical, Matching };

inline constexpr Method kAllMethods[] = {Method::FineTune, Method::Matching,
                                         Method::Prototypical};

std::string_view to_string(Method m);
/// Column heading used in rendered tables.
std::string_view display_name(Method m);
Method parse_method(std::string_view s);

struct AccuracyEstimate {
    Method method = Method::Prototypical;
    double mean_accuracy = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t correct = 0;
    std::uint64_t total = 0;
};

struct CurvePoint {
    double value = 0.0;
    double error_percent = 0.0;
};

/// Error rate (percent) as a function of dataset size or class count.
/// Points are sorted by value on construction; duplicate or non-positive
/// values and errors outside [0, 100] throw ValidationError.
class ScalingCurve {
public:
    ScalingCurve(ScaleVariable variable, std::vector<CurvePoint> points, std::string label = {});

    ScaleVariable variable() const noexcept { return variable_; }
    const std::vector<CurvePoint>& points() const noexcept { return points_; }
    const std::string& label() const noexcept { return label_; }
    std::size_t size() const noexcept { return points_.size(); }

private:
    ScaleVariable variable_;
    std::vector<CurvePoint> points_;
    std::string label_;
};

} // namespace fewscale
