#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fewscale/types.hpp"

namespace fewscale {

/// Row-major dense matrix, just enough for way x dim heads and prototypes.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Row c is the mean of the support vectors in slot c.
using Prototypes = Matrix;

struct LinearHead {
    Matrix weights; // way x dim
    std::vector<double> bias;

    std::size_t way() const noexcept { return weights.rows(); }
    std::size_t dim() const noexcept { return weights.cols(); }
    bool operator==(const LinearHead&) const = default;
};

struct FineTuneConfig {
    std::size_t steps = 5;
    double learning_rate = 0.01;
    /// Half-width of the uniform initialization; 1/sqrt(dim) when unset.
    std::optional<double> init_scale;

    void validate() const;
};

// Prototypical network (squared euclidean distance to class means).
Prototypes compute_prototypes(const Episode& episode);
std::size_t classify_prototypical(std::span<const double> query, const Prototypes& protos);

// Matching network: cosine similarity against every support vector,
// softmax over the whole support set, probabilities summed per class.
// Throws DegenerateInputError if the query or a support vector has zero norm.
std::vector<double> matching_class_probabilities(std::span<const double> query,
                                                 const Episode& episode);
std::size_t classify_matching(std::span<const double> query, const Episode& episode);

// Linear head fine-tuned by full-batch gradient descent on mean softmax
// cross-entropy over the support set.
LinearHead init_linear_head(std::size_t way, std::size_t dim, const FineTuneConfig& config,
                            std::uint64_t trial_seed);
double support_loss(const LinearHead& head, const Episode& episode);
/// Analytic gradient of support_loss. Same shape as the head.
LinearHead support_loss_gradient(const LinearHead& head, const Episode& episode);
LinearHead finetune_linear_head(const Episode& episode, const FineTuneConfig& config,
                                std::uint64_t trial_seed);
std::vector<double> head_logits(const LinearHead& head, std::span<const double> query);
std::size_t classify_head(const LinearHead& head, std::span<const double> query);

/// Copy of the episode with every vector scaled to unit L2 norm (double
/// precision). Throws DegenerateInputError on a zero vector.
Episode l2_normalized(Episode episode);

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax_lowest(std::span<const double> values);

} // namespace fewscale
