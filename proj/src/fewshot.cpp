#include "fewscale/fewshot.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fewscale/errors.hpp"
#include "fewscale/random.hpp"

namespace fewscale {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void check_dim(std::size_t got, std::size_t want) {
    if (got != want)
        throw ArgumentError("query has " + std::to_string(got) + " components, expected " +
                            std::to_string(want));
}

// Softmax probabilities of the logits, computed with the max subtracted.
std::vector<double> softmax(std::span<const double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) sum += (p[i] = std::exp(logits[i] - m));
    for (double& v : p) v /= sum;
    return p;
}

} // namespace

void FineTuneConfig::validate() const {
    if (steps < 1) throw ValidationError("fine-tune steps must be at least 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ValidationError("fine-tune learning rate must be a finite non-negative number");
    if (init_scale && !(*init_scale >= 0.0))
        throw ValidationError("fine-tune init_scale must be non-negative");
}

std::size_t argmax_lowest(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

Prototypes compute_prototypes(const Episode& episode) {
    const std::size_t dim = episode.dim();
    Prototypes protos(episode.way, dim);
    std::vector<std::size_t> counts(episode.way, 0);
    for (const auto& s : episode.support) {
        auto row = protos.row(s.slot);
        for (std::size_t d = 0; d < dim; ++d) row[d] += s.x[d];
        ++counts[s.slot];
    }
    for (std::size_t c = 0; c < episode.way; ++c) {
        if (counts[c] == 0) throw ValidationError("episode slot " + std::to_string(c) + " has no support");
        for (double& v : protos.row(c)) v /= static_cast<double>(counts[c]);
    }
    return protos;
}

std::size_t classify_prototypical(std::span<const double> query, const Prototypes& protos) {
    check_dim(query.size(), protos.cols());
    std::size_t best = 0;
    double best_dist = 0.0;
    for (std::size_t c = 0; c < protos.rows(); ++c) {
        const auto row = protos.row(c);
        double dist = 0.0;
        for (std::size_t d = 0; d < query.size(); ++d) {
            const double diff = query[d] - row[d];
            dist += diff * diff;
        }
        if (c == 0 || dist < best_dist) {
            best = c;
            best_dist = dist;
        }
    }
    return best;
}

std::vector<double> matching_class_probabilities(std::span<const double> query,
                                                 const Episode& episode) {
    check_dim(query.size(), episode.dim());
    const double qnorm = std::sqrt(dot(query, query));
    if (qnorm == 0.0) throw DegenerateInputError("query vector has zero norm");

    std::vector<double> cosines;
    cosines.reserve(episode.support.size());
    for (const auto& s : episode.support) {
        const double snorm = std::sqrt(dot(s.x, s.x));
        if (snorm == 0.0)
            throw DegenerateInputError("support sample " + std::to_string(s.sample_id) +
                                       " has zero norm");
        cosines.push_back(dot(query, s.x) / (qnorm * snorm));
    }
    const auto p = softmax(cosines);
    std::vector<double> per_class(episode.way, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) per_class[episode.support[i].slot] += p[i];
    return per_class;
}

std::size_t classify_matching(std::span<const double> query, const Episode& episode) {
    return argmax_lowest(matching_class_probabilities(query, episode));
}

LinearHead init_linear_head(std::size_t way, std::size_t dim, const FineTuneConfig& config,
                            std::uint64_t trial_seed) {
    const double bound = config.init_scale.value_or(1.0 / std::sqrt(static_cast<double>(dim)));
    Rng rng(trial_seed);
    LinearHead head{Matrix(way, dim), std::vector<double>(way)};
    for (double& w : head.weights.data()) w = rng.uniform(-bound, bound);
    for (double& b : head.bias) b = rng.uniform(-bound, bound);
    return head;
}

std::vector<double> head_logits(const LinearHead& head, std::span<const double> query) {
    check_dim(query.size(), head.dim());
    std::vector<double> logits(head.way());
    for (std::size_t c = 0; c < head.way(); ++c) logits[c] = dot(head.weights.row(c), query) + head.bias[c];
    return logits;
}

std::size_t classify_head(const LinearHead& head, std::span<const double> query) {
    return argmax_lowest(head_logits(head, query));
}

double support_loss(const LinearHead& head, const Episode& episode) {
    double total = 0.0;
    for (const auto& s : episode.support) {
        const auto logits = head_logits(head, s.x);
        const double m = *std::max_element(logits.begin(), logits.end());
        double sum = 0.0;
        for (double z : logits) sum += std::exp(z - m);
        total += m + std::log(sum) - logits[s.slot];
    }
    return total / static_cast<double>(episode.support.size());
}

LinearHead support_loss_gradient(const LinearHead& head, const Episode& episode) {
    LinearHead grad{Matrix(head.way(), head.dim()), std::vector<double>(head.way(), 0.0)};
    const double inv_n = 1.0 / static_cast<double>(episode.support.size());
    for (const auto& s : episode.support) {
        auto p = softmax(head_logits(head, s.x));
        p[s.slot] -= 1.0;
        for (std::size_t c = 0; c < head.way(); ++c) {
            const double g = p[c] * inv_n;
            auto row = grad.weights.row(c);
            for (std::size_t d = 0; d < head.dim(); ++d) row[d] += g * s.x[d];
            grad.bias[c] += g;
        }
    }
    return grad;
}

LinearHead finetune_linear_head(const Episode& episode, const FineTuneConfig& config,
                                std::uint64_t trial_seed) {
    LinearHead head = init_linear_head(episode.way, episode.dim(), config, trial_seed);
    if (config.learning_rate == 0.0) return head;
    for (std::size_t step = 0; step < config.steps; ++step) {
        const LinearHead grad = support_loss_gradient(head, episode);
        auto w = head.weights.data();
        const auto gw = grad.weights.data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= config.learning_rate * gw[i];
        for (std::size_t c = 0; c < head.way(); ++c) head.bias[c] -= config.learning_rate * grad.bias[c];
    }
    return head;
}

Episode l2_normalized(Episode episode) {
    auto normalize = [](std::vector<double>& x) {
        const double n = std::sqrt(dot(x, x));
        if (n == 0.0) throw DegenerateInputError("cannot L2-normalize a zero vector");
        for (double& v : x) v /= n;
    };
    for (auto& s : episode.support) normalize(s.x);
    for (auto& q : episode.query) normalize(q.x);
    return episode;
}

} // namespace fewscale
