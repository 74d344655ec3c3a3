#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>

#include "qsbps/belief.hpp"
#include "qsbps/bitmap.hpp"
#include "qsbps/error.hpp"
#include "qsbps/topic_index.hpp"

namespace qsbps {

/// How likely a user is to answer a question about an entity wrongly.
struct ErrorModel {
    enum class Kind { NoNoise, Fixed, TfBased };

    Kind kind = Kind::NoNoise;
    double epsilon = 0.0;

    static ErrorModel none() { return {}; }
    static ErrorModel fixed(double eps) {
        if (!(eps >= 0.0 && eps <= 0.5)) {
            throw usage_error("fixed error rate must lie in [0, 0.5]");
        }
        return {Kind::Fixed, eps};
    }
    static ErrorModel tf_based() { return {Kind::TfBased, 0.0}; }

    /// Noise-tolerant sessions keep the full candidate set.
    [[nodiscard]] bool noisy() const noexcept { return kind != Kind::NoNoise; }

    friend bool operator==(const ErrorModel&, const ErrorModel&) = default;
};

/// "none", "fixed:<eps>" or "tf".
inline ErrorModel parse_error_model(std::string_view s) {
    if (s == "none" || s == "no-noise") {
        return ErrorModel::none();
    }
    if (s == "tf") {
        return ErrorModel::tf_based();
    }
    if (s.starts_with("fixed:")) {
        std::string value(s.substr(6));
        std::size_t used = 0;
        double eps = 0;
        try {
            eps = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != value.size()) {
            throw usage_error("invalid fixed error rate '" + value + "'");
        }
        return ErrorModel::fixed(eps);
    }
    throw usage_error("unknown error model '" + std::string(s) + "' (expected none | fixed:<eps> | tf)");
}

inline std::string to_string(const ErrorModel& m) {
    switch (m.kind) {
        case ErrorModel::Kind::NoNoise: return "none";
        case ErrorModel::Kind::TfBased: return "tf";
        case ErrorModel::Kind::Fixed: {
            std::ostringstream os;
            os << "fixed:" << m.epsilon;
            return os.str();
        }
    }
    return "none";
}

struct SelectionParams {
    double gamma = 0.0;  // weight of the trained question reward
    double beta = 0.0;   // weight of the answer error rate

    void validate() const {
        if (!(std::isfinite(gamma) && gamma >= 0) || !(std::isfinite(beta) && beta >= 0)) {
            throw usage_error("gamma and beta must be finite and non-negative");
        }
    }
};

/// |sum over candidates of (+w if e(d) else -w)|: how unevenly the entity
/// splits the candidates' weight.
inline double split_score(const Bitmap& incidence, const Bitmap& candidates, std::span<const double> weights) {
    auto s = masked_sums(candidates, incidence, weights);
    return std::abs(s.in - s.out);
}

inline double error_rate(const TopicIndex& index, std::size_t entity, const ErrorModel& model) {
    switch (model.kind) {
        case ErrorModel::Kind::NoNoise: return 0.0;
        case ErrorModel::Kind::Fixed: return model.epsilon;
        case ErrorModel::Kind::TfBased: return 1.0 / (2.0 * (1.0 + index.tf_avg.at(entity)));
    }
    return 0.0;
}

/// Objective minimized by the selector for one entity:
///   split(e) + 2 * beta * h(e) - gamma * R(e)
/// with the split measured in preference mass, pi = alpha / sum(alpha).
inline double selection_objective(const TopicIndex& index, std::size_t entity, const Bitmap& candidates,
                                  const DirichletBelief& belief, double alpha_total, std::span<const double> rewards,
                                  const SelectionParams& params, const ErrorModel& error_model) {
    // Summing pseudo-counts keeps equal-mass splits exactly zero.
    double split = split_score(index.incidence[entity], candidates, belief.alpha()) / alpha_total;
    double value = split - params.gamma * rewards[entity];
    if (error_model.noisy()) {
        value += 2.0 * params.beta * error_rate(index, entity, error_model);
    }
    return value;
}

/// Picks the unasked entity with the smallest objective; ties go to the
/// smallest entity id. `unasked` is a bitmap over pool positions.
inline std::size_t select_entity(const TopicIndex& index, const Bitmap& unasked, const Bitmap& candidates,
                                 const DirichletBelief& belief, std::span<const double> rewards,
                                 const SelectionParams& params, const ErrorModel& error_model) {
    if (unasked.none()) {
        throw state_error("entity pool is empty");
    }
    std::size_t best = index.pool_size();
    double best_value = std::numeric_limits<double>::infinity();
    const double total = belief.total();
    unasked.for_each([&](std::size_t e) {
        double v = selection_objective(index, e, candidates, belief, total, rewards, params, error_model);
        if (best == index.pool_size() || v < best_value) {
            best = e;
            best_value = v;
        }
    });
    return best;
}

}  // namespace qsbps
