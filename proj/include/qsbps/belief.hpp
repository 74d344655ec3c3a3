#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qsbps/bitmap.hpp"
#include "qsbps/error.hpp"

namespace qsbps {

/// Dirichlet belief over a topic's products, held as pseudo-counts.
///
/// All updates are pure: they return a new belief and leave the argument
/// untouched.
class DirichletBelief {
  public:
    DirichletBelief() = default;
    explicit DirichletBelief(std::vector<double> alpha) : m_alpha(std::move(alpha)) {
        if (m_alpha.empty()) {
            throw usage_error("belief needs at least one product");
        }
        for (double a : m_alpha) {
            if (!(a > 0) || !std::isfinite(a)) {
                throw usage_error("belief pseudo-counts must be positive and finite");
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return m_alpha.size(); }
    [[nodiscard]] std::span<const double> alpha() const noexcept { return m_alpha; }
    [[nodiscard]] double operator[](std::size_t d) const { return m_alpha[d]; }

    [[nodiscard]] double total() const noexcept {
        double s = 0.0;
        for (double a : m_alpha) {
            s += a;
        }
        return s;
    }

    friend bool operator==(const DirichletBelief&, const DirichletBelief&) = default;

  private:
    friend DirichletBelief observe_answer(const DirichletBelief&, const Bitmap&);
    friend DirichletBelief observe_purchase(const DirichletBelief&, std::size_t);

    std::vector<double> m_alpha;
};

/// Posterior mean of the belief: a distribution over products.
struct Preference {
    std::vector<double> pi;

    [[nodiscard]] std::size_t size() const noexcept { return pi.size(); }
    [[nodiscard]] double operator[](std::size_t d) const { return pi[d]; }
};

inline DirichletBelief uniform_prior(std::size_t n) {
    if (n == 0) {
        throw usage_error("uniform_prior needs n >= 1");
    }
    return DirichletBelief(std::vector<double>(n, 1.0));
}

inline Preference preference(const DirichletBelief& belief) {
    const double total = belief.total();
    Preference p;
    p.pi.reserve(belief.size());
    for (double a : belief.alpha()) {
        p.pi.push_back(a / total);
    }
    return p;
}

/// Answer indicator Z: the products whose incidence agrees with the answer.
inline Bitmap answer_indicator(const Bitmap& incidence, bool answer_yes) {
    return answer_yes ? incidence : ~incidence;
}

/// Posterior after one answer: alpha(d) += Z(d).
inline DirichletBelief observe_answer(const DirichletBelief& belief, const Bitmap& consistent) {
    if (consistent.size() != belief.size()) {
        throw usage_error("answer indicator length " + std::to_string(consistent.size()) +
                          " does not match belief size " + std::to_string(belief.size()));
    }
    DirichletBelief next = belief;
    consistent.for_each([&](std::size_t d) { next.m_alpha[d] += 1.0; });
    return next;
}

/// Posterior after observing a purchase of product d.
inline DirichletBelief observe_purchase(const DirichletBelief& belief, std::size_t product) {
    if (product >= belief.size()) {
        throw usage_error("unknown product index " + std::to_string(product));
    }
    DirichletBelief next = belief;
    next.m_alpha[product] += 1.0;
    return next;
}

enum class TieRule { WorstIndex };

/// 1-based rank of `product`; tied products all take the last position among
/// their ties.
inline std::size_t rank_of(std::span<const double> scores, std::size_t product, TieRule = TieRule::WorstIndex) {
    const double own = scores[product];
    std::size_t rank = 0;
    for (double s : scores) {
        if (s >= own) {
            ++rank;
        }
    }
    return rank;
}

inline std::size_t rank_of(const Preference& pref, std::size_t product, TieRule ties = TieRule::WorstIndex) {
    return rank_of(std::span<const double>(pref.pi), product, ties);
}

}  // namespace qsbps
