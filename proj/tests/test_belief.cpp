#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "qsbps/belief.hpp"

using namespace qsbps;

namespace {

std::vector<double> pi_of(const DirichletBelief& b) { return preference(b).pi; }

/// Posterior mean computed from scratch with integer counts.
std::vector<double> oracle_mean(const std::vector<long>& alpha0, const std::vector<std::string>& zs) {
    std::vector<long> counts = alpha0;
    for (const auto& z : zs) {
        for (std::size_t d = 0; d < counts.size(); ++d) {
            counts[d] += z[d] == '1';
        }
    }
    const long total = std::accumulate(counts.begin(), counts.end(), 0L);
    std::vector<double> out;
    for (auto c : counts) {
        out.push_back(static_cast<double>(c) / static_cast<double>(total));
    }
    return out;
}

}  // namespace

TEST(Belief, UniformPrior) {
    EXPECT_EQ(uniform_prior(4), DirichletBelief({1, 1, 1, 1}));
    EXPECT_EQ(pi_of(uniform_prior(4)), (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
    EXPECT_EQ(pi_of(uniform_prior(1)), (std::vector<double>{1.0}));
    EXPECT_THROW(uniform_prior(0), usage_error);
}

TEST(Belief, PreferenceExamples) {
    auto p = pi_of(DirichletBelief({2, 2, 1, 1}));
    EXPECT_DOUBLE_EQ(p[0], 1.0 / 3);
    EXPECT_DOUBLE_EQ(p[2], 1.0 / 6);
    EXPECT_EQ(pi_of(DirichletBelief({3, 1})), (std::vector<double>{0.75, 0.25}));
}

TEST(Belief, RejectsNonPositiveCounts) {
    EXPECT_THROW(DirichletBelief({1, 0}), usage_error);
    EXPECT_THROW(DirichletBelief({1, -2}), usage_error);
    EXPECT_THROW(DirichletBelief({1, NAN}), usage_error);
    EXPECT_THROW(DirichletBelief(std::vector<double>{}), usage_error);
}

TEST(Belief, ObserveAnswerExamples) {
    const auto u = uniform_prior(4);
    const auto inc = Bitmap::from_string("1100");
    EXPECT_EQ(observe_answer(u, answer_indicator(inc, true)), DirichletBelief({2, 2, 1, 1}));
    EXPECT_EQ(observe_answer(u, answer_indicator(inc, false)), DirichletBelief({1, 1, 2, 2}));
    auto two = observe_answer(observe_answer(u, Bitmap::from_string("1100")), Bitmap::from_string("1010"));
    EXPECT_EQ(two, DirichletBelief({3, 2, 2, 1}));
    EXPECT_EQ(u, uniform_prior(4));  // input untouched
    EXPECT_THROW(observe_answer(u, Bitmap::from_string("110")), usage_error);
}

TEST(Belief, ObservePurchase) {
    EXPECT_EQ(observe_purchase(uniform_prior(2), 0), DirichletBelief({2, 1}));
    auto b = uniform_prior(2);
    for (int i = 0; i < 5; ++i) {
        b = observe_purchase(b, 0);
    }
    auto p = pi_of(b);
    EXPECT_DOUBLE_EQ(p[0], 6.0 / 7);
    EXPECT_DOUBLE_EQ(p[1], 1.0 / 7);
    EXPECT_THROW(observe_purchase(b, 2), usage_error);
}

TEST(Belief, RankWorstIndex) {
    EXPECT_EQ(rank_of(preference(uniform_prior(8)), 3), 8u);
    EXPECT_EQ(rank_of(Preference{{0.5, 0.3, 0.2}}, 1), 2u);
    EXPECT_EQ(rank_of(Preference{{0.4, 0.4, 0.2}}, 0), 2u);
    EXPECT_EQ(rank_of(Preference{{0.4, 0.4, 0.2}}, 2), 3u);
}

TEST(BeliefProperty, IncrementalMatchesFromScratchOracle) {
    std::mt19937_64 rng(2024);
    for (int instance = 0; instance < 500; ++instance) {
        const std::size_t n = 1 + rng() % 8;
        std::vector<long> a0(n);
        for (auto& a : a0) {
            a = 1 + static_cast<long>(rng() % 4);
        }
        DirichletBelief b(std::vector<double>(a0.begin(), a0.end()));
        std::vector<std::string> zs;
        const std::size_t answers = rng() % 6;
        for (std::size_t k = 0; k < answers; ++k) {
            std::string z(n, '0');
            for (auto& c : z) {
                c = (rng() & 1U) ? '1' : '0';
            }
            zs.push_back(z);
            b = observe_answer(b, Bitmap::from_string(z));
        }
        auto got = pi_of(b);
        auto want = oracle_mean(a0, zs);
        for (std::size_t d = 0; d < n; ++d) {
            EXPECT_LE(std::abs(got[d] - want[d]), 1e-12);
        }
    }
}

TEST(BeliefProperty, OrderIndependentAndTotalGrowsByPopcount) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + rng() % 20;
        std::vector<Bitmap> zs;
        for (int k = 0; k < 5; ++k) {
            Bitmap z(n);
            for (std::size_t d = 0; d < n; ++d) {
                z.set(d, rng() & 1U);
            }
            zs.push_back(z);
        }
        auto fwd = uniform_prior(n);
        auto rev = uniform_prior(n);
        for (std::size_t k = 0; k < zs.size(); ++k) {
            const double before = fwd.total();
            fwd = observe_answer(fwd, zs[k]);
            EXPECT_DOUBLE_EQ(fwd.total(), before + static_cast<double>(zs[k].count()));
            rev = observe_answer(rev, zs[zs.size() - 1 - k]);
        }
        EXPECT_EQ(fwd, rev);
    }
}

TEST(BeliefProperty, RankInvariantUnderRescaling) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng() % 10;
        std::vector<double> a(n), scaled(n);
        for (std::size_t d = 0; d < n; ++d) {
            a[d] = 1 + static_cast<double>(rng() % 3);
            scaled[d] = a[d] * 2.5;
        }
        for (std::size_t d = 0; d < n; ++d) {
            EXPECT_EQ(rank_of(preference(DirichletBelief(a)), d), rank_of(preference(DirichletBelief(scaled)), d));
            EXPECT_EQ(rank_of(std::span<const double>(a), d), rank_of(preference(DirichletBelief(a)), d));
        }
    }
}
