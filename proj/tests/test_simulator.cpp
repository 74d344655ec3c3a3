#include <gtest/gtest.h>

#include "qsbps/qsbps.hpp"
#include "test_util.hpp"

using namespace qsbps;
using qsbps::fixtures::index_from_rows;
using qsbps::fixtures::model_for;

TEST(Oracle, PerfectAndZeroNoise) {
    auto idx = index_from_rows({"1100", "0110", "1111"});
    auto zero = Oracle::noisy(ErrorModel::fixed(0.0), 9);
    for (std::size_t e = 0; e < 3; ++e) {
        for (std::size_t d = 0; d < 4; ++d) {
            for (std::size_t q = 0; q < 5; ++q) {
                EXPECT_EQ(oracle_answer(Oracle::perfect(), idx, e, d, q, q), idx.incidence[e].test(d));
                EXPECT_EQ(oracle_answer(zero, idx, e, d, q * 7, q), idx.incidence[e].test(d));
            }
        }
    }
}

TEST(Oracle, HalfNoiseFlipRate) {
    auto idx = index_from_rows({"10"});
    auto oracle = Oracle::noisy(ErrorModel::fixed(0.5), 2024);
    int flips = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        flips += !oracle_answer(oracle, idx, 0, 0, static_cast<std::uint64_t>(i), 0);
    }
    EXPECT_NEAR(static_cast<double>(flips) / trials, 0.5, 0.02);
}

TEST(Oracle, TfFlipRate) {
    auto idx = index_from_rows({"10"});
    idx.tf_avg = {1.5};  // h = 0.2
    auto oracle = Oracle::noisy(ErrorModel::tf_based(), 5);
    int flips = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        flips += oracle_answer(oracle, idx, 0, 1, 3, static_cast<std::size_t>(i));
    }
    EXPECT_NEAR(static_cast<double>(flips) / trials, 0.2, 0.02);
}

TEST(RunSession, BisectionRanksTargetFirst) {
    for (std::size_t k = 1; k <= 5; ++k) {
        auto idx = fixtures::binary_index(k, 3);
        auto model = model_for(idx);
        SessionOptions opts;
        opts.n_q_limit = k;
        for (std::size_t target = 0; target < idx.size(); ++target) {
            auto trace = run_session(model, idx, target, opts, Oracle::perfect());
            EXPECT_EQ(trace.records.size(), k);
            EXPECT_EQ(trace.final_rank, 1u);
            EXPECT_EQ(trace.initial_rank, idx.size());
            EXPECT_EQ(trace.rank_after(0), idx.size());
            EXPECT_EQ(trace.rank_after(k + 10), 1u);
        }
    }
}

TEST(RunSession, DeterministicTraces) {
    auto idx = fixtures::binary_index(4, 10);
    auto model = train_topic(idx, {0, 0, 3, 7, 15}, TrainingMode::Duet, 1);
    SessionOptions opts;
    opts.params = {0.4, 0.5};
    opts.error_model = ErrorModel::fixed(0.3);
    opts.n_q_limit = 8;
    auto oracle = Oracle::noisy(opts.error_model, 77);
    auto a = run_session(model, idx, 5, opts, oracle, 3, true);
    auto b = run_session(model, idx, 5, opts, oracle, 3, true);
    EXPECT_EQ(to_json(a, idx).dump(), to_json(b, idx).dump());
    EXPECT_EQ(a.records.size(), 8u);
    auto j = to_json(a, idx);
    EXPECT_EQ(j["target"], "t1_p05");
    EXPECT_EQ(j["questions"].size(), 8u);
    EXPECT_TRUE(j["questions"][0].contains("truthful_answer"));
    EXPECT_THROW(run_session(model, idx, 16, opts, oracle), usage_error);
}

TEST(RunSession, RandomPolicyDiffersPerStream) {
    auto idx = fixtures::binary_index(4, 20);
    auto model = model_for(idx);
    SessionOptions opts;
    opts.policy = QuestionPolicy::Random;
    opts.error_model = ErrorModel::fixed(0.0);
    opts.n_q_limit = 6;
    opts.random_seed = 10;
    auto a = run_session(model, idx, 1, opts, Oracle::perfect(), 1);
    auto b = run_session(model, idx, 1, opts, Oracle::perfect(), 2);
    auto a2 = run_session(model, idx, 1, opts, Oracle::perfect(), 1);
    std::vector<std::size_t> ea, eb, ea2;
    for (auto& r : a.records) ea.push_back(r.entity);
    for (auto& r : b.records) eb.push_back(r.entity);
    for (auto& r : a2.records) ea2.push_back(r.entity);
    EXPECT_EQ(ea, ea2);
    EXPECT_NE(ea, eb);
}
