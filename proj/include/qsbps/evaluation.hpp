#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "qsbps/error.hpp"
#include "qsbps/parallel.hpp"
#include "qsbps/rng.hpp"
#include "qsbps/selector.hpp"
#include "qsbps/session.hpp"
#include "qsbps/simulator.hpp"
#include "qsbps/split.hpp"
#include "qsbps/workspace.hpp"

namespace qsbps {

struct SessionMetrics {
    double rr = 0.0;
    double hit5 = 0.0;
    double ndcg = 0.0;
};

/// Metrics for a single relevant product at 1-based `rank` among n products.
inline SessionMetrics session_metrics(std::size_t rank, std::size_t n) {
    if (rank < 1 || rank > n) {
        throw usage_error("rank " + std::to_string(rank) + " outside [1, " + std::to_string(n) + "]");
    }
    const auto r = static_cast<double>(rank);
    return {1.0 / r, rank <= 5 ? 1.0 : 0.0, 1.0 / std::log2(1.0 + r)};
}

/// Per-session values with their mean and the standard error of that mean.
class MeanStat {
  public:
    void add(double x) {
        m_values.push_back(x);
    }
    [[nodiscard]] std::size_t count() const noexcept { return m_values.size(); }
    [[nodiscard]] double mean() const {
        if (m_values.empty()) {
            return 0.0;
        }
        double s = 0.0;
        for (double v : m_values) {
            s += v;
        }
        return s / static_cast<double>(m_values.size());
    }
    [[nodiscard]] double stderr_mean() const {
        const auto n = m_values.size();
        if (n < 2) {
            return 0.0;
        }
        const double mu = mean();
        double ss = 0.0;
        for (double v : m_values) {
            ss += (v - mu) * (v - mu);
        }
        return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return m_values; }

  private:
    std::vector<double> m_values;
};

struct MetricsReport {
    std::size_t n_q = 0;
    double gamma = 0.0;
    double beta = 0.0;
    std::string error_model = "none";
    std::string mode = "duet";
    std::string field_mode = "metadata+reviews";
    std::string policy = "qsbps";

    double mrr = 0.0;
    double mrr_se = 0.0;
    double recall_at_5 = 0.0;
    double recall_at_5_se = 0.0;
    double ndcg = 0.0;
    double ndcg_se = 0.0;
    std::size_t n_sessions = 0;

    std::vector<double> reciprocal_ranks;  // per session, in session order
};

/// Builds a report from 1-based ranks and the matching topic sizes.
inline MetricsReport report_from_ranks(const std::vector<std::size_t>& ranks, const std::vector<std::size_t>& sizes) {
    if (ranks.empty()) {
        throw usage_error("no sessions to aggregate");
    }
    MeanStat rr, hit, ndcg;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        auto m = session_metrics(ranks[i], sizes[i]);
        rr.add(m.rr);
        hit.add(m.hit5);
        ndcg.add(m.ndcg);
    }
    MetricsReport r;
    r.mrr = rr.mean();
    r.mrr_se = rr.stderr_mean();
    r.recall_at_5 = hit.mean();
    r.recall_at_5_se = hit.stderr_mean();
    r.ndcg = ndcg.mean();
    r.ndcg_se = ndcg.stderr_mean();
    r.n_sessions = ranks.size();
    r.reciprocal_ranks = rr.values();
    return r;
}

struct EvalConfig {
    std::vector<std::size_t> n_q{5, 10, 15, 20};
    SelectionParams params;
    ErrorModel error_model;
    std::size_t trials = 1;
    std::uint64_t seed = 42;
    SplitPart part = SplitPart::Test;
    QuestionPolicy policy = QuestionPolicy::Qsbps;
    std::size_t jobs = 1;
};

namespace detail {

struct SessionJob {
    std::size_t topic;
    std::size_t target;
    std::uint64_t stream;
};

inline std::vector<SessionJob> enumerate_sessions(const Workspace& ws, const EvalConfig& config) {
    std::vector<SessionJob> jobs;
    for (std::size_t t = 0; t < ws.size(); ++t) {
        const auto& events = ws.splits[t].part(config.part);
        const auto topic_key = hash_string(ws.indexes[t].topic_id);
        for (std::size_t j = 0; j < events.size(); ++j) {
            for (std::size_t trial = 0; trial < config.trials; ++trial) {
                jobs.push_back({t, events[j], derive_seed(config.seed, {topic_key, j, trial})});
            }
        }
    }
    return jobs;
}

}  // namespace detail

/// Simulates one session per (topic, held-out purchase, trial) and reports
/// metrics for each question budget in config.n_q. Each session runs to the
/// largest budget; smaller budgets read the rank after that many answers,
/// which equals a run stopped at that budget.
inline std::vector<MetricsReport> evaluate(const Workspace& ws, const EvalConfig& config) {
    if (ws.models.size() != ws.indexes.size()) {
        throw input_error("workspace has no trained model for every topic");
    }
    if (config.n_q.empty()) {
        throw usage_error("empty N_q list");
    }
    if (config.trials == 0) {
        throw usage_error("trials must be at least 1");
    }
    config.params.validate();
    const auto jobs = detail::enumerate_sessions(ws, config);
    if (jobs.empty()) {
        throw input_error("no sessions: the selected split part is empty");
    }
    const auto max_q = *std::max_element(config.n_q.begin(), config.n_q.end());
    const Oracle oracle = config.error_model.noisy() ? Oracle::noisy(config.error_model, config.seed)
                                                     : Oracle::perfect();
    SessionOptions options{config.params, config.error_model, max_q, config.policy, config.seed};

    std::vector<std::vector<std::size_t>> ranks(jobs.size());
    parallel_for(jobs.size(), config.jobs, [&](std::size_t i) {
        const auto& job = jobs[i];
        auto trace = run_session(ws.models[job.topic], ws.indexes[job.topic], job.target, options, oracle, job.stream);
        auto& out = ranks[i];
        for (auto q : config.n_q) {
            out.push_back(trace.rank_after(q));
        }
    });

    std::vector<std::size_t> sizes;
    sizes.reserve(jobs.size());
    for (const auto& job : jobs) {
        sizes.push_back(ws.indexes[job.topic].size());
    }
    std::vector<MetricsReport> reports;
    for (std::size_t k = 0; k < config.n_q.size(); ++k) {
        std::vector<std::size_t> column;
        column.reserve(jobs.size());
        for (const auto& r : ranks) {
            column.push_back(r[k]);
        }
        auto rep = report_from_ranks(column, sizes);
        rep.n_q = config.n_q[k];
        rep.gamma = config.params.gamma;
        rep.beta = config.params.beta;
        rep.error_model = to_string(config.error_model);
        rep.mode = ws.models.empty() ? "none" : std::string(to_string(ws.models.front().mode));
        rep.field_mode = ws.indexes.empty() ? "" : std::string(to_string(ws.indexes.front().field_mode));
        rep.policy = config.policy == QuestionPolicy::Qsbps ? "qsbps" : "random";
        reports.push_back(std::move(rep));
    }
    return reports;
}

/// Same pipeline with the question chosen uniformly at random from the
/// unasked pool.
inline std::vector<MetricsReport> random_baseline(const Workspace& ws, EvalConfig config) {
    config.policy = QuestionPolicy::Random;
    return evaluate(ws, config);
}

struct SweepAxes {
    std::vector<std::size_t> n_q{5, 10, 15, 20, 25, 30};
    std::vector<double> gamma{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<double> beta{0.0};
};

struct SweepResult {
    std::vector<MetricsReport> cells;  // gamma-major, then beta, then n_q
    struct Best {
        std::size_t n_q;
        double gamma;
        double beta;
        double mrr;
    };
    std::vector<Best> best;  // one row per n_q
};

/// Evaluates the (gamma, beta, n_q) grid on the validation split and picks
/// the best setting per n_q; ties go to the smaller gamma, then smaller beta.
inline SweepResult sweep(const Workspace& ws, const SweepAxes& axes, EvalConfig base) {
    if (axes.n_q.empty() || axes.gamma.empty() || axes.beta.empty()) {
        throw usage_error("sweep axes must be non-empty");
    }
    base.part = SplitPart::Validation;
    base.n_q = axes.n_q;
    SweepResult out;
    for (double g : axes.gamma) {
        for (double b : axes.beta) {
            base.params = {g, b};
            auto reports = evaluate(ws, base);
            out.cells.insert(out.cells.end(), reports.begin(), reports.end());
        }
    }
    for (auto q : axes.n_q) {
        const MetricsReport* best = nullptr;
        for (const auto& c : out.cells) {
            if (c.n_q != q) {
                continue;
            }
            if (best == nullptr || c.mrr > best->mrr ||
                (c.mrr == best->mrr && (c.gamma < best->gamma || (c.gamma == best->gamma && c.beta < best->beta)))) {
                best = &c;
            }
        }
        out.best.push_back({q, best->gamma, best->beta, best->mrr});
    }
    return out;
}

inline void write_metrics_csv(std::ostream& out, const std::vector<MetricsReport>& reports) {
    out << "n_q,gamma,beta,error_model,mode,field_mode,policy,mrr,mrr_se,recall_at_5,recall_at_5_se,ndcg,ndcg_se,"
           "n_sessions\n";
    out << std::fixed << std::setprecision(6);
    for (const auto& r : reports) {
        out << r.n_q << ',' << r.gamma << ',' << r.beta << ',' << r.error_model << ',' << r.mode << ','
            << r.field_mode << ',' << r.policy << ',' << r.mrr << ',' << r.mrr_se << ',' << r.recall_at_5 << ','
            << r.recall_at_5_se << ',' << r.ndcg << ',' << r.ndcg_se << ',' << r.n_sessions << '\n';
    }
}

inline void write_best_csv(std::ostream& out, const SweepResult& s) {
    out << "n_q,gamma,beta,mrr\n" << std::fixed << std::setprecision(6);
    for (const auto& b : s.best) {
        out << b.n_q << ',' << b.gamma << ',' << b.beta << ',' << b.mrr << '\n';
    }
}

/// Heatmap data: one (n_q, gamma, beta, mrr) row per cell.
inline void write_heatmap(std::ostream& out, const SweepResult& s) {
    out << "n_q,gamma,beta,mrr\n" << std::fixed << std::setprecision(6);
    for (const auto& c : s.cells) {
        out << c.n_q << ',' << c.gamma << ',' << c.beta << ',' << c.mrr << '\n';
    }
}

}  // namespace qsbps
