#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsbps/rng.hpp"
#include "qsbps/selector.hpp"
#include "qsbps/session.hpp"
#include "qsbps/topic_index.hpp"
#include "qsbps/trainer.hpp"

namespace qsbps {

/// Simulated user. A noisy oracle flips the truthful answer with probability
/// h(e); each (session, question index) pair draws from its own stream.
struct Oracle {
    enum class Kind { Perfect, Noisy };

    Kind kind = Kind::Perfect;
    ErrorModel error_model;
    std::uint64_t seed = 0;

    static Oracle perfect() { return {}; }
    static Oracle noisy(ErrorModel model, std::uint64_t seed) { return {Kind::Noisy, model, seed}; }
};

inline bool truthful_answer(const TopicIndex& index, std::size_t entity, std::size_t target) {
    return index.incidence.at(entity).test(target);
}

/// `stream` identifies the session; `question` the position in it.
inline bool oracle_answer(const Oracle& oracle, const TopicIndex& index, std::size_t entity, std::size_t target,
                          std::uint64_t stream, std::size_t question) {
    const bool truth = truthful_answer(index, entity, target);
    if (oracle.kind == Oracle::Kind::Perfect) {
        return truth;
    }
    const double h = error_rate(index, entity, oracle.error_model);
    const double u = unit_double(derive_seed(oracle.seed, {stream, question}));
    return u < h ? !truth : truth;
}

struct QuestionRecord {
    std::size_t entity = 0;
    bool truthful = false;
    bool emitted = false;
    std::size_t target_rank_after = 0;
};

struct SimulationTrace {
    std::string topic_id;
    std::size_t target = 0;
    std::size_t initial_rank = 0;
    std::vector<QuestionRecord> records;
    std::size_t final_rank = 0;
    /// Session transcript, kept only when requested.
    nlohmann::json transcript;

    /// Target rank once min(n_q, asked) questions have been answered.
    [[nodiscard]] std::size_t rank_after(std::size_t n_q) const {
        if (n_q == 0 || records.empty()) {
            return initial_rank;
        }
        return records[std::min(n_q, records.size()) - 1].target_rank_after;
    }
};

/// Drives one session to completion against a simulated user.
inline SimulationTrace run_session(const TrainedModel& model, const TopicIndex& index, std::size_t target,
                                   const SessionOptions& options, const Oracle& oracle, std::uint64_t stream = 0,
                                   bool keep_transcript = false) {
    if (target >= index.size()) {
        throw usage_error("target product outside topic '" + index.topic_id + "'");
    }
    SessionOptions opts = options;
    if (opts.policy == QuestionPolicy::Random) {
        opts.random_seed = derive_seed(options.random_seed, {stream});
    }
    Session session(model, index, opts);
    SimulationTrace trace;
    trace.topic_id = index.topic_id;
    trace.target = target;
    trace.initial_rank = session.rank_of(target);
    while (auto q = session.current_question()) {
        QuestionRecord r;
        r.entity = *q;
        r.truthful = truthful_answer(index, *q, target);
        r.emitted = oracle_answer(oracle, index, *q, target, stream, session.question_count());
        session.submit_answer(r.emitted ? Answer::Yes : Answer::No);
        r.target_rank_after = session.rank_of(target);
        trace.records.push_back(r);
    }
    trace.final_rank = session.rank_of(target);
    if (keep_transcript) {
        trace.transcript = session.transcript();
    }
    return trace;
}

/// Session transcript schema extended with the simulation fields.
inline nlohmann::json to_json(const SimulationTrace& t, const TopicIndex& index) {
    nlohmann::json j = t.transcript.is_object() ? t.transcript : nlohmann::json::object();
    j["topic_id"] = t.topic_id;
    j["target"] = index.product_ids.at(t.target);
    j["initial_rank"] = t.initial_rank;
    auto& questions = j["questions"];
    if (!questions.is_array()) {
        questions = nlohmann::json::array();
    }
    for (std::size_t i = 0; i < t.records.size(); ++i) {
        const auto& r = t.records[i];
        if (questions.size() <= i) {
            questions.push_back({{"entity", index.entity_labels.at(r.entity)}, {"answer", r.emitted ? "yes" : "no"}});
        }
        questions[i]["truthful_answer"] = r.truthful ? "yes" : "no";
        questions[i]["target_rank_after"] = r.target_rank_after;
    }
    j["final_rank"] = t.final_rank;
    return j;
}

}  // namespace qsbps
