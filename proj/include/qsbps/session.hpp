#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsbps/belief.hpp"
#include "qsbps/bitmap.hpp"
#include "qsbps/error.hpp"
#include "qsbps/rng.hpp"
#include "qsbps/selector.hpp"
#include "qsbps/topic_index.hpp"
#include "qsbps/trainer.hpp"

namespace qsbps {

enum class Answer { Yes, No, Skip };

inline std::string_view to_string(Answer a) {
    switch (a) {
        case Answer::Yes: return "yes";
        case Answer::No: return "no";
        case Answer::Skip: return "skip";
    }
    return "skip";
}

inline std::optional<Answer> parse_answer(std::string_view s) {
    if (s == "yes" || s == "y") return Answer::Yes;
    if (s == "no" || s == "n") return Answer::No;
    if (s == "skip" || s == "s" || s == "not sure") return Answer::Skip;
    return std::nullopt;
}

enum class QuestionPolicy { Qsbps, Random };

struct SessionOptions {
    SelectionParams params;
    ErrorModel error_model;
    std::size_t n_q_limit = 10;
    QuestionPolicy policy = QuestionPolicy::Qsbps;
    std::uint64_t random_seed = 0;  // only read by QuestionPolicy::Random
};

struct HistoryEntry {
    std::size_t entity = 0;
    Answer answer = Answer::Skip;
    std::size_t top1_before = 0;
    std::size_t u_size_after = 0;
    std::size_t top1_after = 0;
    /// The answer contradicted every remaining candidate; pruning was skipped.
    bool contradiction = false;
};

struct RankedProduct {
    std::size_t product = 0;
    double score = 0.0;
};

/// Ranking order: preference descending, product index ascending.
inline std::vector<RankedProduct> ranking(const Preference& pref, std::size_t k) {
    std::vector<std::size_t> order(pref.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    k = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return pref[a] > pref[b] || (pref[a] == pref[b] && a < b); });
    std::vector<RankedProduct> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.push_back({order[i], pref[order[i]]});
    }
    return out;
}

/// Interactive search over one topic.
///
/// Holds non-owning references to the topic index and trained model; both
/// must outlive the session. Answers are applied strictly one at a time.
class Session {
  public:
    enum class Status { AwaitingAnswer, Finished };

    Session(const TrainedModel& model, const TopicIndex& index, SessionOptions options)
        : m_index(&index), m_rewards(model.rewards), m_options(options) {
        if (model.topic_id != index.topic_id) {
            throw input_error("model topic '" + model.topic_id + "' does not match index topic '" + index.topic_id +
                              "'");
        }
        if (model.product_ids != index.product_ids || model.entities != index.entity_labels ||
            model.rewards.size() != index.pool_size() || model.alpha.size() != index.size()) {
            throw input_error("model for topic '" + model.topic_id + "' does not match the topic index");
        }
        if (index.pool_size() == 0) {
            throw input_error("topic '" + index.topic_id + "' has an empty entity pool");
        }
        m_options.params.validate();
        m_belief = model.alpha;
        m_candidates = Bitmap(index.size(), true);
        m_unasked = Bitmap(index.pool_size(), true);
        advance();
    }

    [[nodiscard]] Status status() const noexcept { return m_status; }
    [[nodiscard]] bool finished() const noexcept { return m_status == Status::Finished; }
    [[nodiscard]] std::optional<std::size_t> current_question() const { return m_question; }
    [[nodiscard]] std::size_t question_count() const noexcept { return m_history.size(); }

    [[nodiscard]] const TopicIndex& index() const noexcept { return *m_index; }
    [[nodiscard]] const DirichletBelief& belief() const noexcept { return m_belief; }
    [[nodiscard]] const Bitmap& candidates() const noexcept { return m_candidates; }
    [[nodiscard]] const Bitmap& unasked() const noexcept { return m_unasked; }
    [[nodiscard]] const std::vector<HistoryEntry>& history() const noexcept { return m_history; }
    [[nodiscard]] const SessionOptions& options() const noexcept { return m_options; }
    [[nodiscard]] bool prunes() const noexcept { return !m_options.error_model.noisy(); }

    /// Applies an answer to the current question and selects the next one.
    /// Returns the next question, or nullopt once finished.
    std::optional<std::size_t> submit_answer(Answer answer) {
        if (m_status == Status::Finished || !m_question) {
            throw state_error("session is finished");
        }
        const auto entity = *m_question;
        HistoryEntry h;
        h.entity = entity;
        h.answer = answer;
        h.top1_before = top1();

        m_unasked.reset(entity);
        if (answer != Answer::Skip) {
            auto z = answer_indicator(m_index->incidence[entity], answer == Answer::Yes);
            m_belief = observe_answer(m_belief, z);
            if (prunes()) {
                auto narrowed = m_candidates & z;
                if (narrowed.any()) {
                    m_candidates = std::move(narrowed);
                } else {
                    h.contradiction = true;
                }
            }
        }
        h.u_size_after = m_candidates.count();
        h.top1_after = top1();
        m_history.push_back(h);
        advance();
        return m_question;
    }

    [[nodiscard]] Preference preference() const { return qsbps::preference(m_belief); }

    [[nodiscard]] std::vector<RankedProduct> final_ranking(std::size_t k) const { return ranking(preference(), k); }

    /// Worst-index rank of a product under the current preference.
    [[nodiscard]] std::size_t rank_of(std::size_t product) const { return qsbps::rank_of(preference(), product); }

    [[nodiscard]] nlohmann::json transcript(std::size_t top_k = 10) const {
        nlohmann::json j;
        j["topic_id"] = m_index->topic_id;
        j["params"] = {{"gamma", m_options.params.gamma},
                       {"beta", m_options.params.beta},
                       {"error_model", to_string(m_options.error_model)},
                       {"n_q_limit", m_options.n_q_limit},
                       {"policy", m_options.policy == QuestionPolicy::Qsbps ? "qsbps" : "random"}};
        j["questions"] = nlohmann::json::array();
        for (const auto& h : m_history) {
            nlohmann::json q{{"entity", m_index->entity_labels[h.entity]},
                             {"answer", to_string(h.answer)},
                             {"u_size_after", h.u_size_after},
                             {"top1_after", m_index->product_ids[h.top1_after]}};
            if (h.contradiction) {
                q["warning"] = "answer contradicts all remaining candidates; candidate set kept";
            }
            j["questions"].push_back(std::move(q));
        }
        j["final_ranking_topk"] = nlohmann::json::array();
        for (const auto& r : final_ranking(top_k)) {
            j["final_ranking_topk"].push_back({{"product_id", m_index->product_ids[r.product]}, {"score", r.score}});
        }
        j["status"] = finished() ? "finished" : "awaiting_answer";
        return j;
    }

  private:
    [[nodiscard]] std::size_t top1() const {
        auto alpha = m_belief.alpha();
        return static_cast<std::size_t>(std::max_element(alpha.begin(), alpha.end()) - alpha.begin());
    }

    void advance() {
        m_question.reset();
        const bool budget_left = m_history.size() < m_options.n_q_limit;
        const bool ambiguous = !prunes() || m_candidates.count() > 1;
        if (!budget_left || !ambiguous || m_unasked.none()) {
            m_status = Status::Finished;
            return;
        }
        m_status = Status::AwaitingAnswer;
        if (m_options.policy == QuestionPolicy::Random) {
            auto remaining = m_unasked.count();
            auto bits = derive_seed(m_options.random_seed, {m_history.size()});
            auto pick = static_cast<std::size_t>(unit_double(bits) * static_cast<double>(remaining));
            auto pool = m_unasked.indices();
            m_question = pool[std::min(pick, remaining - 1)];
        } else {
            m_question = select_entity(*m_index, m_unasked, m_candidates, m_belief, m_rewards, m_options.params,
                                       m_options.error_model);
        }
    }

    const TopicIndex* m_index;
    std::span<const double> m_rewards;
    SessionOptions m_options;
    DirichletBelief m_belief;
    Bitmap m_candidates;
    Bitmap m_unasked;
    std::vector<HistoryEntry> m_history;
    std::optional<std::size_t> m_question;
    Status m_status = Status::AwaitingAnswer;
};

}  // namespace qsbps
