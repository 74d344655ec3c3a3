#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "qsbps/belief.hpp"
#include "qsbps/bitmap.hpp"
#include "qsbps/error.hpp"
#include "qsbps/parallel.hpp"
#include "qsbps/rng.hpp"
#include "qsbps/split.hpp"
#include "qsbps/topic_index.hpp"

namespace qsbps {

/// Which half of duet training is kept.
enum class TrainingMode { Duet, QuestionOnly, ProductOnly, None };

inline std::string_view to_string(TrainingMode m) {
    switch (m) {
        case TrainingMode::Duet: return "duet";
        case TrainingMode::QuestionOnly: return "q-train";
        case TrainingMode::ProductOnly: return "p-train";
        case TrainingMode::None: return "none";
    }
    return "none";
}

inline TrainingMode parse_training_mode(std::string_view s) {
    if (s == "duet") return TrainingMode::Duet;
    if (s == "q-train" || s == "question" || s == "q") return TrainingMode::QuestionOnly;
    if (s == "p-train" || s == "product" || s == "p") return TrainingMode::ProductOnly;
    if (s == "none" || s == "no-train") return TrainingMode::None;
    throw usage_error("unknown training mode '" + std::string(s) + "' (expected duet | q-train | p-train | none)");
}

/// Output of offline training for one topic. `rewards[i]` belongs to the
/// pool entity `entities[i]` of the topic index the model was trained on.
struct TrainedModel {
    std::string topic_id;
    std::vector<std::string> product_ids;
    DirichletBelief alpha;
    std::vector<std::string> entities;
    std::vector<double> rewards;

    TrainingMode mode = TrainingMode::Duet;
    std::uint64_t seed = 0;
    std::size_t train_count = 0;
};

/// Reward of asking `entity` when `target` is the purchased product, scored
/// from `base`: (rank before - rank after) / N under the worst-index rule.
inline double entity_reward(const DirichletBelief& base, const TopicIndex& index, std::size_t entity,
                            std::size_t target) {
    const auto before = rank_of(preference(base), target);
    const auto& inc = index.incidence.at(entity);
    const auto after = rank_of(preference(observe_answer(base, answer_indicator(inc, inc.test(target)))), target);
    return (static_cast<double>(before) - static_cast<double>(after)) / static_cast<double>(index.size());
}

namespace detail {

/// Sum over the pool of (rank before - rank after) for one purchase of
/// `target`, added into `acc`. Compares pseudo-counts directly: pi is alpha
/// scaled by a common positive factor, so ranks are unchanged.
inline void accumulate_rank_gains(std::span<const double> alpha, const TopicIndex& index, std::size_t target,
                                  std::vector<std::int64_t>& acc) {
    const auto n = alpha.size();
    const double own = alpha[target];
    Bitmap at_least(n);       // alpha(d) >= alpha(target)
    Bitmap at_least_next(n);  // alpha(d) >= alpha(target) + 1
    for (std::size_t d = 0; d < n; ++d) {
        if (alpha[d] >= own) {
            at_least.set(d);
        }
        if (alpha[d] >= own + 1.0) {
            at_least_next.set(d);
        }
    }
    const auto before = static_cast<std::int64_t>(at_least.count());
    for (std::size_t e = 0; e < index.pool_size(); ++e) {
        const auto& inc = index.incidence[e];
        // Z is inc when the target has e, its complement otherwise. Products in
        // Z gain one count alongside the target; the rest must already lead by one.
        const bool has = inc.test(target);
        const auto in_z = has ? at_least.count_and(inc) : at_least.count() - at_least.count_and(inc);
        const auto out_z = has ? at_least_next.count() - at_least_next.count_and(inc) : at_least_next.count_and(inc);
        acc[e] += before - static_cast<std::int64_t>(in_z + out_z);
    }
}

}  // namespace detail

/// Offline duet training on one topic. Every purchase is scored against the
/// belief as it stood before that purchase, then counted once.
inline TrainedModel train_topic(const TopicIndex& index, std::vector<std::uint32_t> train_products, TrainingMode mode,
                                std::uint64_t purchase_order_seed) {
    if (train_products.empty()) {
        throw input_error("topic '" + index.topic_id + "' has an empty training set");
    }
    for (auto d : train_products) {
        if (d >= index.size()) {
            throw input_error("training product index " + std::to_string(d) + " outside topic '" + index.topic_id +
                              "'");
        }
    }
    std::mt19937_64 rng(derive_seed(purchase_order_seed, {hash_string(index.topic_id)}));
    std::shuffle(train_products.begin(), train_products.end(), rng);

    std::vector<double> alpha(index.size(), 1.0);
    std::vector<std::int64_t> gains(index.pool_size(), 0);
    for (auto d : train_products) {
        detail::accumulate_rank_gains(alpha, index, d, gains);
        alpha[d] += 1.0;
    }

    TrainedModel m;
    m.topic_id = index.topic_id;
    m.product_ids = index.product_ids;
    m.entities = index.entity_labels;
    m.mode = mode;
    m.seed = purchase_order_seed;
    m.train_count = train_products.size();

    const bool keep_belief = mode == TrainingMode::Duet || mode == TrainingMode::ProductOnly;
    const bool keep_rewards = mode == TrainingMode::Duet || mode == TrainingMode::QuestionOnly;
    m.alpha = keep_belief ? DirichletBelief(std::move(alpha)) : uniform_prior(index.size());
    const double scale = static_cast<double>(index.size()) * static_cast<double>(train_products.size());
    m.rewards.assign(index.pool_size(), 0.0);
    if (keep_rewards) {
        for (std::size_t e = 0; e < gains.size(); ++e) {
            m.rewards[e] = static_cast<double>(gains[e]) / scale;
        }
    }
    return m;
}

/// Trains every topic that has a split, in split order.
inline std::vector<TrainedModel> train_all(const std::vector<TopicIndex>& indexes, const std::vector<Split>& splits,
                                           TrainingMode mode, std::uint64_t seed, std::size_t jobs = 1) {
    std::vector<const TopicIndex*> by_split;
    for (const auto& s : splits) {
        auto it = std::find_if(indexes.begin(), indexes.end(),
                               [&](const TopicIndex& t) { return t.topic_id == s.topic_id; });
        if (it == indexes.end()) {
            throw input_error("split references unknown topic '" + s.topic_id + "'");
        }
        by_split.push_back(&*it);
    }
    std::vector<TrainedModel> out(splits.size());
    parallel_for(splits.size(), jobs,
                 [&](std::size_t i) { out[i] = train_topic(*by_split[i], splits[i].train, mode, seed); });
    return out;
}

}  // namespace qsbps
