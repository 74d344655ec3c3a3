#pragma once

#include <string>
#include <vector>

#include "qsbps/qsbps.hpp"

namespace qsbps::fixtures {

/// One-topic corpus "t" whose entity i has the incidence string rows[i]
/// ("1100": present in products 0 and 1). Entities are named A, B, C, ...
/// so pool order equals row order.
inline Corpus corpus_from_rows(const std::vector<std::string>& rows) {
    const auto n = rows.front().size();
    std::vector<ProductRecord> records(n);
    for (std::size_t d = 0; d < n; ++d) {
        records[d].product_id = "d" + std::to_string(d);
        records[d].topics = {"t"};
    }
    for (std::size_t e = 0; e < rows.size(); ++e) {
        for (std::size_t d = 0; d < n; ++d) {
            if (rows[e][d] == '1') {
                records[d].description_entities.push_back(std::string(1, static_cast<char>('A' + e)));
            }
        }
    }
    return Corpus::from_records(records, FieldMode::MetadataAndReviews);
}

inline TopicIndex index_from_rows(const std::vector<std::string>& rows) {
    return build_topic_index(corpus_from_rows(rows), "t", FieldMode::MetadataAndReviews);
}

/// Model with the given alpha (uniform when empty) and rewards (zero when empty).
inline TrainedModel model_for(const TopicIndex& index, std::vector<double> alpha = {},
                              std::vector<double> rewards = {}) {
    TrainedModel m;
    m.topic_id = index.topic_id;
    m.product_ids = index.product_ids;
    m.entities = index.entity_labels;
    m.alpha = alpha.empty() ? uniform_prior(index.size()) : DirichletBelief(std::move(alpha));
    m.rewards = rewards.empty() ? std::vector<double>(index.pool_size(), 0.0) : std::move(rewards);
    m.mode = TrainingMode::None;
    return m;
}

inline SyntheticSpec binary_spec(std::size_t k, std::size_t distractors = 0, std::size_t topics = 1) {
    SyntheticSpec s;
    s.n_topics = topics;
    s.n_products = std::size_t{1} << k;
    s.n_bit_entities = k;
    s.n_distractors = distractors;
    return s;
}

inline TopicIndex binary_index(std::size_t k, std::size_t distractors = 0) {
    auto corpus = generate_synthetic(binary_spec(k, distractors));
    return build_topic_index(corpus, "t1", FieldMode::MetadataAndReviews);
}

}  // namespace qsbps::fixtures
