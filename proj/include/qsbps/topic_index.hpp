#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "qsbps/bitmap.hpp"
#include "qsbps/corpus.hpp"

namespace qsbps {

/// Per-topic question pool with entity-incidence bitmaps.
///
/// Products are indexed 0..N-1 in topic order; pool entities are sorted by
/// ascending interned id, so "pool position" order equals entity-id order.
struct TopicIndex {
    std::string topic_id;
    FieldMode field_mode = FieldMode::MetadataAndReviews;

    std::vector<std::string> product_ids;
    std::vector<std::uint32_t> purchases;  // purchase events per product

    std::vector<EntityId> entities;
    std::vector<std::string> entity_labels;
    std::vector<Bitmap> incidence;  // incidence[pos].test(d) == e(d)
    std::vector<double> tf_avg;     // mean mention count over the topic's products

    [[nodiscard]] std::size_t size() const noexcept { return product_ids.size(); }
    [[nodiscard]] std::size_t pool_size() const noexcept { return entities.size(); }

    [[nodiscard]] std::optional<std::size_t> product_position(std::string_view id) const {
        for (std::size_t i = 0; i < product_ids.size(); ++i) {
            if (product_ids[i] == id) {
                return i;
            }
        }
        return std::nullopt;
    }
    [[nodiscard]] std::optional<std::size_t> entity_position(EntityId id) const {
        auto it = std::lower_bound(entities.begin(), entities.end(), id);
        if (it == entities.end() || *it != id) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - entities.begin());
    }
    [[nodiscard]] std::optional<std::size_t> entity_position(std::string_view label) const {
        auto it = m_label_pos.find(std::string(label));
        if (it == m_label_pos.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    void rebuild_lookup() {
        m_label_pos.clear();
        for (std::size_t i = 0; i < entity_labels.size(); ++i) {
            m_label_pos.emplace(entity_labels[i], i);
        }
    }

  private:
    std::unordered_map<std::string, std::size_t> m_label_pos;
};

inline TopicIndex build_topic_index(const Corpus& corpus, std::string_view topic_id, FieldMode field_mode) {
    const auto& topic = corpus.topic(topic_id);
    const auto n = topic.products.size();

    TopicIndex idx;
    idx.topic_id = topic.topic_id;
    idx.field_mode = field_mode;

    // entity -> per-product mention counts
    std::map<EntityId, std::vector<std::uint32_t>> counts;
    for (std::size_t d = 0; d < n; ++d) {
        const auto& p = corpus.product(topic.products[d]);
        idx.product_ids.push_back(p.product_id);
        idx.purchases.push_back(p.purchases);
        auto add = [&](EntityId e) {
            auto& row = counts[e];
            if (row.empty()) {
                row.assign(n, 0);
            }
            ++row[d];
        };
        for (auto e : p.description_entities) {
            add(e);
        }
        if (field_mode == FieldMode::MetadataAndReviews) {
            for (auto e : p.review_entities) {
                add(e);
            }
        }
    }

    idx.entities.reserve(counts.size());
    for (const auto& [e, row] : counts) {
        Bitmap bits(n);
        std::uint64_t total = 0;
        for (std::size_t d = 0; d < n; ++d) {
            if (row[d] > 0) {
                bits.set(d);
            }
            total += row[d];
        }
        idx.entities.push_back(e);
        idx.entity_labels.push_back(corpus.vocabulary().str(e));
        idx.incidence.push_back(std::move(bits));
        idx.tf_avg.push_back(static_cast<double>(total) / static_cast<double>(n));
    }
    idx.rebuild_lookup();
    return idx;
}

/// Indexes every topic of the corpus, in corpus topic order.
inline std::vector<TopicIndex> build_all_topic_indexes(const Corpus& corpus, FieldMode field_mode) {
    std::vector<TopicIndex> out;
    out.reserve(corpus.topics().size());
    for (const auto& t : corpus.topics()) {
        out.push_back(build_topic_index(corpus, t.topic_id, field_mode));
    }
    return out;
}

}  // namespace qsbps
