#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "qsbps/corpus.hpp"
#include "qsbps/error.hpp"
#include "qsbps/model_io.hpp"
#include "qsbps/split.hpp"
#include "qsbps/topic_index.hpp"
#include "qsbps/trainer.hpp"

namespace qsbps {

/// Topic indexes and splits for every splittable topic of a corpus, plus the
/// trained models once available. Immutable after construction, so it can
/// be shared by concurrent sessions.
struct Workspace {
    std::vector<TopicIndex> indexes;
    std::vector<Split> splits;
    std::vector<TrainedModel> models;      // empty until trained or loaded
    std::vector<std::string> skipped;      // topics with too few purchases to split

    [[nodiscard]] std::size_t size() const noexcept { return indexes.size(); }

    [[nodiscard]] std::optional<std::size_t> find(std::string_view topic_id) const {
        auto it = m_pos.find(std::string(topic_id));
        if (it == m_pos.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    void rebuild_lookup() {
        m_pos.clear();
        for (std::size_t i = 0; i < indexes.size(); ++i) {
            m_pos.emplace(indexes[i].topic_id, i);
        }
    }

  private:
    std::unordered_map<std::string, std::size_t> m_pos;
};

inline std::size_t purchase_events(const TopicIndex& index) {
    std::size_t n = 0;
    for (auto p : index.purchases) {
        n += p;
    }
    return n;
}

inline Workspace prepare_workspace(const Corpus& corpus, FieldMode field_mode, const SplitRatios& ratios,
                                   std::uint64_t split_seed) {
    Workspace ws;
    for (auto& index : build_all_topic_indexes(corpus, field_mode)) {
        if (purchase_events(index) < 3 || index.pool_size() == 0) {
            ws.skipped.push_back(index.topic_id);
            continue;
        }
        ws.splits.push_back(split_topic(index, ratios, split_seed));
        ws.indexes.push_back(std::move(index));
    }
    ws.rebuild_lookup();
    return ws;
}

/// Workspace for a saved model: re-derives indexes and splits from the
/// corpus and checks every model against its topic index.
inline Workspace workspace_for_model(const Corpus& corpus, const ModelFile& model) {
    auto ws = prepare_workspace(corpus, model.field_mode, model.split_ratios, model.split_seed);
    std::vector<TopicIndex> indexes;
    std::vector<Split> splits;
    for (const auto& m : model.topics) {
        auto pos = ws.find(m.topic_id);
        if (!pos) {
            throw input_error("model topic '" + m.topic_id + "' is not a splittable topic of the corpus");
        }
        const auto& index = ws.indexes[*pos];
        if (m.product_ids != index.product_ids) {
            throw input_error("model topic '" + m.topic_id + "': product list does not match the corpus");
        }
        if (m.entities != index.entity_labels) {
            throw input_error("model topic '" + m.topic_id + "': rewards are not keyed by the topic's entity pool");
        }
        indexes.push_back(index);
        splits.push_back(ws.splits[*pos]);
    }
    Workspace out;
    out.indexes = std::move(indexes);
    out.splits = std::move(splits);
    out.models = model.topics;
    out.skipped = ws.skipped;
    out.rebuild_lookup();
    return out;
}

}  // namespace qsbps
