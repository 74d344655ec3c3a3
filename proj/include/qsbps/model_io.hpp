#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsbps/corpus.hpp"
#include "qsbps/error.hpp"
#include "qsbps/split.hpp"
#include "qsbps/trainer.hpp"

namespace qsbps {

inline constexpr int model_format_version = 1;

/// Everything needed to rebuild an evaluation or serving workspace: the
/// trained topics plus the corpus and split they came from.
struct ModelFile {
    FieldMode field_mode = FieldMode::MetadataAndReviews;
    TrainingMode mode = TrainingMode::Duet;
    std::uint64_t seed = 42;
    std::string corpus_path;
    SplitRatios split_ratios;
    std::uint64_t split_seed = 42;
    std::vector<TrainedModel> topics;
};

inline nlohmann::json to_json(const ModelFile& f) {
    nlohmann::json j;
    j["format_version"] = model_format_version;
    j["field_mode"] = to_string(f.field_mode);
    j["mode"] = to_string(f.mode);
    j["seed"] = f.seed;
    j["corpus"] = f.corpus_path;
    j["split"] = {{"train", f.split_ratios.train},
                  {"validation", f.split_ratios.validation},
                  {"test", f.split_ratios.test},
                  {"seed", f.split_seed}};
    auto& topics = j["topics"] = nlohmann::json::object();
    for (const auto& m : f.topics) {
        nlohmann::json rewards = nlohmann::json::object();
        for (std::size_t e = 0; e < m.entities.size(); ++e) {
            rewards[m.entities[e]] = m.rewards[e];
        }
        topics[m.topic_id] = {{"products", m.product_ids},
                              {"alpha", std::vector<double>(m.alpha.alpha().begin(), m.alpha.alpha().end())},
                              {"rewards", std::move(rewards)},
                              {"train_count", m.train_count}};
    }
    return j;
}

inline ModelFile model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format_version").get<int>() != model_format_version) {
            throw input_error("unsupported model format_version");
        }
        ModelFile f;
        f.field_mode = parse_field_mode(j.at("field_mode").get<std::string>());
        f.mode = parse_training_mode(j.at("mode").get<std::string>());
        f.seed = j.at("seed").get<std::uint64_t>();
        f.corpus_path = j.value("corpus", std::string{});
        if (auto s = j.find("split"); s != j.end()) {
            f.split_ratios = {s->at("train").get<double>(), s->at("validation").get<double>(),
                              s->at("test").get<double>()};
            f.split_seed = s->at("seed").get<std::uint64_t>();
        }
        for (const auto& [topic_id, t] : j.at("topics").items()) {
            TrainedModel m;
            m.topic_id = topic_id;
            m.mode = f.mode;
            m.seed = f.seed;
            m.product_ids = t.at("products").get<std::vector<std::string>>();
            m.alpha = DirichletBelief(t.at("alpha").get<std::vector<double>>());
            if (m.alpha.size() != m.product_ids.size()) {
                throw input_error("topic '" + topic_id + "': alpha length does not match products");
            }
            // std::map order: entity labels ascending, which is pool order.
            for (const auto& [label, r] : t.at("rewards").get<std::map<std::string, double>>()) {
                m.entities.push_back(label);
                m.rewards.push_back(r);
            }
            m.train_count = t.value("train_count", std::size_t{0});
            f.topics.push_back(std::move(m));
        }
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("model file schema violation: ") + e.what());
    } catch (const usage_error& e) {
        throw input_error(std::string("model file schema violation: ") + e.what());
    }
}

inline void save_model(const ModelFile& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw input_error("cannot write model file '" + path + "'");
    }
    out << to_json(f).dump(1) << '\n';
}

inline ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw input_error("cannot open model file '" + path + "'");
    }
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw input_error("model file '" + path + "' is not valid JSON");
    }
    return model_from_json(j);
}

}  // namespace qsbps
