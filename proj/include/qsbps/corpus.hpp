#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsbps/error.hpp"

namespace qsbps {

using EntityId = std::uint32_t;
using ProductIndex = std::uint32_t;

enum class FieldMode { MetadataOnly, MetadataAndReviews };

inline std::string_view to_string(FieldMode m) {
    return m == FieldMode::MetadataOnly ? "metadata" : "metadata+reviews";
}

inline FieldMode parse_field_mode(std::string_view s) {
    if (s == "metadata" || s == "m") {
        return FieldMode::MetadataOnly;
    }
    if (s == "metadata+reviews" || s == "mr" || s == "m&r") {
        return FieldMode::MetadataAndReviews;
    }
    throw usage_error("unknown field mode '" + std::string(s) + "' (expected metadata | metadata+reviews)");
}

/// Dense entity-id vocabulary. Ids are assigned in ascending lexicographic
/// order of the entity strings, so they do not depend on record order.
class Vocabulary {
  public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> sorted_unique) : m_strings(std::move(sorted_unique)) {
        m_ids.reserve(m_strings.size());
        for (std::size_t i = 0; i < m_strings.size(); ++i) {
            m_ids.emplace(m_strings[i], static_cast<EntityId>(i));
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return m_strings.size(); }
    [[nodiscard]] const std::string& str(EntityId id) const { return m_strings.at(id); }
    [[nodiscard]] std::optional<EntityId> find(std::string_view s) const {
        auto it = m_ids.find(std::string(s));
        if (it == m_ids.end()) {
            return std::nullopt;
        }
        return it->second;
    }
    [[nodiscard]] EntityId id(std::string_view s) const {
        if (auto found = find(s)) {
            return *found;
        }
        throw input_error("unknown entity '" + std::string(s) + "'");
    }

  private:
    std::vector<std::string> m_strings;
    std::unordered_map<std::string, EntityId> m_ids;
};

/// Entity lists are mention lists: an entity repeated k times occurs k times
/// in that document field (term frequency). Presence is set membership.
struct Product {
    std::string product_id;
    std::vector<std::string> topic_ids;
    std::vector<EntityId> description_entities;
    std::vector<EntityId> review_entities;
    /// Observed purchase events of this product; 1 when the corpus has no log.
    std::uint32_t purchases = 1;
};

struct Topic {
    std::string topic_id;
    std::string title;
    std::vector<ProductIndex> products;  // corpus product indices, file order
};

/// A product record as it appears in the corpus file.
struct ProductRecord {
    std::string product_id;
    std::vector<std::string> topics;
    std::vector<std::string> description_entities;
    std::vector<std::string> review_entities;
    std::optional<std::uint32_t> purchases;
};

class Corpus {
  public:
    /// Validates records, interns entities and drops single-product topics.
    static Corpus from_records(const std::vector<ProductRecord>& records, FieldMode field_mode) {
        if (records.empty()) {
            throw input_error("no products");
        }
        Corpus c;
        c.m_field_mode = field_mode;

        std::set<std::string> entity_strings;
        for (const auto& r : records) {
            entity_strings.insert(r.description_entities.begin(), r.description_entities.end());
            entity_strings.insert(r.review_entities.begin(), r.review_entities.end());
        }
        c.m_vocab = Vocabulary({entity_strings.begin(), entity_strings.end()});

        std::map<std::string, std::size_t> topic_pos;
        std::vector<Topic> all_topics;
        for (const auto& r : records) {
            if (r.product_id.empty()) {
                throw input_error("empty product_id");
            }
            if (r.topics.empty()) {
                throw input_error("product '" + r.product_id + "' references no topic");
            }
            auto idx = static_cast<ProductIndex>(c.m_products.size());
            if (!c.m_product_pos.emplace(r.product_id, idx).second) {
                throw input_error("duplicate product_id '" + r.product_id + "'");
            }
            Product p;
            p.product_id = r.product_id;
            std::set<std::string> seen;
            for (const auto& t : r.topics) {
                if (!seen.insert(t).second) {
                    continue;
                }
                p.topic_ids.push_back(t);
                auto [it, inserted] = topic_pos.emplace(t, all_topics.size());
                if (inserted) {
                    all_topics.push_back(Topic{t, t, {}});
                }
                all_topics[it->second].products.push_back(idx);
            }
            for (const auto& e : r.description_entities) {
                p.description_entities.push_back(c.m_vocab.id(e));
            }
            for (const auto& e : r.review_entities) {
                p.review_entities.push_back(c.m_vocab.id(e));
            }
            p.purchases = r.purchases.value_or(1);
            c.m_products.push_back(std::move(p));
        }

        for (auto& t : all_topics) {
            if (t.products.size() < 2) {
                continue;
            }
            c.m_topic_pos.emplace(t.topic_id, c.m_topics.size());
            c.m_topics.push_back(std::move(t));
        }
        return c;
    }

    [[nodiscard]] FieldMode field_mode() const noexcept { return m_field_mode; }
    [[nodiscard]] const Vocabulary& vocabulary() const noexcept { return m_vocab; }
    [[nodiscard]] const std::vector<Product>& products() const noexcept { return m_products; }
    [[nodiscard]] const std::vector<Topic>& topics() const noexcept { return m_topics; }

    [[nodiscard]] const Product& product(ProductIndex i) const { return m_products.at(i); }
    [[nodiscard]] std::optional<ProductIndex> find_product(std::string_view id) const {
        auto it = m_product_pos.find(std::string(id));
        if (it == m_product_pos.end()) {
            return std::nullopt;
        }
        return it->second;
    }
    [[nodiscard]] const Topic* find_topic(std::string_view id) const {
        auto it = m_topic_pos.find(std::string(id));
        return it == m_topic_pos.end() ? nullptr : &m_topics[it->second];
    }
    [[nodiscard]] const Topic& topic(std::string_view id) const {
        if (const auto* t = find_topic(id)) {
            return *t;
        }
        throw input_error("unknown topic '" + std::string(id) + "'");
    }

    [[nodiscard]] std::vector<ProductRecord> to_records() const {
        std::vector<ProductRecord> out;
        out.reserve(m_products.size());
        for (const auto& p : m_products) {
            ProductRecord r;
            r.product_id = p.product_id;
            r.topics = p.topic_ids;
            for (auto e : p.description_entities) {
                r.description_entities.push_back(m_vocab.str(e));
            }
            for (auto e : p.review_entities) {
                r.review_entities.push_back(m_vocab.str(e));
            }
            if (p.purchases != 1) {
                r.purchases = p.purchases;
            }
            out.push_back(std::move(r));
        }
        return out;
    }

  private:
    FieldMode m_field_mode = FieldMode::MetadataAndReviews;
    Vocabulary m_vocab;
    std::vector<Product> m_products;
    std::unordered_map<std::string, ProductIndex> m_product_pos;
    std::vector<Topic> m_topics;
    std::unordered_map<std::string, std::size_t> m_topic_pos;
};

namespace detail {

inline std::vector<std::string> string_array(const nlohmann::json& j, const char* field, bool required) {
    auto it = j.find(field);
    if (it == j.end()) {
        if (required) {
            throw input_error(std::string("missing field '") + field + "'");
        }
        return {};
    }
    if (!it->is_array()) {
        throw input_error(std::string("field '") + field + "' must be an array of strings");
    }
    std::vector<std::string> out;
    out.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_string()) {
            throw input_error(std::string("field '") + field + "' must be an array of strings");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace detail

inline ProductRecord parse_product_record(std::string_view line) {
    auto j = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded()) {
        throw input_error("invalid JSON");
    }
    if (!j.is_object()) {
        throw input_error("record is not a JSON object");
    }
    ProductRecord r;
    auto id = j.find("product_id");
    if (id == j.end() || !id->is_string()) {
        throw input_error("missing or non-string field 'product_id'");
    }
    r.product_id = id->get<std::string>();
    r.topics = detail::string_array(j, "topics", true);
    r.description_entities = detail::string_array(j, "description_entities", false);
    r.review_entities = detail::string_array(j, "review_entities", false);
    if (auto p = j.find("purchases"); p != j.end()) {
        if (!p->is_number_unsigned()) {
            throw input_error("field 'purchases' must be a non-negative integer");
        }
        r.purchases = p->get<std::uint32_t>();
    }
    return r;
}

/// Reads line-delimited JSON product records. Blank lines are skipped.
inline Corpus load_corpus(std::istream& in, FieldMode field_mode) {
    std::vector<ProductRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            records.push_back(parse_product_record(line));
        } catch (const input_error& e) {
            throw input_error("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return Corpus::from_records(records, field_mode);
}

inline Corpus load_corpus(const std::string& path, FieldMode field_mode) {
    std::ifstream in(path);
    if (!in) {
        throw input_error("cannot open corpus file '" + path + "'");
    }
    return load_corpus(in, field_mode);
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
    for (const auto& r : corpus.to_records()) {
        nlohmann::ordered_json j;
        j["product_id"] = r.product_id;
        j["topics"] = r.topics;
        j["description_entities"] = r.description_entities;
        j["review_entities"] = r.review_entities;
        if (r.purchases) {
            j["purchases"] = *r.purchases;
        }
        out << j.dump() << '\n';
    }
}

}  // namespace qsbps
