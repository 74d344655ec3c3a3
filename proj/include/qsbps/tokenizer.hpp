#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "qsbps/corpus.hpp"
#include "qsbps/error.hpp"

namespace qsbps {

/// Fallback entity annotator: lowercases text, splits it into alphanumeric
/// words and reports every word unigram and bigram that is in the dictionary.
/// Bigram entries use a single space between words.
class DictionaryTokenizer {
  public:
    explicit DictionaryTokenizer(std::unordered_set<std::string> dictionary) : m_dict(std::move(dictionary)) {}

    static DictionaryTokenizer from_stream(std::istream& in) {
        std::unordered_set<std::string> dict;
        std::string line;
        while (std::getline(in, line)) {
            auto words = split_words(line);
            if (words.empty()) {
                continue;
            }
            std::string entry = words[0];
            for (std::size_t i = 1; i < words.size(); ++i) {
                entry += ' ' + words[i];
            }
            dict.insert(std::move(entry));
        }
        return DictionaryTokenizer(std::move(dict));
    }

    static std::vector<std::string> split_words(std::string_view text) {
        std::vector<std::string> words;
        std::string cur;
        for (char ch : text) {
            auto c = static_cast<unsigned char>(ch);
            if (std::isalnum(c)) {
                cur.push_back(static_cast<char>(std::tolower(c)));
            } else if (!cur.empty()) {
                words.push_back(std::move(cur));
                cur.clear();
            }
        }
        if (!cur.empty()) {
            words.push_back(std::move(cur));
        }
        return words;
    }

    /// Mentions in text order; unigram before the bigram starting at the same word.
    [[nodiscard]] std::vector<std::string> annotate(std::string_view text) const {
        auto words = split_words(text);
        std::vector<std::string> out;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (m_dict.contains(words[i])) {
                out.push_back(words[i]);
            }
            if (i + 1 < words.size()) {
                auto bigram = words[i] + ' ' + words[i + 1];
                if (m_dict.contains(bigram)) {
                    out.push_back(std::move(bigram));
                }
            }
        }
        return out;
    }

    [[nodiscard]] std::size_t size() const noexcept { return m_dict.size(); }

  private:
    std::unordered_set<std::string> m_dict;
};

/// Converts a raw-text record {"product_id", "topics", "description": str,
/// "reviews": [str]} into a corpus record.
inline ProductRecord annotate_raw_record(const nlohmann::json& raw, const DictionaryTokenizer& tok) {
    if (!raw.is_object()) {
        throw input_error("record is not a JSON object");
    }
    ProductRecord r;
    auto id = raw.find("product_id");
    if (id == raw.end() || !id->is_string()) {
        throw input_error("missing or non-string field 'product_id'");
    }
    r.product_id = id->get<std::string>();
    r.topics = detail::string_array(raw, "topics", true);
    if (auto d = raw.find("description"); d != raw.end()) {
        if (!d->is_string()) {
            throw input_error("field 'description' must be a string");
        }
        r.description_entities = tok.annotate(d->get<std::string>());
    }
    if (auto rv = raw.find("reviews"); rv != raw.end()) {
        for (const auto& text : detail::string_array(raw, "reviews", false)) {
            auto mentions = tok.annotate(text);
            r.review_entities.insert(r.review_entities.end(), mentions.begin(), mentions.end());
        }
    }
    if (auto p = raw.find("purchases"); p != raw.end()) {
        if (!p->is_number_unsigned()) {
            throw input_error("field 'purchases' must be a non-negative integer");
        }
        r.purchases = p->get<std::uint32_t>();
    }
    return r;
}

inline std::vector<ProductRecord> annotate_raw_corpus(std::istream& in, const DictionaryTokenizer& tok) {
    std::vector<ProductRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                throw input_error("invalid JSON");
            }
            out.push_back(annotate_raw_record(j, tok));
        } catch (const input_error& e) {
            throw input_error("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace qsbps
