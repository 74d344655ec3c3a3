#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "qsbps/corpus.hpp"
#include "qsbps/error.hpp"
#include "qsbps/rng.hpp"

namespace qsbps {

/// Parameters of a synthetic corpus.
///
/// Each topic holds n_products products. Product i carries bit entity b iff
/// bit b of i is set, so the bit entities form a binary code. Distractor
/// entities are present independently with probability distractor_density.
/// Review entities appear only in review_entities (for field-mode
/// comparisons). With purchase_skew > 0, n_purchases purchase events per topic
/// are drawn from a Zipf(purchase_skew) popularity law over a random product
/// ranking; otherwise every product is purchased once. Trend entities tie
/// content to popularity: each is present with probability 0.9 in the
/// trend_share most popular products and 0.1 elsewhere.
struct SyntheticSpec {
    std::size_t n_topics = 1;
    std::size_t n_products = 8;
    std::size_t n_bit_entities = 3;
    std::size_t n_distractors = 0;
    double distractor_density = 0.5;
    std::size_t n_review_entities = 0;
    double review_density = 0.5;
    /// Each entity is mentioned m times per containing product, m uniform in
    /// [1, max_mentions]. Values above 1 make term frequencies heterogeneous.
    std::uint32_t max_mentions = 1;
    double purchase_skew = 0.0;
    std::size_t n_purchases = 0;
    std::size_t n_trend_entities = 0;
    double trend_share = 0.25;
    std::uint64_t seed = 42;

    void validate() const {
        if (n_topics == 0 || n_products < 2) {
            throw usage_error("synthetic corpus needs at least one topic of two products");
        }
        if (n_bit_entities < 63 && n_products > (std::size_t{1} << n_bit_entities)) {
            throw usage_error("n_products exceeds the capacity of " + std::to_string(n_bit_entities) +
                              " bit entities");
        }
        if (distractor_density < 0 || distractor_density > 1 || review_density < 0 || review_density > 1) {
            throw usage_error("densities must lie in [0, 1]");
        }
        if (max_mentions == 0) {
            throw usage_error("max_mentions must be at least 1");
        }
        if (purchase_skew < 0) {
            throw usage_error("purchase_skew must be non-negative");
        }
        if (purchase_skew > 0 && n_purchases == 0) {
            throw usage_error("purchase_skew requires n_purchases > 0");
        }
        if (n_trend_entities > 0 && purchase_skew <= 0) {
            throw usage_error("trend entities require purchase_skew > 0");
        }
        if (trend_share <= 0 || trend_share > 1) {
            throw usage_error("trend_share must lie in (0, 1]");
        }
    }
};

namespace detail {

inline std::string padded(std::size_t value, std::size_t count) {
    auto width = std::to_string(count > 0 ? count - 1 : 0).size();
    auto s = std::to_string(value);
    return std::string(width - std::min(width, s.size()), '0') + s;
}

}  // namespace detail

inline std::vector<ProductRecord> generate_synthetic_records(const SyntheticSpec& spec) {
    spec.validate();
    std::vector<ProductRecord> records;
    records.reserve(spec.n_topics * spec.n_products);

    for (std::size_t t = 0; t < spec.n_topics; ++t) {
        const std::string topic = "t" + std::to_string(t + 1);
        std::mt19937_64 rng(derive_seed(spec.seed, {t}));
        std::uniform_int_distribution<std::uint32_t> mentions(1, spec.max_mentions);
        std::bernoulli_distribution distractor(spec.distractor_density);
        std::bernoulli_distribution review(spec.review_density);

        std::vector<std::string> bit_names;
        std::vector<std::uint32_t> bit_mult;
        for (std::size_t b = 0; b < spec.n_bit_entities; ++b) {
            bit_names.push_back(topic + "_bit" + detail::padded(b, spec.n_bit_entities));
            bit_mult.push_back(mentions(rng));
        }
        std::vector<std::string> x_names;
        std::vector<std::uint32_t> x_mult;
        for (std::size_t x = 0; x < spec.n_distractors; ++x) {
            x_names.push_back(topic + "_x" + detail::padded(x, spec.n_distractors));
            x_mult.push_back(mentions(rng));
        }
        std::vector<std::string> r_names;
        for (std::size_t r = 0; r < spec.n_review_entities; ++r) {
            r_names.push_back(topic + "_r" + detail::padded(r, spec.n_review_entities));
        }

        std::vector<std::uint32_t> purchases(spec.n_products, 1);
        std::vector<std::size_t> rank_of(spec.n_products, 0);
        if (spec.purchase_skew > 0) {
            std::vector<std::size_t> popularity(spec.n_products);
            std::iota(popularity.begin(), popularity.end(), std::size_t{0});
            std::shuffle(popularity.begin(), popularity.end(), rng);
            std::vector<double> weights(spec.n_products);
            for (std::size_t r = 0; r < spec.n_products; ++r) {
                weights[popularity[r]] = 1.0 / std::pow(static_cast<double>(r + 1), spec.purchase_skew);
                rank_of[popularity[r]] = r;
            }
            std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
            std::fill(purchases.begin(), purchases.end(), 0U);
            for (std::size_t k = 0; k < spec.n_purchases; ++k) {
                ++purchases[pick(rng)];
            }
        }

        for (std::size_t i = 0; i < spec.n_products; ++i) {
            ProductRecord rec;
            rec.product_id = topic + "_p" + detail::padded(i, spec.n_products);
            rec.topics = {topic};
            for (std::size_t b = 0; b < spec.n_bit_entities && b < 64; ++b) {
                if ((i >> b) & 1U) {
                    rec.description_entities.insert(rec.description_entities.end(), bit_mult[b], bit_names[b]);
                }
            }
            for (std::size_t x = 0; x < spec.n_distractors; ++x) {
                if (distractor(rng)) {
                    rec.description_entities.insert(rec.description_entities.end(), x_mult[x], x_names[x]);
                }
            }
            for (std::size_t r = 0; r < spec.n_review_entities; ++r) {
                if (review(rng)) {
                    rec.review_entities.push_back(r_names[r]);
                }
            }
            const bool head = static_cast<double>(rank_of[i]) < spec.trend_share * static_cast<double>(spec.n_products);
            std::bernoulli_distribution trend(head ? 0.9 : 0.1);
            for (std::size_t k = 0; k < spec.n_trend_entities; ++k) {
                if (trend(rng)) {
                    rec.description_entities.push_back(topic + "_tr" + detail::padded(k, spec.n_trend_entities));
                }
            }
            if (spec.purchase_skew > 0) {
                rec.purchases = purchases[i];
            }
            records.push_back(std::move(rec));
        }
    }
    return records;
}

inline Corpus generate_synthetic(const SyntheticSpec& spec, FieldMode field_mode = FieldMode::MetadataAndReviews) {
    return Corpus::from_records(generate_synthetic_records(spec), field_mode);
}

}  // namespace qsbps
