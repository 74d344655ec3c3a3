#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "qsbps/error.hpp"
#include "qsbps/rng.hpp"
#include "qsbps/topic_index.hpp"

namespace qsbps {

struct SplitRatios {
    double train = 0.6;
    double validation = 0.1;
    double test = 0.3;

    void validate() const {
        if (!(train > 0 && validation > 0 && test > 0)) {
            throw usage_error("split ratios must be positive");
        }
        if (std::abs(train + validation + test - 1.0) > 1e-9) {
            throw usage_error("split ratios must sum to 1");
        }
    }
};

enum class SplitPart { Train, Validation, Test };

/// Per-topic split of purchase events. Each event is a product position in
/// the topic; a product with k purchases contributes k events. When every
/// product has exactly one purchase the parts are disjoint product sets whose
/// union is the topic.
struct Split {
    std::string topic_id;
    std::vector<std::uint32_t> train;
    std::vector<std::uint32_t> validation;
    std::vector<std::uint32_t> test;

    [[nodiscard]] const std::vector<std::uint32_t>& part(SplitPart p) const {
        switch (p) {
            case SplitPart::Train: return train;
            case SplitPart::Validation: return validation;
            case SplitPart::Test: return test;
        }
        return test;
    }
};

/// Part sizes for m events: floor for validation and test, remainder to
/// train, then each empty part takes one event from the currently largest.
inline std::array<std::size_t, 3> split_sizes(std::size_t m, const SplitRatios& r) {
    auto floor_of = [m](double ratio) {
        return static_cast<std::size_t>(std::floor(static_cast<double>(m) * ratio + 1e-9));
    };
    std::array<std::size_t, 3> s{0, floor_of(r.validation), floor_of(r.test)};
    s[0] = m - s[1] - s[2];
    for (std::size_t part = 0; part < 3; ++part) {
        if (s[part] == 0) {
            auto largest = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
            --s[largest];
            ++s[part];
        }
    }
    return s;
}

inline Split split_topic(const TopicIndex& index, const SplitRatios& ratios, std::uint64_t seed) {
    ratios.validate();
    std::vector<std::uint32_t> events;
    for (std::size_t d = 0; d < index.size(); ++d) {
        events.insert(events.end(), index.purchases[d], static_cast<std::uint32_t>(d));
    }
    if (events.size() < 3) {
        throw input_error("topic '" + index.topic_id + "' has fewer than 3 purchase events; cannot split");
    }
    std::mt19937_64 rng(derive_seed(seed, {hash_string(index.topic_id)}));
    std::shuffle(events.begin(), events.end(), rng);

    auto sizes = split_sizes(events.size(), ratios);
    Split s;
    s.topic_id = index.topic_id;
    auto first = events.begin();
    s.train.assign(first, first + static_cast<std::ptrdiff_t>(sizes[0]));
    first += static_cast<std::ptrdiff_t>(sizes[0]);
    s.validation.assign(first, first + static_cast<std::ptrdiff_t>(sizes[1]));
    first += static_cast<std::ptrdiff_t>(sizes[1]);
    s.test.assign(first, events.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.validation.begin(), s.validation.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

}  // namespace qsbps
