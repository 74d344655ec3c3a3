#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qsbps {

/// Fixed-length bitmap over a topic's products, stored as 64-bit words.
/// Bits past size() in the last word are always zero.
class Bitmap {
  public:
    using word_type = std::uint64_t;
    static constexpr std::size_t word_bits = 64;

    Bitmap() = default;
    explicit Bitmap(std::size_t size, bool value = false)
        : m_size(size), m_words((size + word_bits - 1) / word_bits, value ? ~word_type{0} : 0) {
        clear_tail();
    }

    static Bitmap from_string(std::string_view bits) {
        Bitmap b(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] == '1') {
                b.set(i);
            }
        }
        return b;
    }

    [[nodiscard]] std::size_t size() const noexcept { return m_size; }
    [[nodiscard]] std::span<const word_type> words() const noexcept { return m_words; }

    [[nodiscard]] bool test(std::size_t i) const noexcept {
        return (m_words[i / word_bits] >> (i % word_bits)) & 1U;
    }
    void set(std::size_t i, bool value = true) noexcept {
        auto mask = word_type{1} << (i % word_bits);
        if (value) {
            m_words[i / word_bits] |= mask;
        } else {
            m_words[i / word_bits] &= ~mask;
        }
    }
    void reset(std::size_t i) noexcept { set(i, false); }

    [[nodiscard]] std::size_t count() const noexcept {
        std::size_t n = 0;
        for (auto w : m_words) {
            n += static_cast<std::size_t>(std::popcount(w));
        }
        return n;
    }
    [[nodiscard]] bool any() const noexcept {
        for (auto w : m_words) {
            if (w != 0) {
                return true;
            }
        }
        return false;
    }
    [[nodiscard]] bool none() const noexcept { return !any(); }

    /// Index of the first set bit, or size() when empty.
    [[nodiscard]] std::size_t first() const noexcept {
        for (std::size_t w = 0; w < m_words.size(); ++w) {
            if (m_words[w] != 0) {
                return w * word_bits + static_cast<std::size_t>(std::countr_zero(m_words[w]));
            }
        }
        return m_size;
    }

    Bitmap& operator&=(const Bitmap& other) noexcept {
        for (std::size_t w = 0; w < m_words.size(); ++w) {
            m_words[w] &= other.m_words[w];
        }
        return *this;
    }
    Bitmap& operator|=(const Bitmap& other) noexcept {
        for (std::size_t w = 0; w < m_words.size(); ++w) {
            m_words[w] |= other.m_words[w];
        }
        return *this;
    }
    [[nodiscard]] Bitmap operator~() const {
        Bitmap r = *this;
        for (auto& w : r.m_words) {
            w = ~w;
        }
        r.clear_tail();
        return r;
    }
    friend Bitmap operator&(Bitmap a, const Bitmap& b) noexcept { return a &= b; }
    friend Bitmap operator|(Bitmap a, const Bitmap& b) noexcept { return a |= b; }
    friend bool operator==(const Bitmap&, const Bitmap&) = default;

    /// popcount(this & other) without materializing the intersection.
    [[nodiscard]] std::size_t count_and(const Bitmap& other) const noexcept {
        std::size_t n = 0;
        for (std::size_t w = 0; w < m_words.size(); ++w) {
            n += static_cast<std::size_t>(std::popcount(m_words[w] & other.m_words[w]));
        }
        return n;
    }

    /// Calls fn(index) for every set bit in ascending order.
    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t w = 0; w < m_words.size(); ++w) {
            auto word = m_words[w];
            while (word != 0) {
                fn(w * word_bits + static_cast<std::size_t>(std::countr_zero(word)));
                word &= word - 1;
            }
        }
    }

    [[nodiscard]] std::vector<std::size_t> indices() const {
        std::vector<std::size_t> out;
        out.reserve(count());
        for_each([&](std::size_t i) { out.push_back(i); });
        return out;
    }

    [[nodiscard]] std::string to_string() const {
        std::string s(m_size, '0');
        for_each([&](std::size_t i) { s[i] = '1'; });
        return s;
    }

  private:
    void clear_tail() noexcept {
        if (auto rem = m_size % word_bits; rem != 0 && !m_words.empty()) {
            m_words.back() &= (word_type{1} << rem) - 1;
        }
    }

    std::size_t m_size = 0;
    std::vector<word_type> m_words;
};

/// Sums weights[d] over the set bits of `mask & sel` (in) and `mask & ~sel` (out),
/// each in ascending index order.
struct MaskedSums {
    double in = 0.0;
    double out = 0.0;
};

inline MaskedSums masked_sums(const Bitmap& mask, const Bitmap& sel, std::span<const double> weights) {
    MaskedSums s;
    auto m = mask.words();
    auto e = sel.words();
    for (std::size_t w = 0; w < m.size(); ++w) {
        auto in = m[w] & e[w];
        auto out = m[w] & ~e[w];
        auto base = w * Bitmap::word_bits;
        while (in != 0) {
            s.in += weights[base + static_cast<std::size_t>(std::countr_zero(in))];
            in &= in - 1;
        }
        while (out != 0) {
            s.out += weights[base + static_cast<std::size_t>(std::countr_zero(out))];
            out &= out - 1;
        }
    }
    return s;
}

}  // namespace qsbps
