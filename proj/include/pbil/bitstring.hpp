#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pbil {

/// Fixed-length bit vector. Position 0 is the leftmost (most significant)
/// bit. Storage is packed 64 positions per word, position i living at bit
/// (i % 64) of word (i / 64); the layout is not part of the interface.
class Bitstring {
public:
    Bitstring() = default;
    explicit Bitstring(std::size_t n) : size_(n), words_((n + 63) / 64, 0) {}

    // Parses "1011"-style text. Throws std::invalid_argument on other characters.
    static Bitstring from_string(std::string_view text);
    static Bitstring all_ones(std::size_t n);

    std::size_t size() const noexcept { return size_; }

    bool operator[](std::size_t i) const noexcept
    {
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }

    void set(std::size_t i, bool value) noexcept
    {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (value) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }

    void clear() noexcept
    {
        for (auto& w : words_) {
            w = 0;
        }
    }

    std::size_t count_ones() const noexcept
    {
        std::size_t c = 0;
        for (auto w : words_) {
            c += static_cast<std::size_t>(std::popcount(w));
        }
        return c;
    }

    const std::vector<std::uint64_t>& words() const noexcept { return words_; }
    std::vector<std::uint64_t>& words() noexcept { return words_; }

    std::string to_string() const;

    bool operator==(const Bitstring&) const = default;

private:
    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace pbil
