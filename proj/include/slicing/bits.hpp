#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <vector>

#if defined(__BMI2__)
#include <immintrin.h>
#endif

#include "error.hpp"

namespace slicing {

static_assert(std::endian::native == std::endian::little,
              "on-disk layouts are little-endian and read in place");

namespace bits {

inline std::uint64_t load_u64(const std::uint8_t* p) noexcept {
    std::uint64_t v;
    std::memcpy(&v, p, sizeof(v));
    return v;
}

inline std::uint32_t load_u32(const std::uint8_t* p) noexcept {
    std::uint32_t v;
    std::memcpy(&v, p, sizeof(v));
    return v;
}

inline std::uint16_t load_u16(const std::uint8_t* p) noexcept {
    std::uint16_t v;
    std::memcpy(&v, p, sizeof(v));
    return v;
}

inline void store_u64(std::uint8_t* p, std::uint64_t v) noexcept { std::memcpy(p, &v, sizeof(v)); }

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

/// Position of the (rank+1)-th least significant set bit; no range check.
inline unsigned select_in_word_portable(std::uint64_t word, unsigned rank) noexcept {
    for (; rank != 0; --rank) word &= word - 1;
    return static_cast<unsigned>(std::countr_zero(word));
}

inline unsigned select_in_word_unchecked(std::uint64_t word, unsigned rank) noexcept {
#if defined(__BMI2__)
    return static_cast<unsigned>(std::countr_zero(_pdep_u64(std::uint64_t{1} << rank, word)));
#else
    return select_in_word_portable(word, rank);
#endif
}

inline unsigned select_in_word(std::uint64_t word, unsigned rank) {
    if (rank >= static_cast<unsigned>(std::popcount(word))) {
        throw Error(Errc::rank_out_of_range, "rank exceeds popcount of word", rank);
    }
    return select_in_word_unchecked(word, rank);
}

/// Appends base + position of every set bit of `words` (64 bits per word).
inline std::uint32_t* decode_bitmap(const std::uint8_t* words, std::size_t word_count,
                                    std::uint32_t base, std::uint32_t* out) noexcept {
    for (std::size_t i = 0; i < word_count; ++i) {
        std::uint64_t w = load_u64(words + 8 * i);
        std::uint32_t const word_base = base + static_cast<std::uint32_t>(64 * i);
        while (w != 0) {
            *out++ = word_base + static_cast<std::uint32_t>(std::countr_zero(w));
            w &= w - 1;
        }
    }
    return out;
}

inline std::uint32_t* decode_words(const std::uint64_t* words, std::size_t word_count,
                                   std::uint32_t base, std::uint32_t* out) noexcept {
    for (std::size_t i = 0; i < word_count; ++i) {
        std::uint64_t w = words[i];
        std::uint32_t const word_base = base + static_cast<std::uint32_t>(64 * i);
        while (w != 0) {
            *out++ = word_base + static_cast<std::uint32_t>(std::countr_zero(w));
            w &= w - 1;
        }
    }
    return out;
}

inline bool test_bit(const std::uint8_t* bitmap, unsigned pos) noexcept {
    return (bitmap[pos >> 3] >> (pos & 7)) & 1u;
}

inline std::size_t popcount_bytes(const std::uint8_t* words, std::size_t word_count) noexcept {
    std::size_t total = 0;
    for (std::size_t i = 0; i < word_count; ++i) total += std::popcount(load_u64(words + 8 * i));
    return total;
}

/// Smallest set position >= `from` in a bitmap of `word_count` words, or -1.
inline long next_set_bit(const std::uint8_t* words, std::size_t word_count, unsigned from) noexcept {
    std::size_t wi = from >> 6;
    if (wi >= word_count) return -1;
    std::uint64_t w = load_u64(words + 8 * wi) & (~std::uint64_t{0} << (from & 63));
    while (w == 0) {
        if (++wi == word_count) return -1;
        w = load_u64(words + 8 * wi);
    }
    return static_cast<long>(64 * wi + std::countr_zero(w));
}

/// Position of the (rank+1)-th set bit in a bitmap; caller guarantees it exists.
inline unsigned select_in_bitmap(const std::uint8_t* words, unsigned rank) noexcept {
    for (std::size_t wi = 0;; ++wi) {
        std::uint64_t const w = load_u64(words + 8 * wi);
        unsigned const pc = static_cast<unsigned>(std::popcount(w));
        if (rank < pc) return static_cast<unsigned>(64 * wi) + select_in_word_unchecked(w, rank);
        rank -= pc;
    }
}

}  // namespace bits
}  // namespace slicing
