#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <memory>
#include <span>

#if defined(__SSE4_2__)
#include <nmmintrin.h>
#include <smmintrin.h>
#include <tmmintrin.h>
#endif

#include "error.hpp"

namespace slicing {

/// Scalar two-pointer intersection of two sorted byte arrays; writes
/// base + v for every common v.
inline std::size_t small_intersect_scalar(const std::uint8_t* l, std::size_t cl, const std::uint8_t* r,
                                          std::size_t cr, std::uint32_t base, std::uint32_t* out) noexcept {
    std::size_t i = 0, j = 0, size = 0;
    while (i < cl && j < cr) {
        if (l[i] < r[j]) {
            ++i;
        } else if (l[i] > r[j]) {
            ++j;
        } else {
            out[size++] = base + l[i];
            ++i;
            ++j;
        }
    }
    return size;
}

#if defined(__SSE4_2__)

inline constexpr bool kHasSimdSmallIntersect = true;

namespace detail {

/// For every 16-bit match mask, the shuffle that packs the matching byte
/// lanes to the front of the register (unused lanes zeroed).
struct alignas(16) ShuffleMask {
    std::uint8_t lanes[16];
};

inline const ShuffleMask* shuffle_table() {
    static const std::unique_ptr<ShuffleMask[]> table = [] {
        auto t = std::make_unique<ShuffleMask[]>(1u << 16);
        for (unsigned mask = 0; mask < (1u << 16); ++mask) {
            std::memset(t[mask].lanes, 0x80, 16);
            unsigned k = 0;
            for (unsigned b = 0; b < 16; ++b) {
                if (mask & (1u << b)) t[mask].lanes[k++] = static_cast<std::uint8_t>(b);
            }
        }
        return t;
    }();
    return table.get();
}

/// One all-versus-all comparison of up to 16 bytes of each side. Matches are
/// reported in the order of the `r` lanes.
inline std::size_t compare_16x16(const std::uint8_t* l, int cl, const std::uint8_t* r, int cr,
                                 std::uint32_t base, std::uint32_t* out) noexcept {
    __m128i const vl = _mm_load_si128(reinterpret_cast<const __m128i*>(l));
    __m128i const vr = _mm_load_si128(reinterpret_cast<const __m128i*>(r));
    __m128i const res =
        _mm_cmpestrm(vl, cl, vr, cr, _SIDD_UBYTE_OPS | _SIDD_CMP_EQUAL_ANY | _SIDD_BIT_MASK);
    unsigned const mask = static_cast<unsigned>(_mm_cvtsi128_si32(res)) & 0xFFFFu;
    if (mask == 0) return 0;
    unsigned const matched = static_cast<unsigned>(std::popcount(mask));
    __m128i p = _mm_shuffle_epi8(vr, _mm_load_si128(reinterpret_cast<const __m128i*>(shuffle_table()[mask].lanes)));
    __m128i const base_v = _mm_set1_epi32(static_cast<int>(base));
    alignas(16) std::uint32_t widened[16];
    for (unsigned g = 0; g < matched; g += 4) {
        _mm_store_si128(reinterpret_cast<__m128i*>(widened + g), _mm_add_epi32(base_v, _mm_cvtepu8_epi32(p)));
        p = _mm_srli_si128(p, 4);
    }
    std::memcpy(out, widened, matched * sizeof(std::uint32_t));
    return matched;
}

}  // namespace detail

/// Vectorized intersection for arrays of at most 32 bytes where at least one
/// side has at most 16; falls back to the scalar kernel otherwise.
inline std::size_t small_intersect_simd(const std::uint8_t* l, std::size_t cl, const std::uint8_t* r,
                                        std::size_t cr, std::uint32_t base, std::uint32_t* out) noexcept {
    if (cl > 32 || cr > 32 || (cl > 16 && cr > 16)) return small_intersect_scalar(l, cl, r, cr, base, out);
    if (cl == 0 || cr == 0) return 0;
    alignas(16) std::uint8_t lb[32] = {};
    alignas(16) std::uint8_t rb[32] = {};
    std::memcpy(lb, l, cl);
    std::memcpy(rb, r, cr);
    int const il = static_cast<int>(cl), ir = static_cast<int>(cr);
    if (cl <= 16 && cr <= 16) return detail::compare_16x16(lb, il, rb, ir, base, out);
    std::size_t size = 0;
    if (cr > 16) {
        size = detail::compare_16x16(lb, il, rb, 16, base, out);
        return size + detail::compare_16x16(lb, il, rb + 16, ir - 16, base, out + size);
    }
    size = detail::compare_16x16(lb, 16, rb, ir, base, out);
    return size + detail::compare_16x16(lb + 16, il - 16, rb, ir, base, out + size);
}

#else

inline constexpr bool kHasSimdSmallIntersect = false;

#endif

/// Kernel used by the block-level intersection.
inline std::size_t small_intersect(const std::uint8_t* l, std::size_t cl, const std::uint8_t* r, std::size_t cr,
                                   std::uint32_t base, std::uint32_t* out) noexcept {
#if defined(__SSE4_2__)
    return small_intersect_simd(l, cl, r, cr, base, out);
#else
    return small_intersect_scalar(l, cl, r, cr, base, out);
#endif
}

/// Checked entry point: `out` must hold min(|l|, |r|) values.
inline std::size_t small_array_intersect(std::span<const std::uint8_t> l, std::span<const std::uint8_t> r,
                                         std::uint32_t base, std::span<std::uint32_t> out) {
    if (out.size() < std::min(l.size(), r.size())) {
        throw Error(Errc::buffer_too_small, "output must hold min(|l|, |r|) values");
    }
    return small_intersect(l.data(), l.size(), r.data(), r.size(), base, out.data());
}

}  // namespace slicing
