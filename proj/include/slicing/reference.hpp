#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "error.hpp"

/// Plain-array ground truth for every representation.
namespace slicing::reference {

inline std::vector<std::uint32_t> decode(std::span<const std::uint32_t> values) {
    return {values.begin(), values.end()};
}

inline std::uint32_t access(std::span<const std::uint32_t> values, std::size_t i) {
    if (i >= values.size()) throw Error(Errc::index_out_of_bounds, "oracle access beyond size", i);
    return values[i];
}

inline std::optional<std::uint32_t> next_geq(std::span<const std::uint32_t> values, std::uint32_t x) {
    std::size_t lo = 0, hi = values.size();
    while (lo < hi) {
        std::size_t const mid = lo + (hi - lo) / 2;
        if (values[mid] < x) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (lo == values.size()) return std::nullopt;
    return values[lo];
}

inline std::vector<std::uint32_t> intersect(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    std::vector<std::uint32_t> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            out.push_back(a[i]);
            ++i;
            ++j;
        }
    }
    return out;
}

inline std::vector<std::uint32_t> unite(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    std::vector<std::uint32_t> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            out.push_back(a[i++]);
        } else if (b[j] < a[i]) {
            out.push_back(b[j++]);
        } else {
            out.push_back(a[i]);
            ++i;
            ++j;
        }
    }
    out.insert(out.end(), a.begin() + static_cast<std::ptrdiff_t>(i), a.end());
    out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(j), b.end());
    return out;
}

}  // namespace slicing::reference
