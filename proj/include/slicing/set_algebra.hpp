#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "error.hpp"

namespace slicing {

/// Forward iterator over the values of one list. A fresh cursor sits before
/// the first value: `next()` yields the first element, then each following
/// one. `next_geq(x)` moves to the smallest value >= x that is not behind the
/// cursor. Both return nullopt once the list is exhausted.
template <class C>
concept ValueCursor = requires(C c, std::uint32_t x) {
    { c.next() } -> std::same_as<std::optional<std::uint32_t>>;
    { c.next_geq(x) } -> std::same_as<std::optional<std::uint32_t>>;
    { c.current() } -> std::convertible_to<std::uint32_t>;
};

/// Iterator over the non-empty universe-aligned partitions of a list, in
/// increasing id order. `advance(id)` stops at the first partition whose id
/// is >= id.
template <class C>
concept PartitionCursor = requires(C c, const C cc, std::uint32_t id) {
    { cc.id() } -> std::convertible_to<std::uint32_t>;
    { cc.cardinality() } -> std::convertible_to<std::size_t>;
    { cc.at_end() } -> std::convertible_to<bool>;
    cc.payload();
    c.next();
    c.advance(id);
};

/// Candidate-driven intersection over two value cursors. The candidate is
/// probed in the other list with next_geq; on a mismatch the returned value
/// becomes the new candidate and the roles rotate, on a match it is emitted
/// and the shorter list supplies the next candidate.
template <ValueCursor Shorter, ValueCursor Longer>
std::size_t intersect_by_candidate(Shorter& shorter, Longer& longer, std::span<std::uint32_t> out) {
    std::size_t size = 0;
    std::optional<std::uint32_t> candidate = shorter.next();
    int k = 1;  // 0 probes the shorter list, 1 the longer one
    while (candidate) {
        for (; k < 2; ++k) {
            std::optional<std::uint32_t> const z = k == 0 ? shorter.next_geq(*candidate) : longer.next_geq(*candidate);
            if (z != candidate) {
                candidate = z;
                k = 0;
                break;
            }
        }
        if (!candidate) break;
        if (k == 2) {
            if (size == out.size()) throw Error(Errc::buffer_too_small, "intersection output is full");
            out[size++] = *candidate;
            candidate = shorter.next();
            k = 1;
        }
    }
    return size;
}

/// Partition-matching intersection: walks both partition lists, and for
/// every id present in both calls `kernel(l.payload(), r.payload(), out)`,
/// which must return the number of values it wrote.
template <PartitionCursor L, PartitionCursor R, class Kernel>
std::size_t intersect_by_partition(L l, R r, Kernel&& kernel, std::span<std::uint32_t> out) {
    std::size_t size = 0;
    while (!l.at_end() && !r.at_end()) {
        auto const id_l = static_cast<std::uint32_t>(l.id());
        auto const id_r = static_cast<std::uint32_t>(r.id());
        if (id_l == id_r) {
            if (out.size() - size < std::min<std::size_t>(l.cardinality(), r.cardinality())) {
                throw Error(Errc::buffer_too_small, "intersection output is full");
            }
            size += kernel(l.payload(), r.payload(), out.data() + size);
            l.next();
            r.next();
        } else if (id_l < id_r) {
            l.advance(id_r);
        } else {
            r.advance(id_l);
        }
    }
    return size;
}

/// Same walk as intersect_by_partition, but every partition contributes:
/// shared ids go through `both(l, r, out)`, the others through `only(p, out)`.
template <PartitionCursor L, PartitionCursor R, class Both, class Only>
std::uint32_t* merge_by_partition(L l, R r, Both&& both, Only&& only, std::uint32_t* out) {
    while (!l.at_end() && !r.at_end()) {
        auto const id_l = static_cast<std::uint32_t>(l.id());
        auto const id_r = static_cast<std::uint32_t>(r.id());
        if (id_l == id_r) {
            out = both(l.payload(), r.payload(), out);
            l.next();
            r.next();
        } else if (id_l < id_r) {
            out = only(l.payload(), out);
            l.next();
        } else {
            out = only(r.payload(), out);
            r.next();
        }
    }
    for (; !l.at_end(); l.next()) out = only(l.payload(), out);
    for (; !r.at_end(); r.next()) out = only(r.payload(), out);
    return out;
}

/// Two-cursor merge without duplicates over next().
template <ValueCursor A, ValueCursor B>
std::size_t union_by_cursor(A& a, B& b, std::span<std::uint32_t> out) {
    std::size_t size = 0;
    auto emit = [&](std::uint32_t v) {
        if (size == out.size()) throw Error(Errc::buffer_too_small, "union output is full");
        out[size++] = v;
    };
    std::optional<std::uint32_t> x = a.next(), y = b.next();
    while (x && y) {
        if (*x < *y) {
            emit(*x);
            x = a.next();
        } else if (*y < *x) {
            emit(*y);
            y = b.next();
        } else {
            emit(*x);
            x = a.next();
            y = b.next();
        }
    }
    for (; x; x = a.next()) emit(*x);
    for (; y; y = b.next()) emit(*y);
    return size;
}

}  // namespace slicing
