#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pc_ef_list.hpp"
#include "roaring_lite.hpp"
#include "sliced_set.hpp"

namespace slicing {

enum class Repr : std::uint32_t { slicing = 1, pc_ef = 2, roaring_lite = 3 };

inline constexpr std::array<Repr, 3> kAllReprs = {Repr::slicing, Repr::pc_ef, Repr::roaring_lite};

inline std::string_view repr_name(Repr r) noexcept {
    switch (r) {
        case Repr::slicing: return "slicing";
        case Repr::pc_ef: return "pc-ef";
        case Repr::roaring_lite: return "roaring-lite";
    }
    return "unknown";
}

inline Repr parse_repr(std::string_view name) {
    for (Repr r : kAllReprs) {
        if (repr_name(r) == name) return r;
    }
    throw std::invalid_argument("unknown representation '" + std::string(name) + "'");
}

/// Uniform byte view of each representation's serialized form.
inline std::vector<std::uint8_t> serialize_bytes(const SlicedSet& s) {
    auto const b = s.serialize();
    return {b.begin(), b.end()};
}
inline std::vector<std::uint8_t> serialize_bytes(const PcEfList& s) { return s.serialize(); }
inline std::vector<std::uint8_t> serialize_bytes(const RoaringLiteSet& s) {
    auto const b = s.serialize();
    return {b.begin(), b.end()};
}

template <class T>
concept Representation = requires(const T& t, const SortedSequence& seq, std::span<std::uint32_t> out,
                                  std::span<const std::uint8_t> bytes, std::uint32_t x) {
    { T::build(seq) } -> std::same_as<T>;
    { T::deserialize(bytes) } -> std::same_as<T>;
    { t.size() } -> std::convertible_to<std::uint64_t>;
    { t.size_bytes() } -> std::convertible_to<std::size_t>;
    { t.decode(out) } -> std::convertible_to<std::size_t>;
    { t.access(std::uint64_t{0}) } -> std::same_as<std::uint32_t>;
    { t.next_geq(x) } -> std::same_as<std::optional<std::uint32_t>>;
    { intersect(t, t, out) } -> std::convertible_to<std::size_t>;
    { unite(t, t, out) } -> std::convertible_to<std::size_t>;
};

static_assert(Representation<SlicedSet>);
static_assert(Representation<PcEfList>);
static_assert(Representation<RoaringLiteSet>);

/// Calls `f.template operator()<T>()` with the concrete type behind `r`.
template <class F>
decltype(auto) visit_repr(Repr r, F&& f) {
    switch (r) {
        case Repr::slicing: return f.template operator()<SlicedSet>();
        case Repr::pc_ef: return f.template operator()<PcEfList>();
        case Repr::roaring_lite: return f.template operator()<RoaringLiteSet>();
    }
    throw std::invalid_argument("unknown representation");
}

/// Numeric rendering of an absent successor.
inline constexpr std::uint32_t kLimit = UINT32_MAX;

}  // namespace slicing
