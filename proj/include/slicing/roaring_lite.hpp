#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <vector>

#include "bits.hpp"
#include "error.hpp"
#include "sequence.hpp"
#include "set_algebra.hpp"

namespace slicing {

inline constexpr std::uint32_t kArrayContainerLimit = 4096;  // cardinality < 4096 -> array
inline constexpr std::size_t kRoaringChunkWords = 1024;
inline constexpr std::size_t kRoaringBitmapBytes = 8192;

constexpr bool is_array_container(std::uint32_t cardinality) noexcept { return cardinality < kArrayContainerLimit; }

constexpr std::size_t container_bytes(std::uint32_t cardinality) noexcept {
    return is_array_container(cardinality) ? 2 * std::size_t{cardinality} : kRoaringBitmapBytes;
}

struct ContainerView {
    std::uint32_t id;
    std::uint32_t cardinality;
    const std::uint8_t* data;

    bool is_array() const noexcept { return is_array_container(cardinality); }
    std::uint32_t base() const noexcept { return id << 16; }
    std::uint16_t at(std::uint32_t j) const noexcept { return bits::load_u16(data + 2 * std::size_t{j}); }
};

namespace detail {

inline std::uint32_t* decode_container(const ContainerView& c, std::uint32_t* out) noexcept {
    if (!c.is_array()) return bits::decode_bitmap(c.data, kRoaringChunkWords, c.base(), out);
    std::uint32_t const base = c.base();
    for (std::uint32_t j = 0; j < c.cardinality; ++j) out[j] = base + c.at(j);
    return out + c.cardinality;
}

inline std::size_t and_containers(const ContainerView& a, const ContainerView& b, std::uint32_t* out) noexcept {
    std::uint32_t const base = a.base();
    if (!a.is_array() && !b.is_array()) {
        std::uint32_t* p = out;
        for (std::size_t w = 0; w < kRoaringChunkWords; ++w) {
            std::uint64_t x = bits::load_u64(a.data + 8 * w) & bits::load_u64(b.data + 8 * w);
            while (x != 0) {
                *p++ = base + static_cast<std::uint32_t>(64 * w + std::countr_zero(x));
                x &= x - 1;
            }
        }
        return static_cast<std::size_t>(p - out);
    }
    if (a.is_array() && b.is_array()) {
        std::uint32_t i = 0, j = 0;
        std::size_t size = 0;
        while (i < a.cardinality && j < b.cardinality) {
            std::uint16_t const x = a.at(i), y = b.at(j);
            if (x < y) {
                ++i;
            } else if (y < x) {
                ++j;
            } else {
                out[size++] = base + x;
                ++i;
                ++j;
            }
        }
        return size;
    }
    ContainerView const& bitmap = a.is_array() ? b : a;
    ContainerView const& array = a.is_array() ? a : b;
    std::size_t size = 0;
    for (std::uint32_t j = 0; j < array.cardinality; ++j) {
        std::uint16_t const v = array.at(j);
        out[size] = base + v;
        size += bits::test_bit(bitmap.data, v);
    }
    return size;
}

inline std::uint32_t* or_containers(const ContainerView& a, const ContainerView& b, std::uint32_t* out) noexcept {
    std::uint32_t const base = a.base();
    if (a.is_array() && b.is_array()) {
        std::uint32_t i = 0, j = 0;
        while (i < a.cardinality && j < b.cardinality) {
            std::uint16_t const x = a.at(i), y = b.at(j);
            *out++ = base + std::min(x, y);
            i += x <= y;
            j += y <= x;
        }
        for (; i < a.cardinality; ++i) *out++ = base + a.at(i);
        for (; j < b.cardinality; ++j) *out++ = base + b.at(j);
        return out;
    }
    std::uint64_t words[kRoaringChunkWords];
    ContainerView const& bitmap = a.is_array() ? b : a;
    ContainerView const& other = a.is_array() ? a : b;
    std::memcpy(words, bitmap.data, kRoaringBitmapBytes);
    if (other.is_array()) {
        for (std::uint32_t j = 0; j < other.cardinality; ++j) {
            std::uint16_t const v = other.at(j);
            words[v >> 6] |= std::uint64_t{1} << (v & 63);
        }
    } else {
        for (std::size_t w = 0; w < kRoaringChunkWords; ++w) words[w] |= bits::load_u64(other.data + 8 * w);
    }
    return bits::decode_words(words, kRoaringChunkWords, base, out);
}

inline std::optional<std::uint32_t> container_next_geq(const ContainerView& c, std::uint32_t low) noexcept {
    if (!c.is_array()) {
        long const pos = bits::next_set_bit(c.data, kRoaringChunkWords, low);
        if (pos < 0) return std::nullopt;
        return c.base() + static_cast<std::uint32_t>(pos);
    }
    std::uint32_t lo = 0, hi = c.cardinality;
    while (lo < hi) {
        std::uint32_t const mid = lo + (hi - lo) / 2;
        if (c.at(mid) < low) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (lo == c.cardinality) return std::nullopt;
    return c.base() + c.at(lo);
}

}  // namespace detail

/// Universe partitioned into 2^16-wide chunks, each stored as a sorted
/// 16-bit array (fewer than 4096 values) or a 2^16-bit bitmap.
///
/// Serialized: [chunks-1:16][per chunk: id:16, cardinality-1:16][payloads].
class RoaringLiteSet {
public:
    class ChunkCursor {
    public:
        ChunkCursor(const RoaringLiteSet& set, std::uint32_t index) noexcept : set_(&set), index_(index) {}

        std::uint32_t id() const noexcept { return set_->ids_[index_]; }
        std::uint32_t cardinality() const noexcept { return set_->cards_[index_]; }
        bool at_end() const noexcept { return index_ == set_->ids_.size(); }
        ContainerView payload() const noexcept { return set_->container(index_); }
        void next() noexcept { ++index_; }
        void advance(std::uint32_t target) noexcept {
            while (!at_end() && id() < target) ++index_;
        }

    private:
        const RoaringLiteSet* set_;
        std::uint32_t index_;
    };

    RoaringLiteSet() = default;

    static RoaringLiteSet build(const SortedSequence& seq) {
        auto const values = seq.values();
        RoaringLiteSet set;
        set.universe_ = seq.universe();
        set.size_ = values.size();
        std::vector<std::uint8_t> payload;
        for (std::size_t begin = 0; begin < values.size();) {
            std::uint32_t const id = values[begin] >> 16;
            std::size_t end = begin;
            while (end < values.size() && (values[end] >> 16) == id) ++end;
            auto const card = static_cast<std::uint32_t>(end - begin);
            set.ids_.push_back(static_cast<std::uint16_t>(id));
            set.cards_.push_back(card);
            if (is_array_container(card)) {
                for (std::size_t i = begin; i < end; ++i) bits::put_u16(payload, static_cast<std::uint16_t>(values[i]));
            } else {
                std::size_t const at = payload.size();
                payload.resize(at + kRoaringBitmapBytes, 0);
                for (std::size_t i = begin; i < end; ++i) {
                    std::uint32_t const low = values[i] & 0xFFFF;
                    payload[at + (low >> 3)] |= static_cast<std::uint8_t>(1u << (low & 7));
                }
            }
            begin = end;
        }
        set.assemble(payload);
        return set;
    }

    static RoaringLiteSet deserialize(std::span<const std::uint8_t> bytes) {
        auto fail = [](const char* why) { throw Error(Errc::malformed_buffer, why); };
        if (bytes.size() < 2) fail("missing chunk count");
        std::size_t const m = std::size_t{bits::load_u16(bytes.data())} + 1;
        std::size_t const payload_start = 2 + 4 * m;
        if (bytes.size() < payload_start) fail("truncated chunk headers");
        RoaringLiteSet set;
        std::size_t offset = payload_start;
        for (std::size_t k = 0; k < m; ++k) {
            std::uint16_t const id = bits::load_u16(bytes.data() + 2 + 4 * k);
            std::uint32_t const card = std::uint32_t{bits::load_u16(bytes.data() + 4 + 4 * k)} + 1;
            if (k > 0 && id <= set.ids_.back()) fail("chunk ids not strictly increasing");
            std::size_t const length = container_bytes(card);
            if (offset + length > bytes.size()) fail("truncated container");
            const std::uint8_t* data = bytes.data() + offset;
            if (is_array_container(card)) {
                for (std::uint32_t j = 1; j < card; ++j) {
                    if (bits::load_u16(data + 2 * j) <= bits::load_u16(data + 2 * (j - 1))) fail("array container not sorted");
                }
            } else if (bits::popcount_bytes(data, kRoaringChunkWords) != card) {
                fail("bitmap container popcount mismatch");
            }
            set.ids_.push_back(id);
            set.cards_.push_back(card);
            set.size_ += card;
            offset += length;
        }
        if (offset != bytes.size()) fail("payload size does not match chunk headers");
        set.bytes_.assign(bytes.begin(), bytes.end());
        set.index_offsets();
        auto const last = set.container(static_cast<std::uint32_t>(m - 1));
        set.universe_ = last.is_array() ? last.base() + last.at(last.cardinality - 1)
                                        : last.base() + static_cast<std::uint32_t>(
                                                            bits::select_in_bitmap(last.data, last.cardinality - 1));
        return set;
    }

    std::span<const std::uint8_t> serialize() const noexcept { return bytes_; }
    std::size_t size_bytes() const noexcept { return bytes_.size(); }
    std::uint64_t size() const noexcept { return size_; }
    std::uint32_t universe() const noexcept { return universe_; }
    std::uint32_t chunk_count() const noexcept { return static_cast<std::uint32_t>(ids_.size()); }

    ContainerView container(std::uint32_t k) const noexcept { return {ids_[k], cards_[k], bytes_.data() + offsets_[k]}; }
    ChunkCursor chunks() const noexcept { return {*this, 0}; }

    std::size_t decode(std::span<std::uint32_t> out) const {
        if (out.size() < size_) throw Error(Errc::buffer_too_small, "decode output must hold n values");
        std::uint32_t* p = out.data();
        for (std::uint32_t k = 0; k < ids_.size(); ++k) p = detail::decode_container(container(k), p);
        return static_cast<std::size_t>(p - out.data());
    }

    /// Scans the chunk cardinalities to find the container holding i.
    std::uint32_t access(std::uint64_t i) const {
        if (i >= size_) throw Error(Errc::index_out_of_bounds, "access beyond size", static_cast<std::size_t>(i));
        std::uint32_t k = 0;
        while (i >= cards_[k]) i -= cards_[k++];
        auto const c = container(k);
        auto const rank = static_cast<std::uint32_t>(i);
        return c.base() + (c.is_array() ? c.at(rank) : bits::select_in_bitmap(c.data, rank));
    }

    std::optional<std::uint32_t> next_geq(std::uint32_t x) const noexcept {
        auto const target = static_cast<std::uint16_t>(x >> 16);
        auto it = std::lower_bound(ids_.begin(), ids_.end(), target);
        if (it == ids_.end()) return std::nullopt;
        auto k = static_cast<std::uint32_t>(it - ids_.begin());
        if (*it == target) {
            if (auto hit = detail::container_next_geq(container(k), x & 0xFFFF)) return hit;
            if (++k == ids_.size()) return std::nullopt;
        }
        return detail::container_next_geq(container(k), 0);
    }

    friend std::size_t intersect(const RoaringLiteSet& a, const RoaringLiteSet& b, std::span<std::uint32_t> out) {
        if (out.size() < std::min(a.size_, b.size_)) {
            throw Error(Errc::buffer_too_small, "intersection output must hold min(nA, nB) values");
        }
        return intersect_by_partition(a.chunks(), b.chunks(), detail::and_containers, out);
    }

    friend std::size_t unite(const RoaringLiteSet& a, const RoaringLiteSet& b, std::span<std::uint32_t> out) {
        if (out.size() < a.size_ + b.size_) throw Error(Errc::buffer_too_small, "union output must hold nA + nB values");
        std::uint32_t* end = merge_by_partition(a.chunks(), b.chunks(), detail::or_containers,
                                                detail::decode_container, out.data());
        return static_cast<std::size_t>(end - out.data());
    }

    friend bool operator==(const RoaringLiteSet& a, const RoaringLiteSet& b) noexcept { return a.bytes_ == b.bytes_; }

private:
    void assemble(const std::vector<std::uint8_t>& payload) {
        bytes_.clear();
        bits::put_u16(bytes_, static_cast<std::uint16_t>(ids_.size() - 1));
        for (std::size_t k = 0; k < ids_.size(); ++k) {
            bits::put_u16(bytes_, ids_[k]);
            bits::put_u16(bytes_, static_cast<std::uint16_t>(cards_[k] - 1));
        }
        bytes_.insert(bytes_.end(), payload.begin(), payload.end());
        index_offsets();
    }

    void index_offsets() {
        offsets_.resize(ids_.size());
        std::size_t offset = 2 + 4 * ids_.size();
        for (std::size_t k = 0; k < ids_.size(); ++k) {
            offsets_[k] = offset;
            offset += container_bytes(cards_[k]);
        }
    }

    std::vector<std::uint8_t> bytes_;
    std::vector<std::uint16_t> ids_;
    std::vector<std::uint32_t> cards_;
    std::vector<std::size_t> offsets_;
    std::uint64_t size_ = 0;
    std::uint32_t universe_ = 0;
};

}  // namespace slicing
