#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bits.hpp"
#include "error.hpp"
#include "sequence.hpp"
#include "set_algebra.hpp"

namespace slicing {

inline constexpr std::uint32_t kPartitionSize = 128;

// Readers fetch 64-bit windows up to 9 bytes past the last payload byte.
inline constexpr std::size_t kEfPadding = 16;

/// floor(log2(universe / count)), clamped to 0 when universe < 2 * count.
constexpr unsigned ef_low_bits(std::uint64_t universe, std::uint64_t count) noexcept {
    if (universe < 2 * count) return 0;
    return static_cast<unsigned>(std::bit_width(universe / count)) - 1;
}

constexpr std::uint64_t ef_high_bits(std::uint64_t universe, std::uint64_t count, unsigned low_bits) noexcept {
    return count + ((universe + (std::uint64_t{1} << low_bits) - 1) >> low_bits);
}

/// count * phi + count + ceil(universe / 2^phi).
constexpr std::uint64_t ef_bit_size(std::uint64_t universe, std::uint64_t count) noexcept {
    unsigned const phi = ef_low_bits(universe, count);
    return count * phi + ef_high_bits(universe, count, phi);
}

/// Read-only view of one Elias-Fano coded partition: `size` low parts of
/// `low_bits` bits each, followed by the unary-coded high parts.
struct EfPartitionView {
    const std::uint8_t* data = nullptr;
    std::uint32_t size = 0;
    std::uint32_t universe = 0;
    unsigned low_bits = 0;

    std::uint64_t high_offset() const noexcept { return std::uint64_t{size} * low_bits; }
    std::uint64_t high_length() const noexcept { return ef_high_bits(universe, size, low_bits); }
    std::uint64_t bit_size() const noexcept { return high_offset() + high_length(); }
    std::size_t word_count() const noexcept { return static_cast<std::size_t>((high_length() + 63) / 64); }

    std::uint32_t low(std::uint32_t i) const noexcept {
        if (low_bits == 0) return 0;
        std::uint64_t const pos = std::uint64_t{i} * low_bits;
        std::uint64_t const w = bits::load_u64(data + pos / 8) >> (pos % 8);
        return static_cast<std::uint32_t>(w & ((std::uint64_t{1} << low_bits) - 1));
    }

    /// Bits [64k, 64k + 64) of the high part, zero beyond its end.
    std::uint64_t high_word(std::size_t k) const noexcept {
        std::uint64_t const pos = high_offset() + 64 * std::uint64_t{k};
        const std::uint8_t* p = data + pos / 8;
        unsigned const shift = pos % 8;
        std::uint64_t w = bits::load_u64(p) >> shift;
        if (shift != 0) w |= std::uint64_t{p[8]} << (64 - shift);
        std::uint64_t const remaining = high_length() - 64 * std::uint64_t{k};
        if (remaining < 64) w &= (std::uint64_t{1} << remaining) - 1;
        return w;
    }

    std::uint32_t value(std::uint64_t high_pos, std::uint32_t rank) const noexcept {
        return static_cast<std::uint32_t>(((high_pos - rank) << low_bits) | low(rank));
    }

    std::uint32_t* decode(std::uint32_t base, std::uint32_t* out) const noexcept {
        std::uint32_t rank = 0;
        std::size_t const words = word_count();
        for (std::size_t k = 0; k < words; ++k) {
            std::uint64_t w = high_word(k);
            while (w != 0) {
                std::uint64_t const pos = 64 * k + static_cast<unsigned>(std::countr_zero(w));
                out[rank] = base + value(pos, rank);
                ++rank;
                w &= w - 1;
            }
        }
        return out + rank;
    }

    /// Position in the high part of the (rank+1)-th one.
    std::uint64_t select1(std::uint32_t rank) const noexcept {
        for (std::size_t k = 0;; ++k) {
            std::uint64_t const w = high_word(k);
            unsigned const pc = static_cast<unsigned>(std::popcount(w));
            if (rank < pc) return 64 * k + bits::select_in_word_unchecked(w, rank);
            rank -= pc;
        }
    }

    /// Position in the high part of the (rank+1)-th zero.
    std::uint64_t select0(std::uint64_t rank) const noexcept {
        std::uint64_t const length = high_length();
        for (std::size_t k = 0;; ++k) {
            std::uint64_t w = ~high_word(k);
            std::uint64_t const remaining = length - 64 * k;
            if (remaining < 64) w &= (std::uint64_t{1} << remaining) - 1;
            unsigned const pc = static_cast<unsigned>(std::popcount(w));
            if (rank < pc) return 64 * k + bits::select_in_word_unchecked(w, static_cast<unsigned>(rank));
            rank -= pc;
        }
    }

    std::uint32_t access(std::uint32_t rank) const noexcept { return value(select1(rank), rank); }

    struct Hit {
        std::uint32_t rank;
        std::uint64_t high_pos;
        std::uint32_t value;
    };

    /// First element >= x (relative); requires x <= universe.
    Hit next_geq(std::uint32_t x) const noexcept {
        std::uint64_t const bucket = std::uint64_t{x} >> low_bits;
        std::uint64_t pos = 0;
        std::uint32_t rank = 0;
        if (bucket != 0) {
            pos = select0(bucket - 1) + 1;
            rank = static_cast<std::uint32_t>(pos - bucket);
        }
        std::size_t k = static_cast<std::size_t>(pos / 64);
        std::uint64_t w = high_word(k) & (~std::uint64_t{0} << (pos % 64));
        for (;;) {
            while (w == 0) w = high_word(++k);
            std::uint64_t const p = 64 * k + static_cast<unsigned>(std::countr_zero(w));
            std::uint32_t const v = value(p, rank);
            if (v >= x) return {rank, p, v};
            ++rank;
            w &= w - 1;
        }
    }

    /// Position of the first one strictly after `pos`; caller guarantees one exists.
    std::uint64_t next_one(std::uint64_t pos) const noexcept {
        ++pos;
        std::size_t k = static_cast<std::size_t>(pos / 64);
        std::uint64_t w = high_word(k) & (~std::uint64_t{0} << (pos % 64));
        while (w == 0) w = high_word(++k);
        return 64 * k + static_cast<unsigned>(std::countr_zero(w));
    }
};

namespace detail {

/// Appends the Elias-Fano code of `relative` (strictly increasing, last
/// element == universe) padded to whole bytes.
inline void ef_append(std::vector<std::uint8_t>& out, std::span<const std::uint32_t> relative, std::uint32_t universe) {
    auto const count = static_cast<std::uint32_t>(relative.size());
    unsigned const phi = ef_low_bits(universe, count);
    std::uint64_t const bits_total = ef_bit_size(universe, count);
    std::size_t const bytes = static_cast<std::size_t>((bits_total + 7) / 8);
    std::size_t const at = out.size();
    out.resize(at + bytes + 8, 0);
    std::uint8_t* base = out.data() + at;
    std::uint64_t const high_offset = std::uint64_t{count} * phi;
    std::uint64_t const low_mask = (std::uint64_t{1} << phi) - 1;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint64_t const v = relative[i];
        if (phi != 0) {
            std::uint64_t const pos = std::uint64_t{i} * phi;
            std::uint8_t* p = base + pos / 8;
            bits::store_u64(p, bits::load_u64(p) | ((v & low_mask) << (pos % 8)));
        }
        std::uint64_t const hp = high_offset + (v >> phi) + i;
        base[hp / 8] |= static_cast<std::uint8_t>(1u << (hp % 8));
    }
    out.resize(at + bytes);
}

}  // namespace detail

/// Owning single-partition Elias-Fano code.
struct EfPartition {
    std::uint32_t size = 0;
    std::uint32_t universe = 0;
    unsigned low_bits = 0;
    std::vector<std::uint8_t> bytes;  // byte_size() payload bytes + padding

    std::uint64_t bit_size() const noexcept { return view().bit_size(); }
    std::size_t byte_size() const noexcept { return static_cast<std::size_t>((bit_size() + 7) / 8); }
    EfPartitionView view() const noexcept { return {bytes.data(), size, universe, low_bits}; }
};

inline EfPartition ef_encode_partition(std::span<const std::uint32_t> relative, std::uint32_t universe) {
    if (relative.empty() || relative.back() != universe) {
        throw std::invalid_argument("partition must be non-empty and end at its universe");
    }
    for (std::size_t i = 1; i < relative.size(); ++i) {
        if (relative[i] <= relative[i - 1]) throw std::invalid_argument("partition must be strictly increasing");
    }
    EfPartition p;
    p.size = static_cast<std::uint32_t>(relative.size());
    p.universe = universe;
    p.low_bits = ef_low_bits(universe, p.size);
    detail::ef_append(p.bytes, relative, universe);
    p.bytes.resize(p.bytes.size() + kEfPadding, 0);
    return p;
}

inline std::vector<std::uint32_t> ef_decode_partition(const EfPartition& p) {
    std::vector<std::uint32_t> out(p.size);
    p.view().decode(0, out.data());
    return out;
}

/// Sorted list split into consecutive 128-integer partitions, each coded
/// with Elias-Fano relative to the previous partition's maximum + 1. The
/// partition maxima double as skip pointers.
class PcEfList {
public:
    class Cursor;

    PcEfList() = default;

    static PcEfList build(const SortedSequence& seq) {
        auto const values = seq.values();
        if (values.size() > UINT32_MAX) throw std::length_error("list too long for 32-bit size field");
        PcEfList list;
        list.size_ = values.size();
        list.universe_ = seq.universe();
        std::vector<std::uint32_t> relative;
        relative.reserve(kPartitionSize);
        for (std::size_t begin = 0; begin < values.size(); begin += kPartitionSize) {
            std::size_t const end = std::min(values.size(), begin + kPartitionSize);
            std::uint32_t const base = begin == 0 ? 0 : values[begin - 1] + 1;
            relative.clear();
            for (std::size_t i = begin; i < end; ++i) relative.push_back(values[i] - base);
            list.skips_.push_back(values[end - 1]);
            list.offsets_.push_back(static_cast<std::uint32_t>(list.payload_.size()));
            detail::ef_append(list.payload_, relative, relative.back());
        }
        list.payload_bytes_ = list.payload_.size();
        list.payload_.resize(list.payload_bytes_ + kEfPadding, 0);
        return list;
    }

    /// Layout: [n:32][partitions:32][skip pointers][offsets][payloads].
    std::vector<std::uint8_t> serialize() const {
        std::vector<std::uint8_t> out;
        out.reserve(8 + size_bytes());
        bits::put_u32(out, static_cast<std::uint32_t>(size_));
        bits::put_u32(out, static_cast<std::uint32_t>(skips_.size()));
        for (auto s : skips_) bits::put_u32(out, s);
        for (auto o : offsets_) bits::put_u32(out, o);
        out.insert(out.end(), payload_.begin(), payload_.begin() + static_cast<std::ptrdiff_t>(payload_bytes_));
        return out;
    }

    static PcEfList deserialize(std::span<const std::uint8_t> bytes) {
        auto fail = [](const char* why) { throw Error(Errc::malformed_buffer, why); };
        if (bytes.size() < 8) fail("truncated list header");
        std::uint32_t const n = bits::load_u32(bytes.data());
        std::uint32_t const parts = bits::load_u32(bytes.data() + 4);
        if (n == 0) fail("empty list");
        if (parts != (std::uint64_t{n} + kPartitionSize - 1) / kPartitionSize) fail("partition count mismatch");
        std::size_t const table_end = 8 + 8 * std::size_t{parts};
        if (bytes.size() < table_end) fail("truncated skip pointers");
        PcEfList list;
        list.size_ = n;
        list.skips_.resize(parts);
        list.offsets_.resize(parts);
        for (std::uint32_t p = 0; p < parts; ++p) {
            list.skips_[p] = bits::load_u32(bytes.data() + 8 + 4 * std::size_t{p});
            list.offsets_[p] = bits::load_u32(bytes.data() + 8 + 4 * std::size_t{parts} + 4 * std::size_t{p});
            if (p > 0 && list.skips_[p] <= list.skips_[p - 1]) fail("skip pointers not strictly increasing");
        }
        list.payload_bytes_ = bytes.size() - table_end;
        list.payload_.assign(bytes.begin() + static_cast<std::ptrdiff_t>(table_end), bytes.end());
        list.payload_.resize(list.payload_bytes_ + kEfPadding, 0);
        std::size_t expected = 0;
        for (std::uint32_t p = 0; p < parts; ++p) {
            if (list.offsets_[p] != expected) fail("partition offset mismatch");
            std::uint32_t const base = list.partition_base(p);
            if (std::uint64_t{list.skips_[p]} - base + 1 < list.partition_size(p)) fail("partition universe too small");
            auto const view = list.partition(p);
            expected += static_cast<std::size_t>((view.bit_size() + 7) / 8);
            if (expected > list.payload_bytes_) fail("truncated partition payload");
            std::size_t ones = 0;
            for (std::size_t k = 0; k < view.word_count(); ++k) ones += std::popcount(view.high_word(k));
            if (ones != view.size || view.access(view.size - 1) != view.universe) fail("corrupt partition");
        }
        if (expected != list.payload_bytes_) fail("payload size mismatch");
        list.universe_ = list.skips_.back();
        return list;
    }

    std::uint64_t size() const noexcept { return size_; }
    std::uint32_t universe() const noexcept { return universe_; }
    std::size_t partition_count() const noexcept { return skips_.size(); }
    std::span<const std::uint32_t> skip_pointers() const noexcept { return skips_; }
    std::span<const std::uint32_t> partition_offsets() const noexcept { return offsets_; }
    std::size_t payload_bytes() const noexcept { return payload_bytes_; }

    /// Skip pointers + offsets + byte-rounded partition payloads.
    std::size_t size_bytes() const noexcept { return 8 * skips_.size() + payload_bytes_; }

    std::uint32_t partition_size(std::size_t p) const noexcept {
        return p + 1 < skips_.size() ? kPartitionSize
                                     : static_cast<std::uint32_t>(size_ - kPartitionSize * (skips_.size() - 1));
    }

    std::uint32_t partition_base(std::size_t p) const noexcept { return p == 0 ? 0 : skips_[p - 1] + 1; }

    EfPartitionView partition(std::size_t p) const noexcept {
        std::uint32_t const n = partition_size(p);
        std::uint32_t const u = skips_[p] - partition_base(p);
        return {payload_.data() + offsets_[p], n, u, ef_low_bits(u, n)};
    }

    std::size_t decode(std::span<std::uint32_t> out) const {
        if (out.size() < size_) throw Error(Errc::buffer_too_small, "decode output must hold n values");
        std::uint32_t* p = out.data();
        for (std::size_t k = 0; k < skips_.size(); ++k) p = partition(k).decode(partition_base(k), p);
        return static_cast<std::size_t>(p - out.data());
    }

    std::uint32_t access(std::uint64_t i) const {
        if (i >= size_) throw Error(Errc::index_out_of_bounds, "access beyond size", static_cast<std::size_t>(i));
        std::size_t const p = static_cast<std::size_t>(i / kPartitionSize);
        return partition_base(p) + partition(p).access(static_cast<std::uint32_t>(i % kPartitionSize));
    }

    std::optional<std::uint32_t> next_geq(std::uint32_t x) const noexcept {
        auto it = std::lower_bound(skips_.begin(), skips_.end(), x);
        if (it == skips_.end()) return std::nullopt;
        std::size_t const p = static_cast<std::size_t>(it - skips_.begin());
        std::uint32_t const base = partition_base(p);
        return base + partition(p).next_geq(x - base).value;
    }

    friend std::size_t intersect(const PcEfList& a, const PcEfList& b, std::span<std::uint32_t> out);
    friend std::size_t unite(const PcEfList& a, const PcEfList& b, std::span<std::uint32_t> out);

private:
    std::uint64_t size_ = 0;
    std::uint32_t universe_ = 0;
    std::vector<std::uint32_t> skips_;
    std::vector<std::uint32_t> offsets_;
    std::vector<std::uint8_t> payload_;
    std::size_t payload_bytes_ = 0;
};

/// Sequential cursor: next() walks the unary high part one element at a
/// time; next_geq() skips partitions through the skip pointers.
class PcEfList::Cursor {
public:
    explicit Cursor(const PcEfList& list) noexcept : list_(&list) {}

    std::optional<std::uint32_t> next() noexcept {
        if (done_) return std::nullopt;
        if (!started_) {
            started_ = true;
            enter(0);
            pos_ = view_.select1(0);
            rank_ = 0;
            return settle();
        }
        if (rank_ + 1 == view_.size) {
            if (partition_ + 1 == list_->skips_.size()) return finish();
            enter(partition_ + 1);
            pos_ = view_.select1(0);
            rank_ = 0;
            return settle();
        }
        pos_ = view_.next_one(pos_);
        ++rank_;
        return settle();
    }

    std::optional<std::uint32_t> next_geq(std::uint32_t x) noexcept {
        if (done_) return std::nullopt;
        if (started_ && value_ >= x) return value_;
        std::size_t p = started_ ? partition_ : 0;
        if (!started_ || x > list_->skips_[p]) {
            auto const& skips = list_->skips_;
            auto it = std::lower_bound(skips.begin() + static_cast<std::ptrdiff_t>(p), skips.end(), x);
            if (it == skips.end()) return finish();
            started_ = true;
            enter(static_cast<std::size_t>(it - skips.begin()));
        }
        auto const hit = view_.next_geq(x - base_);
        rank_ = hit.rank;
        pos_ = hit.high_pos;
        return settle();
    }

    std::uint32_t current() const noexcept { return value_; }

private:
    void enter(std::size_t p) noexcept {
        partition_ = p;
        base_ = list_->partition_base(p);
        view_ = list_->partition(p);
    }

    std::optional<std::uint32_t> settle() noexcept {
        value_ = base_ + view_.value(pos_, rank_);
        return value_;
    }

    std::optional<std::uint32_t> finish() noexcept {
        done_ = true;
        started_ = true;
        value_ = UINT32_MAX;
        return std::nullopt;
    }

    const PcEfList* list_;
    EfPartitionView view_;
    std::size_t partition_ = 0;
    std::uint32_t base_ = 0;
    std::uint32_t rank_ = 0;
    std::uint64_t pos_ = 0;
    std::uint32_t value_ = 0;
    bool started_ = false;
    bool done_ = false;
};

/// Candidate-driven intersection, the shorter list supplying candidates.
inline std::size_t intersect(const PcEfList& a, const PcEfList& b, std::span<std::uint32_t> out) {
    if (out.size() < std::min(a.size_, b.size_)) {
        throw Error(Errc::buffer_too_small, "intersection output must hold min(nA, nB) values");
    }
    PcEfList const& shorter = a.size_ <= b.size_ ? a : b;
    PcEfList const& longer = a.size_ <= b.size_ ? b : a;
    PcEfList::Cursor s(shorter), l(longer);
    return intersect_by_candidate(s, l, out);
}

inline std::size_t unite(const PcEfList& a, const PcEfList& b, std::span<std::uint32_t> out) {
    if (out.size() < a.size_ + b.size_) throw Error(Errc::buffer_too_small, "union output must hold nA + nB values");
    PcEfList::Cursor x(a), y(b);
    return union_by_cursor(x, y, out);
}

}  // namespace slicing
