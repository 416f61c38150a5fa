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
#include "small_array.hpp"

namespace slicing {

// Two-level universe slicing: 2^16-wide chunks at the root, 2^8-wide blocks
// inside sparse chunks.
inline constexpr std::uint32_t kChunkSpan = 1u << 16;
inline constexpr std::uint32_t kBlockSpan = 1u << 8;
inline constexpr std::size_t kChunkWords = kChunkSpan / 64;
inline constexpr std::size_t kDenseChunkBytes = kChunkSpan / 8;
inline constexpr std::size_t kBlockWords = kBlockSpan / 64;
inline constexpr std::size_t kDenseBlockBytes = kBlockSpan / 8;
inline constexpr std::uint32_t kSparseBlockLimit = kBlockSpan / 8 - 1;  // c < 31 -> byte array
inline constexpr std::size_t kChunkHeaderBytes = 8;
inline constexpr std::size_t kBlockHeaderBytes = 2;
inline constexpr std::size_t kRankSampling = 32;
inline constexpr std::uint32_t kDirectLookupMin = 1024;
inline constexpr std::uint32_t kDirectLookupRatio = 16;

enum class ChunkType : std::uint8_t { full = 1, dense = 2, sparse = 3 };

/// One H1 entry. On the wire: id:16 | cardinality-1:16 | encoded bytes:16 |
/// type:8 | block count-1:8 (zero unless sparse), little-endian.
struct ChunkHeader {
    std::uint16_t id = 0;
    std::uint32_t cardinality = 0;
    std::uint16_t encoded_bytes = 0;
    ChunkType type = ChunkType::full;
    std::uint32_t block_count = 0;

    static ChunkHeader read(const std::uint8_t* p) noexcept {
        ChunkHeader h;
        h.id = bits::load_u16(p);
        h.cardinality = std::uint32_t{bits::load_u16(p + 2)} + 1;
        h.encoded_bytes = bits::load_u16(p + 4);
        h.type = static_cast<ChunkType>(p[6]);
        h.block_count = h.type == ChunkType::sparse ? std::uint32_t{p[7]} + 1 : 0;
        return h;
    }

    void append_to(std::vector<std::uint8_t>& out) const {
        bits::put_u16(out, id);
        bits::put_u16(out, static_cast<std::uint16_t>(cardinality - 1));
        bits::put_u16(out, encoded_bytes);
        out.push_back(static_cast<std::uint8_t>(type));
        out.push_back(type == ChunkType::sparse ? static_cast<std::uint8_t>(block_count - 1) : 0);
    }
};

constexpr std::size_t block_payload_bytes(std::uint32_t cardinality) noexcept {
    return cardinality < kSparseBlockLimit ? cardinality : kDenseBlockBytes;
}

struct BlockView {
    std::uint32_t id;
    std::uint32_t cardinality;
    const std::uint8_t* data;

    bool dense() const noexcept { return cardinality >= kSparseBlockLimit; }
};

/// Walks the H2 array of a sparse chunk.
class BlockCursor {
public:
    BlockCursor(const std::uint8_t* chunk_payload, std::uint32_t block_count) noexcept
        : headers_(chunk_payload),
          data_(chunk_payload + kBlockHeaderBytes * block_count),
          count_(block_count) {}

    std::uint32_t id() const noexcept { return headers_[2 * index_]; }
    std::uint32_t cardinality() const noexcept { return std::uint32_t{headers_[2 * index_ + 1]} + 1; }
    bool at_end() const noexcept { return index_ == count_; }
    BlockView payload() const noexcept { return {id(), cardinality(), data_}; }

    void next() noexcept {
        data_ += block_payload_bytes(cardinality());
        ++index_;
    }

    void advance(std::uint32_t target) noexcept {
        while (!at_end() && id() < target) next();
    }

private:
    const std::uint8_t* headers_;
    const std::uint8_t* data_;
    std::uint32_t count_;
    std::uint32_t index_ = 0;
};

struct ChunkView {
    ChunkHeader header;
    const std::uint8_t* data;

    std::uint32_t base() const noexcept { return std::uint32_t{header.id} << 16; }
    BlockCursor blocks() const noexcept { return {data, header.block_count}; }
};

/// Walks the H1 array, tracking the payload offset of the current chunk.
class ChunkCursor {
public:
    ChunkCursor(const std::uint8_t* buffer, std::uint32_t chunk_count, std::uint32_t index,
                std::size_t payload_offset) noexcept
        : buffer_(buffer), count_(chunk_count), index_(index), offset_(payload_offset) {
        load();
    }

    std::uint32_t id() const noexcept { return header_.id; }
    std::uint32_t cardinality() const noexcept { return header_.cardinality; }
    bool at_end() const noexcept { return index_ == count_; }
    ChunkView payload() const noexcept { return {header_, buffer_ + offset_}; }
    std::uint32_t index() const noexcept { return index_; }

    void next() noexcept {
        offset_ += header_.encoded_bytes;
        ++index_;
        load();
    }

    void advance(std::uint32_t target) noexcept {
        while (!at_end() && id() < target) next();
    }

private:
    void load() noexcept {
        if (index_ < count_) header_ = ChunkHeader::read(buffer_ + 2 + kChunkHeaderBytes * index_);
    }

    const std::uint8_t* buffer_;
    std::uint32_t count_;
    std::uint32_t index_;
    std::size_t offset_;
    ChunkHeader header_;
};

namespace detail {

inline std::uint32_t* decode_block(const BlockView& b, std::uint32_t base, std::uint32_t* out) noexcept {
    if (b.dense()) return bits::decode_bitmap(b.data, kBlockWords, base, out);
    for (std::uint32_t j = 0; j < b.cardinality; ++j) out[j] = base + b.data[j];
    return out + b.cardinality;
}

inline std::uint32_t* decode_chunk(const ChunkView& c, std::uint32_t* out) noexcept {
    std::uint32_t const base = c.base();
    switch (c.header.type) {
        case ChunkType::full:
            for (std::uint32_t j = 0; j < kChunkSpan; ++j) out[j] = base + j;
            return out + kChunkSpan;
        case ChunkType::dense:
            return bits::decode_bitmap(c.data, kChunkWords, base, out);
        case ChunkType::sparse:
            for (auto b = c.blocks(); !b.at_end(); b.next()) {
                auto const v = b.payload();
                out = decode_block(v, base + (v.id << 8), out);
            }
            return out;
    }
    return out;
}

inline std::optional<std::uint32_t> block_next_geq(const BlockView& b, std::uint32_t low) noexcept {
    if (b.dense()) {
        long const pos = bits::next_set_bit(b.data, kBlockWords, low);
        if (pos < 0) return std::nullopt;
        return static_cast<std::uint32_t>(pos);
    }
    for (std::uint32_t j = 0; j < b.cardinality; ++j) {
        if (b.data[j] >= low) return b.data[j];
    }
    return std::nullopt;
}

inline std::uint32_t block_first(const BlockView& b) noexcept {
    if (b.dense()) return static_cast<std::uint32_t>(bits::next_set_bit(b.data, kBlockWords, 0));
    return b.data[0];
}

inline std::uint32_t chunk_first(const ChunkView& c) noexcept {
    switch (c.header.type) {
        case ChunkType::full:
            return c.base();
        case ChunkType::dense:
            return c.base() + static_cast<std::uint32_t>(bits::next_set_bit(c.data, kChunkWords, 0));
        case ChunkType::sparse: {
            auto const b = c.blocks().payload();
            return c.base() + (b.id << 8) + block_first(b);
        }
    }
    return c.base();
}

struct BlockLocation {
    std::uint32_t index;
    const std::uint8_t* data;
};

/// First block of a sparse chunk whose id is >= target; requires one to
/// exist. Walks H2 from whichever end is nearer to the target.
inline BlockLocation locate_block(const ChunkView& c, std::uint32_t target) noexcept {
    const std::uint8_t* h2 = c.data;
    std::uint32_t const count = c.header.block_count;
    std::uint32_t const first = h2[0], last = h2[2 * (count - 1)];
    if (target - std::min(target, first) <= last - target) {
        const std::uint8_t* data = h2 + kBlockHeaderBytes * count;
        std::uint32_t k = 0;
        for (; h2[2 * k] < target; ++k) data += block_payload_bytes(std::uint32_t{h2[2 * k + 1]} + 1);
        return {k, data};
    }
    const std::uint8_t* data = h2 + c.header.encoded_bytes;
    std::uint32_t k = count;
    do {
        --k;
        data -= block_payload_bytes(std::uint32_t{h2[2 * k + 1]} + 1);
    } while (k > 0 && h2[2 * (k - 1)] >= target);
    return {k, data};
}

/// Smallest value >= base + low inside the chunk.
inline std::optional<std::uint32_t> chunk_next_geq(const ChunkView& c, std::uint32_t low) noexcept {
    switch (c.header.type) {
        case ChunkType::full:
            return c.base() + low;
        case ChunkType::dense: {
            long const pos = bits::next_set_bit(c.data, kChunkWords, low);
            if (pos < 0) return std::nullopt;
            return c.base() + static_cast<std::uint32_t>(pos);
        }
        case ChunkType::sparse: {
            std::uint32_t const target = low >> 8;
            std::uint32_t const count = c.header.block_count;
            const std::uint8_t* h2 = c.data;
            if (target > h2[2 * (count - 1)]) return std::nullopt;
            auto [k, data] = locate_block(c, target);
            BlockView v{h2[2 * k], std::uint32_t{h2[2 * k + 1]} + 1, data};
            if (v.id == target) {
                if (auto hit = block_next_geq(v, low & 0xFF)) return c.base() + (v.id << 8) + *hit;
                if (++k == count) return std::nullopt;
                v = {h2[2 * k], std::uint32_t{h2[2 * k + 1]} + 1, data + block_payload_bytes(v.cardinality)};
            }
            return c.base() + (v.id << 8) + block_first(v);
        }
    }
    return std::nullopt;
}

/// The (rank+1)-th value of the chunk; rank < cardinality.
inline std::uint32_t chunk_select(const ChunkView& c, std::uint32_t rank) noexcept {
    switch (c.header.type) {
        case ChunkType::full:
            return c.base() + rank;
        case ChunkType::dense:
            return c.base() + bits::select_in_bitmap(c.data, rank);
        case ChunkType::sparse:
            for (auto b = c.blocks();; b.next()) {
                auto const v = b.payload();
                if (rank < v.cardinality) {
                    std::uint32_t const base = c.base() + (v.id << 8);
                    return v.dense() ? base + bits::select_in_bitmap(v.data, rank) : base + v.data[rank];
                }
                rank -= v.cardinality;
            }
    }
    return 0;
}

inline std::size_t and_blocks(const BlockView& a, const BlockView& b, std::uint32_t base, std::uint32_t* out) noexcept {
    if (a.dense() && b.dense()) {
        std::uint64_t words[kBlockWords];
        for (std::size_t w = 0; w < kBlockWords; ++w) {
            words[w] = bits::load_u64(a.data + 8 * w) & bits::load_u64(b.data + 8 * w);
        }
        return static_cast<std::size_t>(bits::decode_words(words, kBlockWords, base, out) - out);
    }
    if (!a.dense() && !b.dense()) return small_intersect(a.data, a.cardinality, b.data, b.cardinality, base, out);
    BlockView const& bitmap = a.dense() ? a : b;
    BlockView const& array = a.dense() ? b : a;
    std::size_t size = 0;
    for (std::uint32_t j = 0; j < array.cardinality; ++j) {
        std::uint8_t const v = array.data[j];
        out[size] = base + v;
        size += bits::test_bit(bitmap.data, v);
    }
    return size;
}

/// Intersects the blocks of a sparse chunk with the matching slices of a
/// dense chunk bitmap.
inline std::size_t and_dense_sparse(const ChunkView& dense, const ChunkView& sparse, std::uint32_t* out) noexcept {
    std::uint32_t const chunk_base = sparse.base();
    std::size_t size = 0;
    for (auto b = sparse.blocks(); !b.at_end(); b.next()) {
        auto const v = b.payload();
        std::uint8_t const* slice = dense.data + kDenseBlockBytes * v.id;
        size += and_blocks(v, BlockView{v.id, kBlockSpan, slice}, chunk_base + (v.id << 8), out + size);
    }
    return size;
}

inline std::size_t and_chunks(const ChunkView& a, const ChunkView& b, std::uint32_t* out) {
    if (a.header.type == ChunkType::full) return static_cast<std::size_t>(decode_chunk(b, out) - out);
    if (b.header.type == ChunkType::full) return static_cast<std::size_t>(decode_chunk(a, out) - out);
    if (a.header.type == ChunkType::dense && b.header.type == ChunkType::dense) {
        std::uint32_t* p = out;
        std::uint32_t const base = a.base();
        for (std::size_t w = 0; w < kChunkWords; ++w) {
            std::uint64_t x = bits::load_u64(a.data + 8 * w) & bits::load_u64(b.data + 8 * w);
            while (x != 0) {
                *p++ = base + static_cast<std::uint32_t>(64 * w + std::countr_zero(x));
                x &= x - 1;
            }
        }
        return static_cast<std::size_t>(p - out);
    }
    if (a.header.type == ChunkType::dense) return and_dense_sparse(a, b, out);
    if (b.header.type == ChunkType::dense) return and_dense_sparse(b, a, out);
    std::uint32_t const base = a.base();
    std::size_t const cap = std::min(a.header.cardinality, b.header.cardinality);
    return intersect_by_partition(
        a.blocks(), b.blocks(),
        [base](const BlockView& l, const BlockView& r, std::uint32_t* o) {
            return and_blocks(l, r, base + (l.id << 8), o);
        },
        std::span<std::uint32_t>(out, cap));
}

inline void or_block_into(std::uint64_t* words, const BlockView& b) noexcept {
    if (b.dense()) {
        for (std::size_t w = 0; w < kBlockWords; ++w) words[w] |= bits::load_u64(b.data + 8 * w);
        return;
    }
    for (std::uint32_t j = 0; j < b.cardinality; ++j) words[b.data[j] >> 6] |= std::uint64_t{1} << (b.data[j] & 63);
}

inline std::uint32_t* or_blocks(const BlockView& a, const BlockView& b, std::uint32_t base, std::uint32_t* out) noexcept {
    if (!a.dense() && !b.dense()) {
        std::uint32_t i = 0, j = 0;
        while (i < a.cardinality && j < b.cardinality) {
            std::uint8_t const x = a.data[i], y = b.data[j];
            *out++ = base + std::min(x, y);
            i += x <= y;
            j += y <= x;
        }
        for (; i < a.cardinality; ++i) *out++ = base + a.data[i];
        for (; j < b.cardinality; ++j) *out++ = base + b.data[j];
        return out;
    }
    std::uint64_t words[kBlockWords] = {};
    or_block_into(words, a);
    or_block_into(words, b);
    return bits::decode_words(words, kBlockWords, base, out);
}

inline std::uint32_t* or_chunks(const ChunkView& a, const ChunkView& b, std::uint32_t* out) {
    if (a.header.type == ChunkType::full) return decode_chunk(a, out);
    if (b.header.type == ChunkType::full) return decode_chunk(b, out);
    std::uint32_t const base = a.base();
    if (a.header.type == ChunkType::sparse && b.header.type == ChunkType::sparse) {
        return merge_by_partition(
            a.blocks(), b.blocks(),
            [base](const BlockView& l, const BlockView& r, std::uint32_t* o) {
                return or_blocks(l, r, base + (l.id << 8), o);
            },
            [base](const BlockView& v, std::uint32_t* o) { return decode_block(v, base + (v.id << 8), o); }, out);
    }
    // At least one bitmap: materialize the union as a chunk bitmap.
    std::uint64_t words[kChunkWords];
    ChunkView const& dense = a.header.type == ChunkType::dense ? a : b;
    ChunkView const& other = a.header.type == ChunkType::dense ? b : a;
    std::memcpy(words, dense.data, kDenseChunkBytes);
    if (other.header.type == ChunkType::dense) {
        for (std::size_t w = 0; w < kChunkWords; ++w) words[w] |= bits::load_u64(other.data + 8 * w);
    } else {
        for (auto blk = other.blocks(); !blk.at_end(); blk.next()) {
            auto const v = blk.payload();
            or_block_into(words + kBlockWords * v.id, v);
        }
    }
    return bits::decode_words(words, kChunkWords, base, out);
}

}  // namespace detail

/// Coverage (integers) and space (bytes) attributed to each container kind.
struct SpaceBreakdown {
    std::uint64_t full_chunk_ints = 0;
    std::uint64_t dense_chunk_ints = 0;
    std::uint64_t dense_block_ints = 0;
    std::uint64_t sparse_block_ints = 0;

    std::uint64_t header_bytes = 0;  // count field + H1 + every H2
    std::uint64_t dense_chunk_bytes = 0;
    std::uint64_t dense_block_bytes = 0;
    std::uint64_t sparse_block_bytes = 0;

    std::uint64_t total_ints() const noexcept {
        return full_chunk_ints + dense_chunk_ints + dense_block_ints + sparse_block_ints;
    }
    std::uint64_t total_bytes() const noexcept {
        return header_bytes + dense_chunk_bytes + dense_block_bytes + sparse_block_bytes;
    }

    SpaceBreakdown& operator+=(const SpaceBreakdown& o) noexcept {
        full_chunk_ints += o.full_chunk_ints;
        dense_chunk_ints += o.dense_chunk_ints;
        dense_block_ints += o.dense_block_ints;
        sparse_block_ints += o.sparse_block_ints;
        header_bytes += o.header_bytes;
        dense_chunk_bytes += o.dense_chunk_bytes;
        dense_block_bytes += o.dense_block_bytes;
        sparse_block_bytes += o.sparse_block_bytes;
        return *this;
    }
};

/// Sorted integer set stored as a linearized slicing tree:
///
///   [m-1 : 16][H1 : m x 8 bytes][chunk payloads in id order]
///
/// A dense chunk payload is a 2^16-bit bitmap; a sparse chunk payload is its
/// H2 array (id:8, cardinality-1:8 per non-empty block) followed by the
/// blocks, each either a 32-byte bitmap (c >= 31) or c sorted bytes.
/// Full chunks have no payload. The in-memory rank directory samples the
/// cumulative cardinality and payload offset every 32 chunks.
class SlicedSet {
public:
    class Cursor;

    SlicedSet() = default;

    static SlicedSet build(const SortedSequence& seq) {
        auto const values = seq.values();
        std::vector<std::uint8_t> headers;
        std::vector<std::uint8_t> payloads;
        std::uint32_t chunks = 0;

        std::size_t begin = 0;
        while (begin < values.size()) {
            std::uint32_t const id = values[begin] >> 16;
            std::size_t end = begin;
            while (end < values.size() && (values[end] >> 16) == id) ++end;
            auto const chunk = values.subspan(begin, end - begin);
            std::uint32_t const card = static_cast<std::uint32_t>(chunk.size());

            ChunkHeader h;
            h.id = static_cast<std::uint16_t>(id);
            h.cardinality = card;
            if (card == kChunkSpan) {
                h.type = ChunkType::full;
            } else {
                std::size_t sparse_bytes = 0;
                std::uint32_t block_count = 0;
                if (card < kChunkSpan / 2) {
                    for (std::size_t i = 0; i < chunk.size() && sparse_bytes < kDenseChunkBytes;) {
                        std::size_t j = i;
                        while (j < chunk.size() && (chunk[j] >> 8) == (chunk[i] >> 8)) ++j;
                        sparse_bytes += kBlockHeaderBytes + block_payload_bytes(static_cast<std::uint32_t>(j - i));
                        ++block_count;
                        i = j;
                    }
                }
                if (card >= kChunkSpan / 2 || sparse_bytes >= kDenseChunkBytes) {
                    h.type = ChunkType::dense;
                    h.encoded_bytes = static_cast<std::uint16_t>(kDenseChunkBytes);
                    append_dense_chunk(payloads, chunk);
                } else {
                    h.type = ChunkType::sparse;
                    h.block_count = block_count;
                    h.encoded_bytes = static_cast<std::uint16_t>(sparse_bytes);
                    append_sparse_chunk(payloads, chunk, block_count);
                }
            }
            h.append_to(headers);
            ++chunks;
            begin = end;
        }

        SlicedSet set;
        set.bytes_.reserve(2 + headers.size() + payloads.size());
        bits::put_u16(set.bytes_, static_cast<std::uint16_t>(chunks - 1));
        set.bytes_.insert(set.bytes_.end(), headers.begin(), headers.end());
        set.bytes_.insert(set.bytes_.end(), payloads.begin(), payloads.end());
        set.universe_ = seq.universe();
        set.index();
        return set;
    }

    /// Rebuilds a set from its serialized form, checking every structural
    /// rule. The universe of the result is its largest value.
    static SlicedSet deserialize(std::span<const std::uint8_t> bytes) {
        auto fail = [](const std::string& why) -> void { throw Error(Errc::malformed_buffer, why); };
        if (bytes.size() < 2) fail("missing chunk count");
        std::uint32_t const m = std::uint32_t{bits::load_u16(bytes.data())} + 1;
        std::size_t const payload_start = 2 + kChunkHeaderBytes * m;
        if (bytes.size() < payload_start) fail("truncated chunk headers");

        std::size_t offset = payload_start;
        long previous_id = -1;
        for (std::uint32_t k = 0; k < m; ++k) {
            const std::uint8_t* p = bytes.data() + 2 + kChunkHeaderBytes * k;
            ChunkHeader const h = ChunkHeader::read(p);
            if (static_cast<long>(h.id) <= previous_id) fail("chunk ids not strictly increasing");
            previous_id = h.id;
            if (offset + h.encoded_bytes > bytes.size()) fail("truncated chunk payload");
            const std::uint8_t* data = bytes.data() + offset;
            switch (h.type) {
                case ChunkType::full:
                    if (h.cardinality != kChunkSpan || h.encoded_bytes != 0 || p[7] != 0) fail("bad full chunk");
                    break;
                case ChunkType::dense:
                    if (h.encoded_bytes != kDenseChunkBytes || p[7] != 0 || h.cardinality == kChunkSpan) {
                        fail("bad dense chunk header");
                    }
                    if (bits::popcount_bytes(data, kChunkWords) != h.cardinality) fail("dense chunk popcount mismatch");
                    if (h.cardinality < kChunkSpan / 2 && sparse_encoding_bytes(data) < kDenseChunkBytes) {
                        fail("dense chunk would fit the sparse encoding");
                    }
                    break;
                case ChunkType::sparse:
                    check_sparse_chunk(h, data);
                    break;
                default:
                    fail("unknown chunk type");
            }
            offset += h.encoded_bytes;
        }
        if (offset != bytes.size()) fail("payload size does not match chunk headers");

        SlicedSet set;
        set.bytes_.assign(bytes.begin(), bytes.end());
        set.index();
        ChunkCursor last(set.bytes_.data(), m, m - 1, set.payload_offset(m - 1));
        auto const tail = last.payload();
        set.universe_ = detail::chunk_select(tail, tail.header.cardinality - 1);
        return set;
    }

    std::span<const std::uint8_t> serialize() const noexcept { return bytes_; }
    std::size_t size_bytes() const noexcept { return bytes_.size(); }
    std::uint64_t size() const noexcept { return size_; }
    std::uint32_t universe() const noexcept { return universe_; }
    std::uint32_t chunk_count() const noexcept { return chunk_count_; }

    ChunkHeader chunk_header(std::uint32_t k) const noexcept {
        return ChunkHeader::read(bytes_.data() + 2 + kChunkHeaderBytes * k);
    }

    ChunkCursor chunks() const noexcept { return {bytes_.data(), chunk_count_, 0, payload_start()}; }

    std::size_t decode(std::span<std::uint32_t> out) const {
        if (out.size() < size_) throw Error(Errc::buffer_too_small, "decode output must hold n values");
        std::uint32_t* p = out.data();
        for (auto c = chunks(); !c.at_end(); c.next()) p = detail::decode_chunk(c.payload(), p);
        return static_cast<std::size_t>(p - out.data());
    }

    std::uint32_t access(std::uint64_t i) const {
        if (i >= size_) throw Error(Errc::index_out_of_bounds, "access beyond size", static_cast<std::size_t>(i));
        auto it = std::upper_bound(directory_.begin(), directory_.end(), i,
                                   [](std::uint64_t v, const RankSample& s) { return v < s.rank; });
        std::size_t const group = static_cast<std::size_t>(it - directory_.begin()) - 1;
        std::uint64_t rank = directory_[group].rank;
        ChunkCursor c(bytes_.data(), chunk_count_, static_cast<std::uint32_t>(group * kRankSampling),
                      directory_[group].offset);
        while (i >= rank + c.cardinality()) {
            rank += c.cardinality();
            c.next();
        }
        return detail::chunk_select(c.payload(), static_cast<std::uint32_t>(i - rank));
    }

    /// Smallest stored value >= x, or nullopt when x exceeds the maximum.
    std::optional<std::uint32_t> next_geq(std::uint32_t x) const noexcept {
        std::uint32_t const target = x >> 16;
        std::uint32_t lo = 0;
        if (!chunk_slot_.empty()) {
            if (target >= chunk_slot_.size()) return std::nullopt;
            lo = chunk_slot_[target];
        } else {
            std::uint32_t hi = chunk_count_;
            while (lo < hi) {
                std::uint32_t const mid = lo + (hi - lo) / 2;
                if (bits::load_u16(bytes_.data() + 2 + kChunkHeaderBytes * mid) < target) {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            if (lo == chunk_count_) return std::nullopt;
        }
        ChunkCursor c(bytes_.data(), chunk_count_, lo, payload_offset(lo));
        if (c.id() == target) {
            if (auto hit = detail::chunk_next_geq(c.payload(), x & 0xFFFF)) return hit;
            c.next();
            if (c.at_end()) return std::nullopt;
        }
        return detail::chunk_first(c.payload());
    }

    SpaceBreakdown space_breakdown() const noexcept {
        SpaceBreakdown b;
        b.header_bytes = 2 + kChunkHeaderBytes * chunk_count_;
        for (auto c = chunks(); !c.at_end(); c.next()) {
            auto const v = c.payload();
            switch (v.header.type) {
                case ChunkType::full:
                    b.full_chunk_ints += v.header.cardinality;
                    break;
                case ChunkType::dense:
                    b.dense_chunk_ints += v.header.cardinality;
                    b.dense_chunk_bytes += kDenseChunkBytes;
                    break;
                case ChunkType::sparse:
                    b.header_bytes += kBlockHeaderBytes * v.header.block_count;
                    for (auto blk = v.blocks(); !blk.at_end(); blk.next()) {
                        auto const bv = blk.payload();
                        if (bv.dense()) {
                            b.dense_block_ints += bv.cardinality;
                            b.dense_block_bytes += kDenseBlockBytes;
                        } else {
                            b.sparse_block_ints += bv.cardinality;
                            b.sparse_block_bytes += bv.cardinality;
                        }
                    }
                    break;
            }
        }
        return b;
    }

    friend std::size_t intersect(const SlicedSet& a, const SlicedSet& b, std::span<std::uint32_t> out) {
        if (out.size() < std::min(a.size_, b.size_)) {
            throw Error(Errc::buffer_too_small, "intersection output must hold min(nA, nB) values");
        }
        return intersect_by_partition(a.chunks(), b.chunks(), detail::and_chunks, out);
    }

    friend std::size_t unite(const SlicedSet& a, const SlicedSet& b, std::span<std::uint32_t> out) {
        if (out.size() < a.size_ + b.size_) throw Error(Errc::buffer_too_small, "union output must hold nA + nB values");
        std::uint32_t* end = merge_by_partition(a.chunks(), b.chunks(), detail::or_chunks, detail::decode_chunk,
                                                out.data());
        return static_cast<std::size_t>(end - out.data());
    }

    friend bool operator==(const SlicedSet& a, const SlicedSet& b) noexcept { return a.bytes_ == b.bytes_; }

private:
    struct RankSample {
        std::uint64_t rank;   // values stored before the group
        std::size_t offset;   // payload offset of the group's first chunk
    };

    std::size_t payload_start() const noexcept { return 2 + kChunkHeaderBytes * chunk_count_; }

    std::size_t payload_offset(std::uint32_t k) const noexcept { return offsets_[k]; }

    void index() {
        chunk_count_ = std::uint32_t{bits::load_u16(bytes_.data())} + 1;
        directory_.clear();
        offsets_.resize(chunk_count_);
        std::uint64_t rank = 0;
        std::size_t offset = payload_start();
        for (std::uint32_t k = 0; k < chunk_count_; ++k) {
            if (k % kRankSampling == 0) directory_.push_back({rank, offset});
            offsets_[k] = static_cast<std::uint32_t>(offset);
            ChunkHeader const h = chunk_header(k);
            rank += h.cardinality;
            offset += h.encoded_bytes;
        }
        size_ = rank;
        chunk_slot_.clear();
        std::uint32_t const span = std::uint32_t{chunk_header(chunk_count_ - 1).id} + 1;
        if (span <= std::max<std::uint32_t>(kDirectLookupMin, kDirectLookupRatio * chunk_count_)) {
            chunk_slot_.resize(span);
            std::uint32_t k = 0;
            for (std::uint32_t id = 0; id < span; ++id) {
                while (chunk_header(k).id < id) ++k;
                chunk_slot_[id] = static_cast<std::uint16_t>(k);
            }
        }
    }

    static void append_dense_chunk(std::vector<std::uint8_t>& out, std::span<const std::uint32_t> chunk) {
        std::size_t const at = out.size();
        out.resize(at + kDenseChunkBytes, 0);
        for (std::uint32_t v : chunk) out[at + ((v & 0xFFFF) >> 3)] |= static_cast<std::uint8_t>(1u << (v & 7));
    }

    static void append_sparse_chunk(std::vector<std::uint8_t>& out, std::span<const std::uint32_t> chunk,
                                    std::uint32_t block_count) {
        std::size_t const h2 = out.size();
        out.resize(h2 + kBlockHeaderBytes * block_count);
        std::uint32_t k = 0;
        for (std::size_t i = 0; i < chunk.size();) {
            std::uint32_t const id = (chunk[i] >> 8) & 0xFF;
            std::size_t j = i;
            while (j < chunk.size() && ((chunk[j] >> 8) & 0xFF) == id) ++j;
            std::uint32_t const c = static_cast<std::uint32_t>(j - i);
            out[h2 + 2 * k] = static_cast<std::uint8_t>(id);
            out[h2 + 2 * k + 1] = static_cast<std::uint8_t>(c - 1);
            if (c < kSparseBlockLimit) {
                for (std::size_t t = i; t < j; ++t) out.push_back(static_cast<std::uint8_t>(chunk[t] & 0xFF));
            } else {
                std::size_t const at = out.size();
                out.resize(at + kDenseBlockBytes, 0);
                for (std::size_t t = i; t < j; ++t) {
                    out[at + ((chunk[t] & 0xFF) >> 3)] |= static_cast<std::uint8_t>(1u << (chunk[t] & 7));
                }
            }
            ++k;
            i = j;
        }
    }

    static std::size_t sparse_encoding_bytes(const std::uint8_t* bitmap) noexcept {
        std::size_t total = 0;
        for (std::size_t k = 0; k < kChunkSpan / kBlockSpan; ++k) {
            auto const c = static_cast<std::uint32_t>(bits::popcount_bytes(bitmap + kDenseBlockBytes * k, kBlockWords));
            if (c != 0) total += kBlockHeaderBytes + block_payload_bytes(c);
        }
        return total;
    }

    static void check_sparse_chunk(const ChunkHeader& h, const std::uint8_t* data) {
        auto fail = [](const char* why) { throw Error(Errc::malformed_buffer, why); };
        std::size_t const h2_bytes = kBlockHeaderBytes * h.block_count;
        if (h.encoded_bytes < h2_bytes || h.encoded_bytes >= kDenseChunkBytes) fail("bad sparse chunk size");
        if (h.cardinality >= kChunkSpan / 2) fail("sparse chunk cardinality too large");
        std::size_t expected = h2_bytes;
        for (std::uint32_t k = 0; k < h.block_count; ++k) {
            if (k > 0 && data[2 * k] <= data[2 * (k - 1)]) fail("block ids not strictly increasing");
            expected += block_payload_bytes(std::uint32_t{data[2 * k + 1]} + 1);
        }
        if (expected != h.encoded_bytes) fail("sparse chunk size does not match block headers");
        std::uint64_t total = 0;
        for (auto b = BlockCursor(data, h.block_count); !b.at_end(); b.next()) {
            auto const v = b.payload();
            total += v.cardinality;
            if (v.dense()) {
                if (bits::popcount_bytes(v.data, kBlockWords) != v.cardinality) fail("dense block popcount mismatch");
            } else {
                for (std::uint32_t j = 1; j < v.cardinality; ++j) {
                    if (v.data[j] <= v.data[j - 1]) fail("sparse block not strictly increasing");
                }
            }
        }
        if (total != h.cardinality) fail("block cardinalities do not sum to chunk cardinality");
    }

    std::vector<std::uint8_t> bytes_;
    std::vector<RankSample> directory_;
    std::vector<std::uint32_t> offsets_;  // payload offset of every chunk
    std::vector<std::uint16_t> chunk_slot_;  // chunk id -> first H1 index with id >= it
    std::uint64_t size_ = 0;
    std::uint32_t universe_ = 0;
    std::uint32_t chunk_count_ = 0;
};

/// Stateful value cursor over a SlicedSet, for the candidate-driven driver.
class SlicedSet::Cursor {
public:
    explicit Cursor(const SlicedSet& set) noexcept : set_(&set) {}

    std::optional<std::uint32_t> next() noexcept {
        if (!started_) {
            started_ = true;
            return settle(set_->next_geq(0));
        }
        if (!current_ || *current_ == UINT32_MAX) return settle(std::nullopt);
        return settle(set_->next_geq(*current_ + 1));
    }

    std::optional<std::uint32_t> next_geq(std::uint32_t x) noexcept {
        if (started_ && current_ && *current_ >= x) return current_;
        if (started_ && !current_) return std::nullopt;
        started_ = true;
        return settle(set_->next_geq(x));
    }

    std::uint32_t current() const noexcept { return current_.value_or(UINT32_MAX); }

private:
    std::optional<std::uint32_t> settle(std::optional<std::uint32_t> v) noexcept {
        current_ = v;
        return v;
    }

    const SlicedSet* set_;
    std::optional<std::uint32_t> current_;
    bool started_ = false;
};

}  // namespace slicing
