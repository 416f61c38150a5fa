#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include "bits.hpp"
#include "collection.hpp"
#include "error.hpp"
#include "representation.hpp"

namespace slicing {

/// A collection encoded with one representation. Layout (little-endian):
/// "SLICEIDX" | version:32 | repr:32 | universe:32 | lists:32 | per list
/// [bytes:32][serialized list].
struct IndexFile {
    Repr repr = Repr::slicing;
    std::uint32_t universe = 0;
    std::vector<std::vector<std::uint8_t>> lists;
};

inline constexpr char kIndexMagic[8] = {'S', 'L', 'I', 'C', 'E', 'I', 'D', 'X'};
inline constexpr std::uint32_t kIndexVersion = 1;

inline IndexFile build_index(const Collection& c, Repr repr) {
    IndexFile f;
    f.repr = repr;
    f.universe = c.universe;
    visit_repr(repr, [&]<class T>() {
        for (auto const& list : c.lists) f.lists.push_back(serialize_bytes(T::build(list)));
    });
    return f;
}

inline std::vector<std::uint8_t> encode_index(const IndexFile& f) {
    std::vector<std::uint8_t> out(kIndexMagic, kIndexMagic + sizeof(kIndexMagic));
    bits::put_u32(out, kIndexVersion);
    bits::put_u32(out, static_cast<std::uint32_t>(f.repr));
    bits::put_u32(out, f.universe);
    bits::put_u32(out, static_cast<std::uint32_t>(f.lists.size()));
    for (auto const& l : f.lists) {
        bits::put_u32(out, static_cast<std::uint32_t>(l.size()));
        out.insert(out.end(), l.begin(), l.end());
    }
    return out;
}

inline IndexFile parse_index(std::span<const std::uint8_t> bytes) {
    auto fail = [](const char* why) { throw Error(Errc::malformed_file, why); };
    if (bytes.size() < 24 || std::memcmp(bytes.data(), kIndexMagic, sizeof(kIndexMagic)) != 0) fail("not an index file");
    if (bits::load_u32(bytes.data() + 8) != kIndexVersion) fail("unsupported index version");
    IndexFile f;
    std::uint32_t const repr = bits::load_u32(bytes.data() + 12);
    if (repr < 1 || repr > 3) fail("unknown representation code");
    f.repr = static_cast<Repr>(repr);
    f.universe = bits::load_u32(bytes.data() + 16);
    std::uint32_t const count = bits::load_u32(bytes.data() + 20);
    std::size_t pos = 24;
    for (std::uint32_t i = 0; i < count; ++i) {
        if (bytes.size() - pos < 4) fail("truncated list length");
        std::uint32_t const length = bits::load_u32(bytes.data() + pos);
        pos += 4;
        if (bytes.size() - pos < length) fail("truncated list payload");
        f.lists.emplace_back(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                             bytes.begin() + static_cast<std::ptrdiff_t>(pos + length));
        pos += length;
    }
    if (pos != bytes.size()) fail("trailing bytes after last list");
    return f;
}

inline void write_index(const IndexFile& f, const std::filesystem::path& path) {
    auto const bytes = encode_index(f);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline IndexFile read_index(const std::filesystem::path& path) { return parse_index(read_file(path)); }

struct IndexStats {
    Repr repr = Repr::slicing;
    std::size_t lists = 0;
    std::uint64_t integers = 0;
    std::uint64_t bytes = 0;
    std::optional<SpaceBreakdown> breakdown;

    double bits_per_int() const noexcept {
        return integers == 0 ? 0.0 : 8.0 * static_cast<double>(bytes) / static_cast<double>(integers);
    }
};

/// Deserializes every list (validating it) and aggregates space figures.
inline IndexStats index_stats(const IndexFile& f) {
    IndexStats s;
    s.repr = f.repr;
    s.lists = f.lists.size();
    visit_repr(f.repr, [&]<class T>() {
        SpaceBreakdown total;
        for (auto const& bytes : f.lists) {
            T const rep = T::deserialize(bytes);
            s.integers += rep.size();
            s.bytes += rep.size_bytes();
            if constexpr (std::is_same_v<T, SlicedSet>) total += rep.space_breakdown();
        }
        if constexpr (std::is_same_v<T, SlicedSet>) s.breakdown = total;
    });
    return s;
}

}  // namespace slicing
