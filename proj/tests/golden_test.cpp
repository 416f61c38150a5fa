#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace slicing;
using testing_util::from_hex;

namespace {

std::vector<std::uint8_t> bytes_of(std::span<const std::uint8_t> s) { return {s.begin(), s.end()}; }

std::vector<std::uint32_t> mixed_values() {
    std::vector<std::uint32_t> v = {5, 300, 301};
    for (std::uint32_t x = 65536; x < 131072; x += 2) v.push_back(x);
    for (std::uint32_t x = 3 * 65536; x < 4 * 65536; ++x) v.push_back(x);
    for (std::uint32_t j = 0; j < 40; ++j) v.push_back(5 * 65536 + 7 * 256 + 5 * j);
    return v;
}

}  // namespace

TEST(Golden, SampleSlicing) {
    auto const s = SlicedSet::build(testing_util::sample());
    auto const expected = from_hex(
        "0000 00001f00220003 00 001f 73007e89ecfff400 0000000000000000 0000000000000000 0000000000000000");
    ASSERT_EQ(expected.size(), 44u);
    EXPECT_EQ(bytes_of(s.serialize()), expected);
    EXPECT_EQ(SlicedSet::deserialize(expected), s);
}

TEST(Golden, FullChunk) {
    std::vector<std::uint32_t> v(65536);
    for (std::uint32_t i = 0; i < 65536; ++i) v[i] = i;
    auto const s = SlicedSet::build(testing_util::seq(v));
    EXPECT_EQ(bytes_of(s.serialize()), from_hex("0000 0000ffff00000100"));
    EXPECT_EQ(s.space_breakdown().full_chunk_ints, 65536u);
}

TEST(Golden, MixedSlicing) {
    auto const expected = read_file(SLICING_GOLDEN_DIR "/mixed_slicing.bin");
    ASSERT_EQ(expected.size(), 8267u);
    auto const v = mixed_values();
    auto const s = SlicedSet::build(testing_util::seq(v));
    EXPECT_EQ(bytes_of(s.serialize()), expected);
    auto const back = SlicedSet::deserialize(expected);
    EXPECT_EQ(testing_util::decode_all(back), v);
    ASSERT_EQ(s.chunk_count(), 4u);
    EXPECT_EQ(s.chunk_header(0).type, ChunkType::sparse);
    EXPECT_EQ(s.chunk_header(1).type, ChunkType::dense);
    EXPECT_EQ(s.chunk_header(2).type, ChunkType::full);
    EXPECT_EQ(s.chunk_header(3).type, ChunkType::sparse);
    auto const b = s.space_breakdown();
    EXPECT_EQ(b.sparse_block_ints, 3u);
    EXPECT_EQ(b.dense_chunk_ints, 32768u);
    EXPECT_EQ(b.full_chunk_ints, 65536u);
    EXPECT_EQ(b.dense_block_ints, 40u);
}

TEST(Golden, SampleRoaringLite) {
    auto const r = RoaringLiteSet::build(testing_util::sample());
    auto const expected = from_hex(
        "0000 00001f00 0000010004000500060011001200130014001500160018001b001f0022002300250026002700280029002a002b002c00"
        "2d002e002f0032003400350036003700");
    ASSERT_EQ(expected.size(), 70u);
    EXPECT_EQ(bytes_of(r.serialize()), expected);
}

TEST(Golden, SamplePcEf) {
    auto const l = PcEfList::build(testing_util::sample());
    auto const expected = from_hex("20000000 01000000 37000000 00000000 450540558910a5aaaa2255");
    EXPECT_EQ(l.serialize(), expected);
    EXPECT_EQ(testing_util::decode_all(PcEfList::deserialize(expected)), testing_util::kSample);
}

TEST(Golden, HandCheckedEliasFano) {
    auto const p = ef_encode_partition(std::vector<std::uint32_t>{2, 3, 5, 7, 11, 13, 24}, 24);
    std::vector<std::uint8_t> const payload(p.bytes.begin(), p.bytes.begin() + static_cast<std::ptrdiff_t>(p.byte_size()));
    EXPECT_EQ(payload, from_hex("3e2b0502"));
}

TEST(Golden, RoundTripRandomSets) {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 100; ++t) {
        auto const v = testing_util::clustered_values(rng, 1u << 24);
        auto const s = SlicedSet::build(testing_util::seq(v));
        ASSERT_EQ(bytes_of(SlicedSet::deserialize(s.serialize()).serialize()), bytes_of(s.serialize()));
        auto const r = RoaringLiteSet::build(testing_util::seq(v));
        ASSERT_EQ(bytes_of(RoaringLiteSet::deserialize(r.serialize()).serialize()), bytes_of(r.serialize()));
        auto const p = PcEfList::build(testing_util::seq(v));
        ASSERT_EQ(PcEfList::deserialize(p.serialize()).serialize(), p.serialize());
    }
}
