#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace slicing;
using testing_util::sample;

TEST(Sequence, ValidatesWellFormedInput) {
    auto const s = validate_sequence(std::vector<std::uint32_t>{0, 1, 4}, 55);
    EXPECT_EQ(s.size(), 3u);
    EXPECT_EQ(s.universe(), 55u);
    EXPECT_EQ(s.back(), 4u);
}

TEST(Sequence, RejectsDuplicateWithPosition) {
    try {
        validate_sequence(std::vector<std::uint32_t>{3, 3, 5}, 10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::not_strictly_increasing);
        EXPECT_EQ(e.position(), 1u);
    }
}

TEST(Sequence, RejectsEmptyAndSmallUniverse) {
    auto code = [](std::vector<std::uint32_t> v, std::uint32_t u) {
        try {
            SortedSequence::validate(std::move(v), u);
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::validation_failure;
    };
    EXPECT_EQ(code({}, 10), Errc::empty_input);
    EXPECT_EQ(code({1, 2, 11}, 10), Errc::universe_too_small);
    EXPECT_EQ(code({5, 4}, 10), Errc::not_strictly_increasing);
}

TEST(Partitioning, ByCardinalitySample) {
    auto const p = partition_by_cardinality(sample(), 8);
    std::vector<std::vector<std::uint32_t>> const expected = {{0, 1, 4, 5, 6, 17, 18, 19},
                                                              {20, 21, 22, 24, 27, 31, 34, 35},
                                                              {37, 38, 39, 40, 41, 42, 43, 44},
                                                              {45, 46, 47, 50, 52, 53, 54, 55}};
    EXPECT_EQ(p.parts, expected);
    EXPECT_EQ(p.mode, PartitionMode::by_cardinality);
}

TEST(Partitioning, ByUniverseSample) {
    auto const p = partition_by_universe(sample(), 8);
    std::vector<std::vector<std::uint32_t>> const expected = {
        {0, 1, 4, 5, 6}, {}, {17, 18, 19, 20, 21, 22}, {24, 27, 31}, {34, 35, 37, 38, 39}, {40, 41, 42, 43, 44, 45, 46, 47},
        {50, 52, 53, 54, 55}};
    EXPECT_EQ(p.parts, expected);
    EXPECT_TRUE(p.parts[1].empty());
}

TEST(Partitioning, CardinalityRemainder) {
    std::vector<std::uint32_t> v(300);
    for (std::uint32_t i = 0; i < 300; ++i) v[i] = i + 1;
    auto const p = partition_by_cardinality(testing_util::seq(v), 128);
    ASSERT_EQ(p.parts.size(), 3u);
    EXPECT_EQ(p.parts[0].size(), 128u);
    EXPECT_EQ(p.parts[1].size(), 128u);
    EXPECT_EQ(p.parts[2].size(), 44u);
    auto const single = partition_by_cardinality(sample(), 64);
    ASSERT_EQ(single.parts.size(), 1u);
    EXPECT_EQ(single.parts[0], testing_util::kSample);
}

TEST(Partitioning, ZeroParameterRejected) {
    EXPECT_THROW(partition_by_cardinality(sample(), 0), std::invalid_argument);
    EXPECT_THROW(partition_by_universe(sample(), 0), std::invalid_argument);
}

TEST(Partitioning, ConcatenationReproducesSource) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 200; ++t) {
        std::uint32_t const u = std::uniform_int_distribution<std::uint32_t>(1, 5000)(rng);
        std::size_t const n = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(u, 400))(rng);
        auto const v = testing_util::random_values(rng, n, u);
        auto const s = validate_sequence(v, u);
        std::size_t const b = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
        auto const pc = partition_by_cardinality(s, b);
        auto const pu = partition_by_universe(s, b);
        EXPECT_EQ(pc.flatten(), v);
        EXPECT_EQ(pu.flatten(), v);
        EXPECT_EQ(pu.parts.size(), (std::uint64_t{u} + b) / b);
        for (std::size_t k = 0; k < pu.parts.size(); ++k) {
            for (auto x : pu.parts[k]) {
                EXPECT_GE(x, b * k);
                EXPECT_LT(x, b * (k + 1));
            }
        }
        for (std::size_t j = 0; j + 1 < pc.parts.size(); ++j) EXPECT_EQ(pc.parts[j].size(), b);
    }
}

TEST(Sequence, Density) {
    EXPECT_DOUBLE_EQ(density(sample()), 32.0 / 55.0);
    EXPECT_DOUBLE_EQ(density(testing_util::seq({0})), 1.0);
    EXPECT_DOUBLE_EQ(density(testing_util::seq({1000})), 0.001);
}
