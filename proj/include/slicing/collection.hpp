#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bits.hpp"
#include "error.hpp"
#include "sequence.hpp"

namespace slicing {

/// A set of lists over documents [0, universe). Each list's own universe
/// bound is universe - 1.
struct Collection {
    std::uint32_t universe = 0;
    std::vector<SortedSequence> lists;

    std::uint64_t integer_count() const noexcept {
        std::uint64_t total = 0;
        for (auto const& l : lists) total += l.size();
        return total;
    }
};

/// Binary layout: a stream of little-endian 32-bit words. The first record
/// is [1][universe]; each following record is [length][values...].
inline std::vector<std::uint8_t> encode_collection(const Collection& c) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + 4 * (c.lists.size() + c.integer_count()));
    bits::put_u32(out, 1);
    bits::put_u32(out, c.universe);
    for (auto const& list : c.lists) {
        bits::put_u32(out, static_cast<std::uint32_t>(list.size()));
        for (std::uint32_t v : list.values()) bits::put_u32(out, v);
    }
    return out;
}

inline Collection parse_collection(std::span<const std::uint8_t> bytes) {
    auto fail = [](const std::string& why, std::size_t at = Error::npos) {
        throw Error(Errc::malformed_file, why, at);
    };
    if (bytes.size() % 4 != 0) fail("size is not a multiple of 4 bytes");
    std::size_t const words = bytes.size() / 4;
    auto word = [&](std::size_t i) { return bits::load_u32(bytes.data() + 4 * i); };
    if (words < 2 || word(0) != 1) fail("missing universe record");
    Collection c;
    c.universe = word(1);
    if (c.universe == 0) fail("universe must be positive");
    std::size_t pos = 2;
    while (pos < words) {
        std::uint32_t const length = word(pos);
        if (length == 0) fail("empty list record", pos);
        if (length > words - pos - 1) fail("truncated list record", pos);
        std::vector<std::uint32_t> values(length);
        for (std::uint32_t i = 0; i < length; ++i) values[i] = word(pos + 1 + i);
        for (std::uint32_t i = 1; i < length; ++i) {
            if (values[i] <= values[i - 1]) fail("list values not strictly increasing", pos + 1 + i);
        }
        if (values.back() >= c.universe) fail("list value outside universe", pos + length);
        c.lists.push_back(SortedSequence::validate(std::move(values), c.universe - 1));
        pos += 1 + length;
    }
    return c;
}

inline void write_collection(const Collection& c, const std::filesystem::path& path) {
    auto const bytes = encode_collection(c);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Collection read_collection(const std::filesystem::path& path) { return parse_collection(read_file(path)); }

struct DensityFilterStats {
    std::size_t retained_lists = 0;
    std::size_t total_lists = 0;
    std::uint64_t retained_ints = 0;
    std::uint64_t total_ints = 0;

    double retained_int_percent() const noexcept {
        return total_ints == 0 ? 0.0 : 100.0 * static_cast<double>(retained_ints) / static_cast<double>(total_ints);
    }
};

struct FilteredCollection {
    Collection collection;
    DensityFilterStats stats;
};

/// Keeps exactly the lists whose density is strictly greater than `d`.
inline FilteredCollection filter_by_density(const Collection& c, double d) {
    if (!(d >= 0.0)) throw std::invalid_argument("density threshold must be non-negative");
    FilteredCollection r;
    r.collection.universe = c.universe;
    r.stats.total_lists = c.lists.size();
    for (auto const& list : c.lists) {
        r.stats.total_ints += list.size();
        if (density(list) > d) {
            r.collection.lists.push_back(list);
            r.stats.retained_ints += list.size();
        }
    }
    r.stats.retained_lists = r.collection.lists.size();
    return r;
}

struct ClusterParams {
    double run_prob = 0.5;   // probability that a gap is 1
    double gap_mean = 16.0;  // mean of the geometric gaps, before scaling
};

namespace detail {

/// One list of `n` values ending exactly at `max_value`. Gaps follow the
/// run/geometric walk; the geometric gaps are then rescaled so their sum
/// lands the last value on `max_value`.
inline std::vector<std::uint32_t> clustered_list(std::size_t n, std::uint64_t max_value, const ClusterParams& params,
                                                 std::mt19937_64& rng) {
    std::bernoulli_distribution run(params.run_prob);
    std::geometric_distribution<std::uint64_t> geometric(1.0 / params.gap_mean);
    std::vector<std::uint64_t> gaps(n);
    std::vector<std::size_t> jumps;
    std::uint64_t runs = 0, jump_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && run(rng)) {
            gaps[i] = 1;
            ++runs;
        } else {
            gaps[i] = 1 + geometric(rng);
            jump_sum += gaps[i];
            jumps.push_back(i);
        }
    }
    // gaps sum to max_value + 1 so that value[i] = sum(gaps[0..i]) - 1
    std::uint64_t const jump_total = max_value + 1 - runs;
    double const scale = static_cast<double>(jump_total) / static_cast<double>(jump_sum);
    std::int64_t residual = static_cast<std::int64_t>(jump_total);
    for (std::size_t i : jumps) {
        gaps[i] = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(static_cast<double>(gaps[i]) * scale)));
        residual -= static_cast<std::int64_t>(gaps[i]);
    }
    for (std::size_t k = 0; residual != 0; k = (k + 1) % jumps.size()) {
        std::size_t const i = jumps[k];
        if (residual > 0) {
            std::uint64_t const add = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(residual) / jumps.size());
            gaps[i] += add;
            residual -= static_cast<std::int64_t>(add);
        } else if (gaps[i] > 1) {
            --gaps[i];
            ++residual;
        }
    }
    std::vector<std::uint32_t> values(n);
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += gaps[i];
        values[i] = static_cast<std::uint32_t>(acc - 1);
    }
    return values;
}

}  // namespace detail

/// Synthetic clustered collection. Each list's length is drawn
/// log-uniformly in [1/64, 1] of the longest length that fits the universe
/// at the target density; its maximum is then placed at n / density.
/// Deterministic under `seed`.
inline Collection generate_clustered(std::size_t list_count, std::uint32_t universe, double target_density,
                                     const ClusterParams& params, std::uint64_t seed) {
    if (!(target_density > 0.0 && target_density <= 1.0)) {
        throw Error(Errc::infeasible_parameters, "density must lie in (0, 1]");
    }
    if (!(params.run_prob >= 0.0 && params.run_prob < 1.0) || !(params.gap_mean >= 1.0)) {
        throw Error(Errc::infeasible_parameters, "run probability must lie in [0, 1) and gap mean be >= 1");
    }
    if (universe < 2) throw Error(Errc::infeasible_parameters, "universe too small");
    double const longest = std::floor(target_density * static_cast<double>(universe - 1));
    if (longest < 1.0 || std::llround(1.0 / target_density) > static_cast<long long>(universe - 1)) {
        throw Error(Errc::infeasible_parameters, "density unreachable within the universe");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Collection c;
    c.universe = universe;
    c.lists.reserve(list_count);
    for (std::size_t l = 0; l < list_count; ++l) {
        double const fraction = std::exp2(-6.0 * unit(rng));
        auto const n = static_cast<std::size_t>(std::clamp(std::llround(longest * fraction), 1LL,
                                                           static_cast<long long>(longest)));
        auto max_value = static_cast<std::uint64_t>(std::llround(static_cast<double>(n) / target_density));
        max_value = std::clamp<std::uint64_t>(max_value, n - 1, universe - 1);
        c.lists.push_back(SortedSequence::validate(detail::clustered_list(n, max_value, params, rng), universe - 1));
    }
    return c;
}

}  // namespace slicing
