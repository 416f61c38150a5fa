#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace slicing {

/// A non-empty, strictly increasing list of 32-bit integers together with a
/// bound `universe() >= back()`. Immutable once constructed.
class SortedSequence {
public:
    /// Checks `raw` and takes ownership. Throws EmptyInput,
    /// NotStrictlyIncreasing (position = index of the offending element) or
    /// UniverseTooSmall.
    static SortedSequence validate(std::vector<std::uint32_t> raw, std::uint32_t universe) {
        if (raw.empty()) throw Error(Errc::empty_input, "sequence has no elements");
        for (std::size_t i = 1; i < raw.size(); ++i) {
            if (raw[i] <= raw[i - 1]) {
                throw Error(Errc::not_strictly_increasing,
                            "element " + std::to_string(i) + " is not greater than its predecessor", i);
            }
        }
        if (raw.back() > universe) {
            throw Error(Errc::universe_too_small,
                        "maximum " + std::to_string(raw.back()) + " exceeds universe " + std::to_string(universe));
        }
        return SortedSequence(std::move(raw), universe);
    }

    std::span<const std::uint32_t> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::uint32_t universe() const noexcept { return universe_; }
    std::uint32_t front() const noexcept { return values_.front(); }
    std::uint32_t back() const noexcept { return values_.back(); }
    std::uint32_t operator[](std::size_t i) const noexcept { return values_[i]; }

    friend bool operator==(const SortedSequence&, const SortedSequence&) = default;

private:
    SortedSequence(std::vector<std::uint32_t> values, std::uint32_t universe)
        : values_(std::move(values)), universe_(universe) {}

    std::vector<std::uint32_t> values_;
    std::uint32_t universe_;
};

inline SortedSequence validate_sequence(std::span<const std::uint32_t> raw, std::uint32_t universe) {
    return SortedSequence::validate(std::vector<std::uint32_t>(raw.begin(), raw.end()), universe);
}

enum class PartitionMode { by_cardinality, by_universe };

struct Partitioning {
    PartitionMode mode;
    std::uint64_t parameter;  // partition size B, or span s
    std::vector<std::vector<std::uint32_t>> parts;

    std::vector<std::uint32_t> flatten() const {
        std::vector<std::uint32_t> out;
        for (auto const& p : parts) out.insert(out.end(), p.begin(), p.end());
        return out;
    }
};

/// Groups consecutive elements: part j holds values[j*B, min((j+1)*B, n)).
inline Partitioning partition_by_cardinality(const SortedSequence& seq, std::size_t partition_size) {
    if (partition_size == 0) throw std::invalid_argument("partition size must be positive");
    Partitioning result{PartitionMode::by_cardinality, partition_size, {}};
    auto const values = seq.values();
    for (std::size_t begin = 0; begin < values.size(); begin += partition_size) {
        auto const end = std::min(values.size(), begin + partition_size);
        result.parts.emplace_back(values.begin() + begin, values.begin() + end);
    }
    return result;
}

/// Groups by value range: part k holds the values in [s*k, s*(k+1)). All
/// ceil((u+1)/s) parts are materialized, including empty ones.
inline Partitioning partition_by_universe(const SortedSequence& seq, std::uint64_t span) {
    if (span == 0) throw std::invalid_argument("span must be positive");
    std::uint64_t const count = (std::uint64_t{seq.universe()} + span) / span;
    Partitioning result{PartitionMode::by_universe, span, {}};
    result.parts.resize(count);
    for (std::uint32_t v : seq.values()) result.parts[v / span].push_back(v);
    return result;
}

/// n / max; the single-element list <0> has density 1 by convention.
inline double density(const SortedSequence& seq) noexcept {
    if (seq.back() == 0) return 1.0;
    return static_cast<double>(seq.size()) / static_cast<double>(seq.back());
}

}  // namespace slicing
