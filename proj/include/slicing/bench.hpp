#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "collection.hpp"
#include "error.hpp"
#include "reference.hpp"
#include "representation.hpp"

namespace slicing {

/// Seeded query sets: list pairs (uniform over lists) for AND/OR, and per
/// list unsorted access positions and next_geq keys in [0, max].
struct Workload {
    std::uint64_t seed = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    std::vector<std::vector<std::uint32_t>> access_positions;
    std::vector<std::vector<std::uint32_t>> next_geq_keys;
};

inline Workload make_workload(const Collection& c, std::uint64_t seed, std::size_t pair_count = 1000,
                              std::size_t queries_per_list = 1000) {
    Workload w;
    w.seed = seed;
    if (c.lists.empty()) return w;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(c.lists.size() - 1));
    w.pairs.reserve(pair_count);
    for (std::size_t i = 0; i < pair_count; ++i) w.pairs.emplace_back(pick(rng), pick(rng));
    w.access_positions.resize(c.lists.size());
    w.next_geq_keys.resize(c.lists.size());
    for (std::size_t l = 0; l < c.lists.size(); ++l) {
        auto const& list = c.lists[l];
        std::uniform_int_distribution<std::uint32_t> position(0, static_cast<std::uint32_t>(list.size() - 1));
        std::uniform_int_distribution<std::uint32_t> key(0, list.back());
        auto& positions = w.access_positions[l];
        auto& keys = w.next_geq_keys[l];
        positions.reserve(queries_per_list);
        keys.reserve(queries_per_list);
        for (std::size_t q = 0; q < queries_per_list; ++q) positions.push_back(position(rng));
        for (std::size_t q = 0; q < queries_per_list; ++q) keys.push_back(key(rng));
    }
    return w;
}

enum class Op { decode, and_, or_, access, next_geq };

inline constexpr std::array<Op, 5> kAllOps = {Op::decode, Op::and_, Op::or_, Op::access, Op::next_geq};

inline std::string_view op_name(Op op) noexcept {
    switch (op) {
        case Op::decode: return "decode";
        case Op::and_: return "and";
        case Op::or_: return "or";
        case Op::access: return "access";
        case Op::next_geq: return "nextgeq";
    }
    return "unknown";
}

inline Op parse_op(std::string_view name) {
    for (Op op : kAllOps) {
        if (op_name(op) == name) return op;
    }
    throw std::invalid_argument("unknown operation '" + std::string(name) + "'");
}

template <Representation T>
std::vector<T> build_all(const Collection& c) {
    std::vector<T> out;
    out.reserve(c.lists.size());
    for (auto const& list : c.lists) out.push_back(T::build(list));
    return out;
}

/// Checks every query of the workload for the selected operations against
/// the plain-array oracle. Throws ValidationFailure on the first mismatch.
template <Representation T>
void validate_against_oracle(const Collection& c, const std::vector<T>& reps, const Workload& w,
                             const std::vector<Op>& ops, std::string_view name) {
    auto mismatch = [&](const std::string& what) {
        throw Error(Errc::validation_failure, std::string(name) + ": " + what);
    };
    auto has = [&](Op op) { return std::find(ops.begin(), ops.end(), op) != ops.end(); };
    std::vector<std::uint32_t> buffer;
    if (has(Op::decode)) {
        for (std::size_t l = 0; l < reps.size(); ++l) {
            buffer.assign(reps[l].size(), 0);
            std::size_t const n = reps[l].decode(buffer);
            auto const expected = c.lists[l].values();
            if (n != expected.size() || !std::equal(expected.begin(), expected.end(), buffer.begin())) {
                mismatch("decode differs on list " + std::to_string(l));
            }
        }
    }
    for (auto [i, j] : w.pairs) {
        auto const a = c.lists[i].values(), b = c.lists[j].values();
        if (has(Op::and_)) {
            buffer.assign(std::min(a.size(), b.size()), 0);
            std::size_t const n = intersect(reps[i], reps[j], buffer);
            auto const expected = reference::intersect(a, b);
            if (n != expected.size() || !std::equal(expected.begin(), expected.end(), buffer.begin())) {
                mismatch("AND differs on pair " + std::to_string(i) + "," + std::to_string(j));
            }
        }
        if (has(Op::or_)) {
            buffer.assign(a.size() + b.size(), 0);
            std::size_t const n = unite(reps[i], reps[j], buffer);
            auto const expected = reference::unite(a, b);
            if (n != expected.size() || !std::equal(expected.begin(), expected.end(), buffer.begin())) {
                mismatch("OR differs on pair " + std::to_string(i) + "," + std::to_string(j));
            }
        }
    }
    for (std::size_t l = 0; l < reps.size(); ++l) {
        auto const values = c.lists[l].values();
        if (has(Op::access)) {
            for (std::uint32_t p : w.access_positions[l]) {
                if (reps[l].access(p) != reference::access(values, p)) {
                    mismatch("access(" + std::to_string(p) + ") differs on list " + std::to_string(l));
                }
            }
        }
        if (has(Op::next_geq)) {
            for (std::uint32_t x : w.next_geq_keys[l]) {
                if (reps[l].next_geq(x) != reference::next_geq(values, x)) {
                    mismatch("nextGEQ(" + std::to_string(x) + ") differs on list " + std::to_string(l));
                }
            }
        }
    }
}

/// Fractions (percent) of integers and of bytes per container kind.
struct BreakdownFractions {
    double full_chunk_ints, dense_chunk_ints, dense_block_ints, sparse_block_ints;
    double header_bytes, dense_chunk_bytes, dense_block_bytes, sparse_block_bytes;

    static BreakdownFractions from(const SpaceBreakdown& b) {
        double const ints = static_cast<double>(b.total_ints());
        double const bytes = static_cast<double>(b.total_bytes());
        auto pct = [](double part, double whole) { return whole == 0 ? 0.0 : 100.0 * part / whole; };
        return {pct(static_cast<double>(b.full_chunk_ints), ints), pct(static_cast<double>(b.dense_chunk_ints), ints),
                pct(static_cast<double>(b.dense_block_ints), ints), pct(static_cast<double>(b.sparse_block_ints), ints),
                pct(static_cast<double>(b.header_bytes), bytes), pct(static_cast<double>(b.dense_chunk_bytes), bytes),
                pct(static_cast<double>(b.dense_block_bytes), bytes),
                pct(static_cast<double>(b.sparse_block_bytes), bytes)};
    }
};

inline constexpr double kNotMeasured = std::numeric_limits<double>::quiet_NaN();

struct ReprMetrics {
    Repr repr = Repr::slicing;
    std::uint64_t integers = 0;
    std::uint64_t bytes = 0;
    double bits_per_int = 0;
    std::optional<BreakdownFractions> breakdown;  // slicing only
    double decode_ns_per_int = kNotMeasured;
    double and_us_per_query = kNotMeasured;
    double or_us_per_query = kNotMeasured;
    double access_ns_per_query = kNotMeasured;
    double next_geq_ns_per_query = kNotMeasured;
};

struct BenchOptions {
    std::vector<Repr> reprs{kAllReprs.begin(), kAllReprs.end()};
    std::vector<Op> ops{kAllOps.begin(), kAllOps.end()};
    unsigned runs = 10;
    std::string dataset = "synthetic";
    double density = 0;  // the filter threshold the collection was built with
};

struct BenchReport {
    std::string dataset;
    double density = 0;
    std::uint64_t seed = 0;
    unsigned runs = 0;
    std::string environment;
    std::vector<ReprMetrics> reprs;

    const ReprMetrics* find(Repr r) const noexcept {
        for (auto const& m : reprs) {
            if (m.repr == r) return &m;
        }
        return nullptr;
    }
};

namespace detail {

inline volatile std::uint64_t bench_sink = 0;

/// Mean wall-clock nanoseconds of `batch` over `runs` repetitions, after
/// one untimed warm-up pass.
template <class F>
double mean_batch_ns(unsigned runs, F&& batch) {
    bench_sink = bench_sink + batch();
    double total = 0;
    for (unsigned r = 0; r < runs; ++r) {
        auto const start = std::chrono::steady_clock::now();
        std::uint64_t const sink = batch();
        auto const stop = std::chrono::steady_clock::now();
        bench_sink = bench_sink + sink;
        total += std::chrono::duration<double, std::nano>(stop - start).count();
    }
    return total / runs;
}

template <Representation T>
ReprMetrics bench_one(Repr repr, const Collection& c, const Workload& w, const BenchOptions& opt) {
    auto const reps = build_all<T>(c);
    validate_against_oracle(c, reps, w, opt.ops, repr_name(repr));

    ReprMetrics m;
    m.repr = repr;
    m.integers = c.integer_count();
    SpaceBreakdown breakdown;
    std::uint64_t longest = 0;
    for (auto const& r : reps) {
        m.bytes += r.size_bytes();
        longest = std::max<std::uint64_t>(longest, r.size());
        if constexpr (std::is_same_v<T, SlicedSet>) breakdown += r.space_breakdown();
    }
    m.bits_per_int = m.integers == 0 ? 0.0 : 8.0 * static_cast<double>(m.bytes) / static_cast<double>(m.integers);
    if constexpr (std::is_same_v<T, SlicedSet>) m.breakdown = BreakdownFractions::from(breakdown);

    std::vector<std::uint32_t> buffer(2 * longest + 1);
    std::uint64_t point_queries = 0;
    for (auto const& p : w.access_positions) point_queries += p.size();
    for (Op op : opt.ops) {
        switch (op) {
            case Op::decode:
                m.decode_ns_per_int = mean_batch_ns(opt.runs, [&] {
                    std::uint64_t s = 0;
                    for (auto const& r : reps) s += r.decode(buffer);
                    return s;
                }) / static_cast<double>(m.integers);
                break;
            case Op::and_:
                if (w.pairs.empty()) break;
                m.and_us_per_query = mean_batch_ns(opt.runs, [&] {
                    std::uint64_t s = 0;
                    for (auto [i, j] : w.pairs) s += intersect(reps[i], reps[j], buffer);
                    return s;
                }) / 1e3 / static_cast<double>(w.pairs.size());
                break;
            case Op::or_:
                if (w.pairs.empty()) break;
                m.or_us_per_query = mean_batch_ns(opt.runs, [&] {
                    std::uint64_t s = 0;
                    for (auto [i, j] : w.pairs) s += unite(reps[i], reps[j], buffer);
                    return s;
                }) / 1e3 / static_cast<double>(w.pairs.size());
                break;
            case Op::access:
                if (point_queries == 0) break;
                m.access_ns_per_query = mean_batch_ns(opt.runs, [&] {
                    std::uint64_t s = 0;
                    for (std::size_t l = 0; l < reps.size(); ++l) {
                        for (std::uint32_t p : w.access_positions[l]) s += reps[l].access(p);
                    }
                    return s;
                }) / static_cast<double>(point_queries);
                break;
            case Op::next_geq:
                if (point_queries == 0) break;
                m.next_geq_ns_per_query = mean_batch_ns(opt.runs, [&] {
                    std::uint64_t s = 0;
                    for (std::size_t l = 0; l < reps.size(); ++l) {
                        for (std::uint32_t x : w.next_geq_keys[l]) s += reps[l].next_geq(x).value_or(kLimit);
                    }
                    return s;
                }) / static_cast<double>(point_queries);
                break;
        }
    }
    return m;
}

}  // namespace detail

inline std::string environment_notes() {
    std::ostringstream os;
#if defined(__VERSION__)
    os << "compiler=" << __VERSION__;
#endif
    os << ";simd_small_intersect=" << (kHasSimdSmallIntersect ? "on" : "off");
#if defined(__BMI2__)
    os << ";pdep=on";
#else
    os << ";pdep=off";
#endif
    os << ";pairs=uniform-over-lists;nextgeq_keys=uniform-in-[0,max]";
    return os.str();
}

/// Builds every requested representation, validates the whole workload
/// against the oracle, then times each operation.
inline BenchReport bench_run(const Collection& c, const Workload& w, const BenchOptions& opt) {
    if (opt.runs == 0) throw std::invalid_argument("runs must be positive");
    BenchReport report;
    report.dataset = opt.dataset;
    report.density = opt.density;
    report.seed = w.seed;
    report.runs = opt.runs;
    report.environment = environment_notes();
    for (Repr r : opt.reprs) {
        report.reprs.push_back(visit_repr(r, [&]<class T>() { return detail::bench_one<T>(r, c, w, opt); }));
    }
    return report;
}

/// One (representation, metric) measurement; the CSV/JSON row schema.
struct ReportRow {
    std::string repr;
    std::string metric;
    std::string dataset;
    double density = 0;
    double value = 0;
    std::string unit;
    unsigned runs = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

inline std::vector<ReportRow> report_rows(const BenchReport& r) {
    std::vector<ReportRow> rows;
    for (auto const& m : r.reprs) {
        auto add = [&](std::string metric, double value, std::string unit) {
            if (std::isnan(value)) return;
            rows.push_back({std::string(repr_name(m.repr)), std::move(metric), r.dataset, r.density, value,
                            std::move(unit), r.runs, r.seed});
        };
        add("space", m.bits_per_int, "bits/int");
        add("decode", m.decode_ns_per_int, "ns/int");
        add("and", m.and_us_per_query, "us/query");
        add("or", m.or_us_per_query, "us/query");
        add("access", m.access_ns_per_query, "ns/query");
        add("nextgeq", m.next_geq_ns_per_query, "ns/query");
        if (m.breakdown) {
            auto const& b = *m.breakdown;
            add("coverage_full_chunks", b.full_chunk_ints, "%ints");
            add("coverage_dense_chunks", b.dense_chunk_ints, "%ints");
            add("coverage_dense_blocks", b.dense_block_ints, "%ints");
            add("coverage_sparse_blocks", b.sparse_block_ints, "%ints");
            add("space_headers", b.header_bytes, "%bytes");
            add("space_dense_chunks", b.dense_chunk_bytes, "%bytes");
            add("space_dense_blocks", b.dense_block_bytes, "%bytes");
            add("space_sparse_blocks", b.sparse_block_bytes, "%bytes");
        }
    }
    return rows;
}

inline constexpr std::string_view kCsvHeader = "repr,metric,dataset,density,value,unit,runs,seed";

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline std::string to_csv(const BenchReport& r) {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (auto const& row : report_rows(r)) {
        os << row.repr << ',' << row.metric << ',' << row.dataset << ',' << format_double(row.density) << ','
           << format_double(row.value) << ',' << row.unit << ',' << row.runs << ',' << row.seed << '\n';
    }
    return os.str();
}

inline std::vector<ReportRow> parse_csv(std::string_view text) {
    std::vector<ReportRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("unexpected CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        if (f.size() != 8) throw std::invalid_argument("CSV row must have 8 fields");
        rows.push_back({f[0], f[1], f[2], std::stod(f[3]), std::stod(f[4]), f[5],
                        static_cast<unsigned>(std::stoul(f[6])), std::stoull(f[7])});
    }
    return rows;
}

inline nlohmann::json to_json(const BenchReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (auto const& row : report_rows(r)) {
        rows.push_back({{"repr", row.repr},
                        {"metric", row.metric},
                        {"dataset", row.dataset},
                        {"density", row.density},
                        {"value", row.value},
                        {"unit", row.unit},
                        {"runs", row.runs},
                        {"seed", row.seed}});
    }
    return {{"environment", r.environment}, {"rows", rows}};
}

inline std::vector<ReportRow> rows_from_json(const nlohmann::json& j) {
    std::vector<ReportRow> rows;
    for (auto const& e : j.at("rows")) {
        rows.push_back({e.at("repr").get<std::string>(), e.at("metric").get<std::string>(),
                        e.at("dataset").get<std::string>(), e.at("density").get<double>(),
                        e.at("value").get<double>(), e.at("unit").get<std::string>(), e.at("runs").get<unsigned>(),
                        e.at("seed").get<std::uint64_t>()});
    }
    return rows;
}

}  // namespace slicing
