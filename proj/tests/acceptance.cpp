// Acceptance checks, one PASS/WARN/FAIL line per criterion. Exit status is
// nonzero iff some criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "test_util.hpp"

using namespace slicing;

namespace {

enum class Verdict { pass, warn, fail };

struct Outcome {
    Verdict verdict;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& check) {
    auto const start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char const* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::warn ? "WARN" : "FAIL";
    if (o.verdict == Verdict::fail) ++failures;
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", tag, id, title, o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

/// Randomized corpus: densities log-uniform in [1e-4, 1e-1], lengths
/// log-uniform up to 2^15, universes up to 2^26; half uniform gaps, half
/// clustered.
std::vector<SortedSequence> random_corpus(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<SortedSequence> out;
    out.reserve(count);
    std::uint32_t const max_universe = (1u << 26) - 1;
    for (std::size_t i = 0; i < count; ++i) {
        double const d = std::pow(10.0, -4.0 + 3.0 * unit(rng));
        auto n = static_cast<std::size_t>(std::exp2(15.0 * unit(rng)));
        n = std::clamp<std::size_t>(n, 1, static_cast<std::size_t>(d * max_universe));
        std::uint64_t max_value = std::clamp<std::uint64_t>(std::llround(static_cast<double>(n) / d), n - 1, max_universe);
        ClusterParams p{i % 2 ? 0.0 : 0.3 + 0.65 * unit(rng), 1.0 + 63.0 * unit(rng)};
        auto values = detail::clustered_list(n, max_value, p, rng);
        std::uint32_t const u = static_cast<std::uint32_t>(
            std::uniform_int_distribution<std::uint64_t>(max_value, max_universe)(rng));
        out.push_back(SortedSequence::validate(std::move(values), u));
    }
    // chunk- and block-rich sets, so full/dense chunks and dense blocks are exercised
    for (std::size_t i = 0; i < count / 20; ++i) {
        auto v = testing_util::clustered_values(rng, max_universe);
        out.push_back(SortedSequence::validate(std::move(v), max_universe));
    }
    return out;
}

template <class T>
std::vector<T> build_all_lists(const std::vector<SortedSequence>& corpus) {
    std::vector<T> out;
    out.reserve(corpus.size());
    for (auto const& s : corpus) out.push_back(T::build(s));
    return out;
}

Outcome sample_fidelity() {
    auto const s = testing_util::sample();
    auto const pc = partition_by_cardinality(s, 8);
    auto const pu = partition_by_universe(s, 8);
    std::vector<std::vector<std::uint32_t>> const pc_expected = {{0, 1, 4, 5, 6, 17, 18, 19},
                                                                 {20, 21, 22, 24, 27, 31, 34, 35},
                                                                 {37, 38, 39, 40, 41, 42, 43, 44},
                                                                 {45, 46, 47, 50, 52, 53, 54, 55}};
    std::vector<std::vector<std::uint32_t>> const pu_expected = {{0, 1, 4, 5, 6},       {},
                                                                 {17, 18, 19, 20, 21, 22}, {24, 27, 31},
                                                                 {34, 35, 37, 38, 39},  {40, 41, 42, 43, 44, 45, 46, 47},
                                                                 {50, 52, 53, 54, 55}};
    bool const ok = pc.parts == pc_expected && pu.parts == pu_expected;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("by cardinality %zu parts, by universe %zu parts (part [8,16) has %zu values)", pc.parts.size(),
                pu.parts.size(), pu.parts.size() > 1 ? pu.parts[1].size() : 99)};
}

template <class T>
std::string check_repr(const std::vector<SortedSequence>& corpus, const std::vector<T>& reps,
                       const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::mt19937_64& rng,
                       std::uint64_t& queries) {
    std::vector<std::uint32_t> buf;
    for (std::size_t l = 0; l < corpus.size(); ++l) {
        auto const v = corpus[l].values();
        auto const& r = reps[l];
        buf.assign(v.size(), 0);
        if (r.decode(buf) != v.size() || !std::equal(v.begin(), v.end(), buf.begin())) {
            return fmt("decode mismatch on list %zu", l);
        }
        std::uniform_int_distribution<std::size_t> pos(0, v.size() - 1);
        std::uniform_int_distribution<std::uint32_t> key(0, v.back() == UINT32_MAX ? v.back() : v.back() + 1);
        for (int q = 0; q < 32; ++q) {
            std::size_t const i = pos(rng);
            if (r.access(i) != reference::access(v, i)) return fmt("access(%zu) mismatch on list %zu", i, l);
            std::uint32_t const x = key(rng);
            if (r.next_geq(x) != reference::next_geq(v, x)) return fmt("nextGEQ(%u) mismatch on list %zu", x, l);
            queries += 2;
        }
    }
    for (auto [i, j] : pairs) {
        auto const a = corpus[i].values(), b = corpus[j].values();
        buf.assign(std::min(a.size(), b.size()), 0);
        buf.resize(intersect(reps[i], reps[j], buf));
        if (buf != reference::intersect(a, b)) return fmt("AND mismatch on pair %zu,%zu", i, j);
        buf.assign(a.size() + b.size(), 0);
        buf.resize(unite(reps[i], reps[j], buf));
        if (buf != reference::unite(a, b)) return fmt("OR mismatch on pair %zu,%zu", i, j);
        queries += 2;
    }
    return {};
}

/// Pairs over the corpus; the second half are correlated (the second list is
/// derived from the first, appended to the corpus).
std::vector<std::pair<std::size_t, std::size_t>> make_pairs(std::vector<SortedSequence>& corpus, std::size_t count,
                                                            std::mt19937_64& rng) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
    for (std::size_t k = 0; k < count / 2; ++k) pairs.emplace_back(pick(rng), pick(rng));
    std::bernoulli_distribution keep(0.5);
    for (std::size_t k = 0; k < count - count / 2; ++k) {
        std::size_t const i = pick(rng);
        auto const v = corpus[i].values();
        std::vector<std::uint32_t> w;
        for (auto x : v) {
            if (keep(rng) && (w.empty() || w.back() < x)) w.push_back(x);
            if (keep(rng) && x + 1 < corpus[i].universe() && (w.empty() || w.back() < x + 1)) w.push_back(x + 1);
        }
        if (w.empty()) w.push_back(v.front());
        corpus.push_back(SortedSequence::validate(std::move(w), corpus[i].universe()));
        pairs.emplace_back(i, corpus.size() - 1);
    }
    return pairs;
}

Outcome oracle_equivalence(std::vector<SortedSequence>& corpus, std::size_t base_lists) {
    std::mt19937_64 rng(77);
    auto const pairs = make_pairs(corpus, 1000, rng);
    std::uint64_t queries = 0;
    std::string err = check_repr(corpus, build_all_lists<SlicedSet>(corpus), pairs, rng, queries);
    if (err.empty()) err = check_repr(corpus, build_all_lists<PcEfList>(corpus), pairs, rng, queries);
    if (err.empty()) err = check_repr(corpus, build_all_lists<RoaringLiteSet>(corpus), pairs, rng, queries);
    if (!err.empty()) return {Verdict::fail, err};
    std::uint64_t ints = 0;
    for (auto const& s : corpus) ints += s.size();
    return {Verdict::pass, fmt("%zu sequences (%zu random + %zu correlated), %llu integers, %zu pairs, %llu queries, "
                               "3 representations",
                               corpus.size(), base_lists, corpus.size() - base_lists,
                               static_cast<unsigned long long>(ints), pairs.size(),
                               static_cast<unsigned long long>(queries))};
}

unsigned phi_by_search(std::uint64_t u, std::uint64_t n) {
    unsigned phi = 0;
    while (n * (std::uint64_t{1} << (phi + 1)) <= u) ++phi;
    return phi;
}

Outcome ef_formula(const std::vector<SortedSequence>& corpus) {
    auto const hand = ef_encode_partition(std::vector<std::uint32_t>{2, 3, 5, 7, 11, 13, 24}, 24);
    if (hand.low_bits != 1 || hand.bit_size() != 26) return {Verdict::fail, "hand-checked partition differs"};
    std::uint64_t partitions = 0;
    for (auto const& s : corpus) {
        auto const l = PcEfList::build(s);
        std::size_t payload = 0;
        for (std::size_t p = 0; p < l.partition_count(); ++p) {
            std::uint64_t const n = l.partition_size(p);
            std::uint64_t const u = l.skip_pointers()[p] - l.partition_base(p);
            unsigned const phi = phi_by_search(u, n);
            std::uint64_t const expected = n * phi + n + (u + (std::uint64_t{1} << phi) - 1) / (std::uint64_t{1} << phi);
            if (l.partition(p).bit_size() != expected) {
                return {Verdict::fail, fmt("partition with n=%llu u=%llu: %llu bits, expected %llu",
                                           static_cast<unsigned long long>(n), static_cast<unsigned long long>(u),
                                           static_cast<unsigned long long>(l.partition(p).bit_size()),
                                           static_cast<unsigned long long>(expected))};
            }
            std::size_t const next = p + 1 < l.partition_count() ? l.partition_offsets()[p + 1] : l.payload_bytes();
            if (next - l.partition_offsets()[p] != (expected + 7) / 8) return {Verdict::fail, "payload not byte-rounded"};
            payload += (expected + 7) / 8;
            ++partitions;
        }
        if (l.size_bytes() != 8 * l.partition_count() + payload) return {Verdict::fail, "sizeBytes aggregation differs"};
    }
    return {Verdict::pass, fmt("%llu partitions match n*phi + n + ceil(u/2^phi); 26-bit example reproduced",
                               static_cast<unsigned long long>(partitions))};
}

Outcome slicing_accounting(const std::vector<SortedSequence>& corpus) {
    std::uint64_t chunks = 0, dense_heavy = 0, blocks = 0;
    for (auto const& s : corpus) {
        auto const set = SlicedSet::build(s);
        std::size_t total = 2;
        for (auto c = set.chunks(); !c.at_end(); c.next()) {
            auto const v = c.payload();
            auto const& h = v.header;
            total += 8 + h.encoded_bytes;
            ++chunks;
            switch (h.type) {
                case ChunkType::full:
                    if (h.encoded_bytes != 0) return {Verdict::fail, "full chunk with payload"};
                    break;
                case ChunkType::dense:
                    if (h.cardinality >= (1u << 15)) {
                        ++dense_heavy;
                        if (8.0 * h.encoded_bytes / h.cardinality > 2.0) return {Verdict::fail, "dense chunk above 2 bits/int"};
                    }
                    break;
                case ChunkType::sparse: {
                    if (h.encoded_bytes >= 8192) return {Verdict::fail, "sparse chunk payload >= 8192 bytes"};
                    const std::uint8_t* expected_data = v.data + 2 * h.block_count;
                    for (auto b = v.blocks(); !b.at_end(); b.next()) {
                        auto const bv = b.payload();
                        if (bv.data != expected_data) return {Verdict::fail, "block payload offset mismatch"};
                        expected_data += bv.cardinality < 31 ? bv.cardinality : 32;
                        ++blocks;
                    }
                    if (expected_data != v.data + h.encoded_bytes) return {Verdict::fail, "sparse chunk size mismatch"};
                    break;
                }
            }
        }
        if (total != set.size_bytes()) return {Verdict::fail, "serialized size != 2 + sum(8 + encodedBytes)"};
    }
    return {Verdict::pass, fmt("%llu chunks (%llu dense with >= 2^15 values), %llu blocks",
                               static_cast<unsigned long long>(chunks), static_cast<unsigned long long>(dense_heavy),
                               static_cast<unsigned long long>(blocks))};
}

Outcome breakdown_consistency(const std::vector<SortedSequence>& corpus) {
    SpaceBreakdown all;
    for (auto const& s : corpus) {
        auto const set = SlicedSet::build(s);
        auto const b = set.space_breakdown();
        if (b.total_ints() != s.size()) return {Verdict::fail, "coverage counts do not sum to n"};
        if (b.total_bytes() != set.size_bytes()) return {Verdict::fail, "byte attribution does not sum to size"};
        all += b;
    }
    auto const f = BreakdownFractions::from(all);
    return {Verdict::pass, fmt("%zu sets; coverage FC %.2f%% DC %.2f%% DB %.2f%% SB %.2f%%", corpus.size(),
                               f.full_chunk_ints, f.dense_chunk_ints, f.dense_block_ints, f.sparse_block_ints)};
}

Outcome serialization(const std::vector<SortedSequence>& corpus) {
    auto bytes_of = [](std::span<const std::uint8_t> s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };
    auto const sample = SlicedSet::build(testing_util::sample());
    if (bytes_of(sample.serialize()) !=
        testing_util::from_hex("00000000 1f002200 0300001f 73007e89 ecfff400" + std::string(48, '0'))) {
        return {Verdict::fail, "sample set slicing bytes differ"};
    }
    std::vector<std::uint32_t> all(65536);
    for (std::uint32_t i = 0; i < 65536; ++i) all[i] = i;
    if (bytes_of(SlicedSet::build(testing_util::seq(all)).serialize()) != testing_util::from_hex("00000000ffff00000100")) {
        return {Verdict::fail, "full-chunk bytes differ"};
    }
    std::vector<std::uint32_t> mixed = {5, 300, 301};
    for (std::uint32_t x = 65536; x < 131072; x += 2) mixed.push_back(x);
    for (std::uint32_t x = 3 * 65536; x < 4 * 65536; ++x) mixed.push_back(x);
    for (std::uint32_t j = 0; j < 40; ++j) mixed.push_back(5 * 65536 + 7 * 256 + 5 * j);
    if (bytes_of(SlicedSet::build(testing_util::seq(mixed)).serialize()) !=
        read_file(SLICING_GOLDEN_DIR "/mixed_slicing.bin")) {
        return {Verdict::fail, "mixed-set bytes differ"};
    }
    for (auto const& s : corpus) {
        auto const a = SlicedSet::build(s);
        if (!(SlicedSet::deserialize(a.serialize()) == a)) return {Verdict::fail, "slicing round trip"};
        auto const r = RoaringLiteSet::build(s);
        if (!(RoaringLiteSet::deserialize(r.serialize()) == r)) return {Verdict::fail, "roaring-lite round trip"};
        auto const p = PcEfList::build(s);
        if (PcEfList::deserialize(p.serialize()).serialize() != p.serialize()) return {Verdict::fail, "pc-ef round trip"};
    }
    return {Verdict::pass, fmt("44-byte, 10-byte and 8267-byte fixtures match; %zu random sets round-trip in 3 formats",
                               corpus.size())};
}

Outcome kernel_equivalence() {
    if (!kHasSimdSmallIntersect) return {Verdict::pass, "vectorized kernel not built; scalar kernel only"};
    std::vector<std::vector<std::uint8_t>> subsets;
    std::uint8_t const symbols[8] = {0, 1, 2, 7, 100, 128, 254, 255};
    for (unsigned mask = 0; mask < 256; ++mask) {
        if (std::popcount(mask) > 4) continue;
        std::vector<std::uint8_t> s;
        for (unsigned b = 0; b < 8; ++b) {
            if (mask & (1u << b)) s.push_back(symbols[b]);
        }
        subsets.push_back(s);
    }
    std::uint32_t x[32], y[32];
    std::uint64_t compared = 0;
    for (std::uint32_t base : {0u, 0xFFFFFF00u}) {
        for (auto const& l : subsets) {
            for (auto const& r : subsets) {
                std::size_t const a = small_intersect_simd(l.data(), l.size(), r.data(), r.size(), base, x);
                std::size_t const b = small_intersect_scalar(l.data(), l.size(), r.data(), r.size(), base, y);
                if (a != b || !std::equal(x, x + a, y)) return {Verdict::fail, "exhaustive sweep mismatch"};
                ++compared;
            }
        }
    }
    std::mt19937_64 rng(1234);
    std::vector<std::uint8_t> pool(256);
    for (int i = 0; i < 256; ++i) pool[i] = static_cast<std::uint8_t>(i);
    std::uniform_int_distribution<std::size_t> len(0, 30);
    for (int t = 0; t < 100000; ++t) {
        std::vector<std::uint8_t> l, r;
        std::sample(pool.begin(), pool.end(), std::back_inserter(l), len(rng), rng);
        std::sample(pool.begin(), pool.end(), std::back_inserter(r), len(rng), rng);
        std::uint32_t const base = static_cast<std::uint32_t>(rng()) & ~0xFFu;
        std::size_t const a = small_intersect_simd(l.data(), l.size(), r.data(), r.size(), base, x);
        std::size_t const b = small_intersect_scalar(l.data(), l.size(), r.data(), r.size(), base, y);
        if (a != b || !std::equal(x, x + a, y)) return {Verdict::fail, "random pair mismatch"};
        ++compared;
    }
    return {Verdict::pass, fmt("%llu array pairs agree (exhaustive lengths 0-4 over 8 symbols, 2 bases, 1e5 random)",
                               static_cast<unsigned long long>(compared))};
}

Outcome ordering() {
    Collection c;
    c.universe = 1u << 24;
    std::uint64_t seed = 8;
    for (double d : {1e-2, 1e-3}) {
        auto part = generate_clustered(250, c.universe, d, {}, seed++);
        for (auto& l : part.lists) c.lists.push_back(std::move(l));
    }
    auto const w = make_workload(c, 99, 1000, 200);
    BenchOptions opt;
    opt.runs = 3;
    opt.dataset = "acceptance";
    auto const r = bench_run(c, w, opt);
    auto const* s = r.find(Repr::slicing);
    auto const* p = r.find(Repr::pc_ef);
    auto const* o = r.find(Repr::roaring_lite);
    double const slicing_speedup = p->and_us_per_query / s->and_us_per_query;
    double const roaring_speedup = p->and_us_per_query / o->and_us_per_query;
    bool const and_ok = slicing_speedup > 1.0 && roaring_speedup > 1.0;
    bool const next_ok = s->next_geq_ns_per_query <= s->access_ns_per_query;
    std::string const detail =
        fmt("%zu lists; AND us/query slicing %.2f, roaring-lite %.2f, pc-ef %.2f (speedups %.2fx, %.2fx); slicing "
            "nextGEQ %.1f ns vs access %.1f ns",
            c.lists.size(), s->and_us_per_query, o->and_us_per_query, p->and_us_per_query, slicing_speedup,
            roaring_speedup, s->next_geq_ns_per_query, s->access_ns_per_query);
    if (!and_ok || !next_ok) return {Verdict::fail, detail};
    if (slicing_speedup < 2.0 || roaring_speedup < 2.0) return {Verdict::warn, detail + " (speedup below 2x)"};
    return {Verdict::pass, detail};
}

Outcome density_filtering() {
    Collection c;
    c.universe = 1u << 24;
    std::uint64_t seed = 3;
    for (double d : {0.05, 0.005, 0.0005, 0.00005}) {
        auto part = generate_clustered(100, c.universe, d, {}, seed++);
        for (auto& l : part.lists) c.lists.push_back(std::move(l));
    }
    std::vector<double> pct;
    for (double d : {1e-2, 1e-3, 1e-4}) {
        auto const f = filter_by_density(c, d);
        std::uint64_t ints = 0, lists = 0;
        for (auto const& l : c.lists) {
            if (static_cast<double>(l.size()) / static_cast<double>(std::max<std::uint32_t>(l.back(), 1)) > d) {
                ints += l.size();
                ++lists;
            }
        }
        if (f.stats.retained_ints != ints || f.stats.retained_lists != lists) {
            return {Verdict::fail, fmt("counts differ at d=%g", d)};
        }
        pct.push_back(f.stats.retained_int_percent());
    }
    bool const ok = pct[0] <= pct[1] && pct[1] <= pct[2];
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("retained integers %.2f%% (d=1e-2) <= %.2f%% (1e-3) <= %.2f%% (1e-4)", pct[0], pct[1], pct[2])};
}

}  // namespace

int main() {
    std::printf("acceptance: %s\n", environment_notes().c_str());
    report(1, "sample set partitionings", sample_fidelity);

    auto corpus = random_corpus(10000, 2026);
    std::size_t const base_lists = corpus.size();
    report(2, "oracle equivalence", [&] { return oracle_equivalence(corpus, base_lists); });
    report(3, "Elias-Fano space formula", [&] { return ef_formula(corpus); });
    report(4, "slicing accounting", [&] { return slicing_accounting(corpus); });
    report(5, "breakdown consistency", [&] { return breakdown_consistency(corpus); });
    report(6, "serialization", [&] { return serialization(corpus); });
    report(7, "small-array kernel equivalence", kernel_equivalence);
    report(8, "ordering properties", ordering);
    report(9, "density filtering", density_filtering);

    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "OK" : "FAILED", failures);
    return failures == 0 ? 0 : 1;
}
