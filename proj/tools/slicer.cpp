// Command-line front end: synthetic collections, index building, space
// statistics, benchmarks and oracle verification.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "slicing/slicing.hpp"

namespace {

using namespace slicing;

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string item; std::getline(in, item, ',');) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void ensure_parent(const std::filesystem::path& p) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text;
}

Collection load_filtered(const std::string& input, double threshold, DensityFilterStats* stats = nullptr) {
    auto filtered = filter_by_density(read_collection(input), threshold);
    if (stats) *stats = filtered.stats;
    return std::move(filtered.collection);
}

std::vector<Repr> parse_reprs(const std::string& list) {
    std::vector<Repr> out;
    for (auto const& name : split(list)) out.push_back(parse_repr(name));
    return out;
}

void print_breakdown(const SpaceBreakdown& b) {
    auto const f = BreakdownFractions::from(b);
    std::printf("coverage (%% of integers): FC %.2f  DC %.2f  DB %.2f  SB %.2f\n", f.full_chunk_ints,
                f.dense_chunk_ints, f.dense_block_ints, f.sparse_block_ints);
    std::printf("space    (%% of bytes):    H %.2f  DC %.2f  DB %.2f  SB %.2f\n", f.header_bytes,
                f.dense_chunk_bytes, f.dense_block_bytes, f.sparse_block_bytes);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slicer: compressed sorted-integer sets (slicing, pc-ef, roaring-lite)"};
    app.require_subcommand(1);

    struct {
        std::size_t lists = 100;
        std::uint32_t universe = 1u << 24;
        std::string densities = "0.001";
        double run_prob = 0.5;
        double gap_mean = 16;
        std::uint64_t seed = 42;
        std::string output;
    } gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic clustered collection");
    gen_cmd->add_option("--lists", gen.lists, "number of lists per density level");
    gen_cmd->add_option("--universe", gen.universe, "number of documents");
    gen_cmd->add_option("--density", gen.densities, "target density, or a comma-separated list of levels");
    gen_cmd->add_option("--run-prob", gen.run_prob, "probability of a unit gap");
    gen_cmd->add_option("--gap-mean", gen.gap_mean, "mean of the geometric gaps before scaling");
    gen_cmd->add_option("--seed", gen.seed);
    gen_cmd->add_option("--output", gen.output)->required();

    struct {
        std::string input, repr = "slicing", output;
        double filter = 0;
    } build;
    auto* build_cmd = app.add_subcommand("build", "encode a collection into an index file");
    build_cmd->add_option("--input", build.input)->required();
    build_cmd->add_option("--repr", build.repr, "slicing | pc-ef | roaring-lite");
    build_cmd->add_option("--density-filter", build.filter, "keep lists with density > d");
    build_cmd->add_option("--output", build.output)->required();

    std::string stats_index;
    auto* stats_cmd = app.add_subcommand("stats", "report bits per integer and the space breakdown");
    stats_cmd->add_option("--index", stats_index)->required();

    struct {
        std::string input, reprs = "slicing,pc-ef,roaring-lite", ops = "decode,and,or,access,nextgeq";
        std::string format = "csv", output, dataset;
        unsigned runs = 10;
        std::uint64_t seed = 1;
        double filter = 0;
        std::size_t pairs = 1000, queries = 1000;
    } bench;
    auto* bench_cmd = app.add_subcommand("bench", "time decode/AND/OR/access/nextGEQ");
    bench_cmd->add_option("--input", bench.input)->required();
    bench_cmd->add_option("--reprs", bench.reprs);
    bench_cmd->add_option("--ops", bench.ops);
    bench_cmd->add_option("--runs", bench.runs);
    bench_cmd->add_option("--seed", bench.seed);
    bench_cmd->add_option("--density-filter", bench.filter);
    bench_cmd->add_option("--pairs", bench.pairs, "number of AND/OR list pairs");
    bench_cmd->add_option("--queries", bench.queries, "access/nextGEQ queries per list");
    bench_cmd->add_option("--dataset", bench.dataset, "dataset label (defaults to the input file name)");
    bench_cmd->add_option("--format", bench.format)->check(CLI::IsMember({"csv", "json"}));
    bench_cmd->add_option("--output", bench.output, "output file (stdout when omitted)");

    struct {
        std::string input, reprs = "slicing,pc-ef,roaring-lite";
        std::uint64_t seed = 1;
        double filter = 0;
    } verify;
    auto* verify_cmd = app.add_subcommand("verify", "differential test of every representation against the oracle");
    verify_cmd->add_option("--input", verify.input)->required();
    verify_cmd->add_option("--reprs", verify.reprs);
    verify_cmd->add_option("--seed", verify.seed);
    verify_cmd->add_option("--density-filter", verify.filter);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_cmd->parsed()) {
            Collection all;
            all.universe = gen.universe;
            std::uint64_t seed = gen.seed;
            for (auto const& level : split(gen.densities)) {
                auto part = generate_clustered(gen.lists, gen.universe, std::stod(level),
                                               ClusterParams{gen.run_prob, gen.gap_mean}, seed++);
                for (auto& l : part.lists) all.lists.push_back(std::move(l));
            }
            ensure_parent(gen.output);
            write_collection(all, gen.output);
            std::printf("wrote %zu lists, %llu integers to %s\n", all.lists.size(),
                        static_cast<unsigned long long>(all.integer_count()), gen.output.c_str());
        } else if (build_cmd->parsed()) {
            DensityFilterStats fs;
            auto const c = load_filtered(build.input, build.filter, &fs);
            auto const index = build_index(c, parse_repr(build.repr));
            ensure_parent(build.output);
            write_index(index, build.output);
            std::printf("retained %zu of %zu lists (%.2f%% of integers); wrote %s\n", fs.retained_lists,
                        fs.total_lists, fs.retained_int_percent(), build.output.c_str());
        } else if (stats_cmd->parsed()) {
            auto const s = index_stats(read_index(stats_index));
            std::printf("repr %s: %zu lists, %llu integers, %llu bytes, %.3f bits/int\n",
                        std::string(repr_name(s.repr)).c_str(), s.lists,
                        static_cast<unsigned long long>(s.integers), static_cast<unsigned long long>(s.bytes),
                        s.bits_per_int());
            if (s.breakdown) print_breakdown(*s.breakdown);
        } else if (bench_cmd->parsed()) {
            auto const c = load_filtered(bench.input, bench.filter);
            BenchOptions opt;
            opt.reprs = parse_reprs(bench.reprs);
            opt.ops.clear();
            for (auto const& op : split(bench.ops)) opt.ops.push_back(parse_op(op));
            opt.runs = bench.runs;
            opt.density = bench.filter;
            opt.dataset = bench.dataset.empty() ? std::filesystem::path(bench.input).stem().string() : bench.dataset;
            auto const w = make_workload(c, bench.seed, bench.pairs, bench.queries);
            auto const report = bench_run(c, w, opt);
            write_text(bench.output, bench.format == "csv" ? to_csv(report) : to_json(report).dump(2) + "\n");
        } else if (verify_cmd->parsed()) {
            auto const c = load_filtered(verify.input, verify.filter);
            auto const w = make_workload(c, verify.seed);
            std::vector<Op> const ops(kAllOps.begin(), kAllOps.end());
            for (Repr r : parse_reprs(verify.reprs)) {
                visit_repr(r, [&]<class T>() { validate_against_oracle(c, build_all<T>(c), w, ops, repr_name(r)); });
                std::printf("%s: ok (%zu lists)\n", std::string(repr_name(r)).c_str(), c.lists.size());
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
