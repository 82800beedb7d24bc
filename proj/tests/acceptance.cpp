// Acceptance suite: one test case per release criterion, each printing a
// [PASS]/[FAIL] line. Thresholds and tolerances are pinned in the assertions.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "itertrace/itertrace.hpp"

#include "oracles.hpp"

using namespace itertrace;

namespace {

class CriterionReporter : public Catch::EventListenerBase {
public:
    using Catch::EventListenerBase::EventListenerBase;

    void testCaseEnded(const Catch::TestCaseStats& stats) override {
        const bool ok = stats.totals.assertions.failed == 0;
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", stats.testInfo->name.c_str());
        std::fflush(stdout);
    }
};
CATCH_REGISTER_LISTENER(CriterionReporter)

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::int64_t peak_rss_bytes() {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            std::istringstream fields(line.substr(6));
            std::int64_t kb = 0;
            fields >> kb;
            return kb * 1024;
        }
    }
    return -1;
}

std::vector<std::int32_t> tokens_of(const std::string& s) {
    std::vector<std::int32_t> out;
    for (char c : s) out.push_back(static_cast<std::int32_t>(c));
    return out;
}

std::vector<std::int32_t> path_of(const SuffixTree& tree, const SuffixTree::Node& node) {
    const auto& text = tree.text();
    return {text.begin() + node.first_leaf, text.begin() + node.first_leaf + node.depth};
}

struct PipelineFiles {
    std::filesystem::path trace, truth, summary, details;
};

PipelineFiles run_full_pipeline(const SynthConfig& cfg, AnalyzeOptions opt,
                                const std::string& tag) {
    const auto dir = oracle::test_dir("acceptance");
    PipelineFiles files{dir / (tag + ".csv"), dir / (tag + "_truth.json"),
                        dir / (tag + "_summary.json"), dir / (tag + "_details.csv")};
    generate_trace(cfg, files.trace, files.truth);
    auto [trace, ingest] = parse_trace(files.trace);
    auto result = analyze_trace(std::move(trace), files.trace.string(), opt);
    render_report(result.report, result.details, files.summary, files.details);
    return files;
}

SynthConfig random_recovery_config(std::mt19937_64& rng, int index) {
    SynthConfig cfg;
    cfg.seed = 77'000 + static_cast<std::uint64_t>(index);
    cfg.pattern_len = 5 + static_cast<std::int64_t>(rng() % 46);    // 5..50
    cfg.iterations = 50 + static_cast<std::int64_t>(rng() % 951);   // 50..1000
    cfg.insert_prob = static_cast<double>(rng() % 31) / 100.0;      // 0..0.30
    cfg.max_inserts = static_cast<std::int64_t>(rng() % 3);         // 0..2
    cfg.init_ops = 1 + static_cast<std::int64_t>(rng() % 10);
    cfg.vocab_size = cfg.pattern_len + 1 + static_cast<std::int64_t>(rng() % 8);
    cfg.kernel_duration_ns = 2000 + static_cast<std::int64_t>(rng() % 2000);
    cfg.kernel_jitter_ns =
        static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(cfg.kernel_duration_ns / 4));
    cfg.intra_gap_ns = 500 + static_cast<std::int64_t>(rng() % 1000);
    cfg.interval_gap_ns = 4000 + static_cast<std::int64_t>(rng() % 8000);
    cfg.interval_jitter_ns =
        static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(cfg.interval_gap_ns / 4));
    cfg.htod_bytes_per_iter = 1024 + static_cast<std::int64_t>(rng() % 8192);
    return cfg;
}

}  // namespace

TEST_CASE("criterion 1: suffix-tree fidelity on banana") {
    const auto tokens = tokens_of("banana");
    const auto tree = SuffixTree(std::span<const std::int32_t>(tokens), -1);
    REQUIRE(tree.leaf_node_count() == 7);
    REQUIRE(tree.internal_node_count() == 4);
    REQUIRE(tree.occurrences(tokens_of("ana")) == 2);
}

TEST_CASE("criterion 2: leaf counts match the brute-force count oracle") {
    std::mt19937_64 rng(1001);
    std::int64_t mismatches = 0;
    std::int64_t nodes_checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto alphabet = 2 + static_cast<std::int32_t>(rng() % 7);  // 2..8
        const auto s = oracle::random_tokens(rng, 200, alphabet);
        const auto tree = SuffixTree(std::span<const std::int32_t>(s), -1);
        for (const auto& node : tree.nodes()) {
            if (node.is_leaf() || node.parent < 0) continue;
            ++nodes_checked;
            if (node.leaf_count != oracle::count_occurrences(s, path_of(tree, node))) {
                ++mismatches;
            }
        }
    }
    REQUIRE(nodes_checked > 0);
    REQUIRE(mismatches == 0);
}

TEST_CASE("criterion 3: matcher agrees with the brute-force scanner") {
    std::mt19937_64 rng(1002);
    std::int64_t mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s = oracle::random_tokens(rng, 200, 2 + static_cast<std::int32_t>(rng() % 5));
        const std::size_t plen = 1 + rng() % 10;
        std::vector<std::int32_t> p;
        if (s.size() >= plen && rng() % 2) {
            const std::size_t at = rng() % (s.size() - plen + 1);
            p.assign(s.begin() + static_cast<std::ptrdiff_t>(at),
                     s.begin() + static_cast<std::ptrdiff_t>(at + plen));
        } else {
            p = oracle::random_tokens(rng, plen, 4);
        }
        const auto k0 = static_cast<std::int64_t>(rng() % 4);

        const auto got = approx_match(std::span<const std::int32_t>(s),
                                      std::span<const std::int32_t>(p), MatchConfig{k0});
        const auto want = oracle::greedy_match(s, p, k0);
        if (got.size() != want.size()) {
            ++mismatches;
            continue;
        }
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (got[i].start_token != want[i].start || got[i].end_token != want[i].end ||
                got[i].extra != want[i].extra) {
                ++mismatches;
            }
        }
    }
    REQUIRE(mismatches == 0);
}

TEST_CASE("criterion 4: end-to-end recovery on 100 random synthetic traces") {
    std::mt19937_64 rng(1003);
    int recovered = 0;
    for (int index = 0; index < 100; ++index) {
        const auto cfg = random_recovery_config(rng, index);
        AnalyzeOptions opt;
        opt.loops = {cfg.iterations};
        opt.k0 = cfg.max_inserts;
        const auto files = run_full_pipeline(cfg, opt, "recovery_" + std::to_string(index));
        const auto summary = nlohmann::json::parse(read_file(files.summary));
        const auto details = parse_details_csv(read_file(files.details));
        const auto truth = nlohmann::json::parse(read_file(files.truth));
        const auto violations = verify_against_truth(summary, details, truth);
        if (violations.empty()) {
            ++recovered;
        } else {
            UNSCOPED_INFO("config " << index << ": " << violations.front());
        }
    }
    REQUIRE(recovered == 100);
}

TEST_CASE("criterion 5: conservation identity on synthetic traces") {
    std::mt19937_64 rng(1004);
    for (int index = 0; index < 20; ++index) {
        auto cfg = random_recovery_config(rng, 500 + index);
        cfg.iterations = std::min<std::int64_t>(cfg.iterations, 200);
        if (index % 3 == 1) {
            cfg.pathology = Pathology::graph_growth;
            cfg.pathology_factor = 20.0;
        } else if (index % 3 == 2) {
            cfg.pathology = Pathology::oversize_copy;
            cfg.pathology_factor = 3.0;
        }
        AnalyzeOptions opt;
        opt.loops = {cfg.iterations};
        opt.k0 = cfg.max_inserts;
        const auto files = run_full_pipeline(cfg, opt, "conserve_" + std::to_string(index));
        const auto details = parse_details_csv(read_file(files.details));
        REQUIRE_FALSE(details.empty());

        std::int64_t durations = 0, intervals = 0;
        for (const auto& row : details) {
            durations += row.t_end_ns - row.t_start_ns;
            if (row.interval_ns) intervals += *row.interval_ns;
        }
        const auto whole = details.back().t_end_ns - details.front().t_start_ns;
        REQUIRE(whole == durations + intervals);  // exact, no tolerance
    }
}

TEST_CASE("criterion 6: diagnosis reproduction for the three planted cases") {
    int correct = 0;

    {
        SynthConfig cfg;
        cfg.seed = 2001;
        cfg.pathology = Pathology::graph_growth;
        cfg.pathology_factor = 50.0;
        AnalyzeOptions opt;
        opt.loops = {cfg.iterations};
        const auto files = run_full_pipeline(cfg, opt, "diag_growth");
        const auto summary = nlohmann::json::parse(read_file(files.summary));
        if (summary["loops"][0]["diagnosis"]["code"] == "CPU_BOUND") ++correct;
    }
    {
        SynthConfig cfg;
        cfg.seed = 2002;
        cfg.htod_bytes_per_iter = 4800;  // 480 ns base copy in an 8000 ns gap
        cfg.pathology = Pathology::oversize_copy;
        cfg.pathology_factor = 2.0;      // copy now occupies 12% of the interval
        AnalyzeOptions opt;
        opt.loops = {cfg.iterations};
        const auto files = run_full_pipeline(cfg, opt, "diag_copy");
        const auto summary = nlohmann::json::parse(read_file(files.summary));
        const auto overlap = summary["loops"][0]["metrics"]["avg_overlap"].get<double>();
        if (summary["loops"][0]["diagnosis"]["code"] == "COPY_BOUND" && overlap >= 0.10) {
            ++correct;
        }
    }
    {
        SynthConfig cfg;
        cfg.seed = 2003;
        AnalyzeOptions opt;
        opt.loops = {cfg.iterations};
        const auto files = run_full_pipeline(cfg, opt, "diag_none");
        const auto summary = nlohmann::json::parse(read_file(files.summary));
        if (summary["loops"][0]["diagnosis"]["code"] == "NONE") ++correct;
    }
    REQUIRE(correct == 3);
}

TEST_CASE("criterion 7: a million-operation trace analyzes within budget") {
    SynthConfig cfg;
    cfg.seed = 3001;
    cfg.pattern_len = 1000;
    cfg.iterations = 1000;  // 1,000,000 pattern ops + init prefix
    cfg.vocab_size = 1010;
    cfg.interval_gap_ns = 20000;

    const auto dir = oracle::test_dir("acceptance");
    const auto trace_path = dir / "scale.csv";
    const auto truth_path = dir / "scale_truth.json";
    generate_trace(cfg, trace_path, truth_path);

    const auto started = std::chrono::steady_clock::now();
    auto [trace, ingest] = parse_trace(trace_path);
    AnalyzeOptions opt;
    opt.loops = {cfg.iterations};
    auto result = analyze_trace(std::move(trace), trace_path.string(), opt);
    render_report(result.report, result.details, dir / "scale_summary.json",
                  dir / "scale_details.csv");
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();

    REQUIRE(result.report.loops[0].iterations_found == cfg.iterations);
    REQUIRE(elapsed < 60'000);

    // node bound: re-tokenize and build the tree alone
    auto [trace2, ingest2] = parse_trace(trace_path);
    const auto seq = build_token_sequence(trace2, 13);
    REQUIRE(seq.size() >= 1'000'000);
    const auto tree = build_suffix_tree(seq);
    REQUIRE(tree.node_count() <= 2 * (seq.size() + 1));

    const auto peak = peak_rss_bytes();
    REQUIRE(peak > 0);
    REQUIRE(peak < 2LL * 1024 * 1024 * 1024);

    std::printf("    scale: %lld ms end-to-end, peak rss %lld MiB, %zu tree nodes\n",
                static_cast<long long>(elapsed),
                static_cast<long long>(peak / (1024 * 1024)), tree.node_count());
}

TEST_CASE("criterion 8: repeated runs produce byte-identical outputs") {
    SynthConfig cfg;
    cfg.seed = 4001;
    cfg.iterations = 200;
    cfg.pattern_len = 10;
    cfg.insert_prob = 0.25;
    cfg.max_inserts = 2;
    cfg.kernel_jitter_ns = 700;
    cfg.interval_jitter_ns = 1500;

    const auto dir = oracle::test_dir("acceptance");
    const auto trace_path = dir / "determinism.csv";
    generate_trace(cfg, trace_path, dir / "determinism_truth.json");

    AnalyzeOptions opt;
    opt.loops = {cfg.iterations};
    opt.k0 = cfg.max_inserts;

    for (int run = 0; run < 2; ++run) {
        auto [trace, ingest] = parse_trace(trace_path);
        auto result = analyze_trace(std::move(trace), trace_path.string(), opt);
        const auto tag = std::to_string(run);
        render_report(result.report, result.details, dir / ("det_summary_" + tag + ".json"),
                      dir / ("det_details_" + tag + ".csv"));
    }
    REQUIRE(read_file(dir / "det_summary_0.json") == read_file(dir / "det_summary_1.json"));
    REQUIRE(read_file(dir / "det_details_0.csv") == read_file(dir / "det_details_1.csv"));
}
