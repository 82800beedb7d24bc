// Command-line front end: analyze recovers per-iteration structure from a
// GPU trace CSV, synth generates labeled synthetic traces, inspect prints the
// stream census without mining.

#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"

#include "itertrace/itertrace.hpp"

namespace {

using namespace itertrace;

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::NoPatternFound:
        case ErrorKind::AmbiguousLoops:
        case ErrorKind::NoIterations:
            return 2;
        case ErrorKind::UnreadableFile:
        case ErrorKind::MissingColumn:
        case ErrorKind::TooManyBadRows:
        case ErrorKind::EmptyTrace:
        case ErrorKind::NoMainStream:
        case ErrorKind::EmptyMainStream:
        case ErrorKind::IoError:
            return 3;
        case ErrorKind::InvalidIterationCount:
        case ErrorKind::InvalidConfig:
            return 4;
    }
    return 1;
}

bool use_color() {
    return ::isatty(::fileno(stdout)) != 0 && std::getenv("NO_COLOR") == nullptr;
}

const char* diagnosis_color(DiagnosisCode code) {
    switch (code) {
        case DiagnosisCode::COPY_BOUND:
        case DiagnosisCode::CPU_BOUND:
            return "\x1b[31m";
        case DiagnosisCode::NONE:
            return "\x1b[32m";
        case DiagnosisCode::INSUFFICIENT_DATA:
            return "\x1b[33m";
    }
    return "";
}

void print_stream_table(std::ostream& os, const std::vector<StreamSummary>& streams,
                        const std::map<std::uint32_t, StreamClass>& classes) {
    os << "  " << std::setw(7) << "stream" << std::setw(11) << "class" << std::setw(9) << "kernel"
       << std::setw(7) << "htod" << std::setw(7) << "dtoh" << std::setw(7) << "dtod"
       << std::setw(8) << "memset" << std::setw(7) << "other" << std::setw(15) << "first_ns"
       << std::setw(15) << "last_ns" << "\n";
    for (const auto& s : streams) {
        const auto it = classes.find(s.stream);
        os << "  " << std::setw(7) << s.stream << std::setw(11)
           << (it != classes.end() ? to_string(it->second) : "Assist") << std::setw(9)
           << s.count(OpKind::Kernel) << std::setw(7) << s.count(OpKind::MemcpyHtoD)
           << std::setw(7) << s.count(OpKind::MemcpyDtoH) << std::setw(7)
           << s.count(OpKind::MemcpyDtoD) << std::setw(8) << s.count(OpKind::Memset)
           << std::setw(7) << s.count(OpKind::Other) << std::setw(15) << s.first_start
           << std::setw(15) << s.last_end << "\n";
    }
}

void print_console_summary(const Report& report, const IngestReport& ingest) {
    std::cout << report.tool << " " << report.version << " — " << report.trace_path << "\n";
    std::cout << "rows: " << ingest.rows_parsed << " parsed, " << ingest.rows_skipped
              << " skipped of " << ingest.rows_total << "\n";
    std::cout << "streams:\n";
    print_stream_table(std::cout, report.streams, report.classes);
    std::cout << "main stream: " << report.main_stream << "\n";
    for (std::size_t k = 0; k < report.loops.size(); ++k) {
        const auto& loop = report.loops[k];
        std::cout << "loop " << (k + 1) << ": declared " << loop.iterations_declared
                  << " iterations, found " << loop.iterations_found << "\n";
        std::cout << "  pattern: length " << loop.pattern_length << ", repeats "
                  << loop.pattern_count << ", epsilon " << loop.epsilon_used << ", k0 "
                  << loop.k0_used << "\n   ";
        const std::size_t show = std::min<std::size_t>(loop.pattern_names.size(), 8);
        for (std::size_t j = 0; j < show; ++j) std::cout << " " << loop.pattern_names[j];
        if (loop.pattern_names.size() > show) {
            std::cout << " ... (+" << loop.pattern_names.size() - show << " more)";
        }
        std::cout << "\n";
        const auto& m = loop.summary;
        std::cout << "  avg interval " << std::llround(m.avg_interval_ns) << " ns, max "
                  << m.max_interval_ns << " ns, avg overlap " << std::fixed
                  << std::setprecision(4) << m.avg_overlap << std::defaultfloat
                  << ", avg op gap " << std::llround(m.avg_operation_ns) << " ns, avg htod "
                  << std::llround(m.avg_size_bytes) << " B/iter\n";
        const bool color = use_color();
        std::cout << "  diagnosis: " << (color ? diagnosis_color(loop.diagnosis.code) : "")
                  << to_string(loop.diagnosis.code) << (color ? "\x1b[0m" : "") << " — "
                  << loop.diagnosis.message << "\n";
        for (const auto& line : loop.diagnosis.evidence) std::cout << "    " << line << "\n";
    }
    if (report.warnings.empty()) {
        std::cout << "warnings: none\n";
    } else {
        std::cout << "warnings:\n";
        for (const auto& w : report.warnings) std::cout << "  - " << w << "\n";
    }
}

struct AnalyzeCli {
    std::string trace;
    std::optional<std::int64_t> iterations;
    std::vector<std::int64_t> loops;
    std::int64_t epsilon0 = 1;
    std::optional<std::int64_t> k0;
    double theta_copy = 0.10;
    double theta_cpu = 10.0;
    std::string out_summary = "summary.json";
    std::string out_details = "details.csv";
    std::optional<std::uint32_t> main_stream;
};

int run_analyze(const AnalyzeCli& args) {
    AnalyzeOptions opt;
    if (args.iterations) opt.loops.push_back(*args.iterations);
    for (const auto i : args.loops) opt.loops.push_back(i);
    opt.epsilon0 = args.epsilon0;
    opt.k0 = args.k0;
    opt.theta_copy = args.theta_copy;
    opt.theta_cpu = args.theta_cpu;
    opt.main_stream = args.main_stream;

    auto [trace, ingest] = parse_trace(args.trace);
    auto result = analyze_trace(std::move(trace), args.trace, opt);
    render_report(result.report, result.details, args.out_summary, args.out_details);
    print_console_summary(result.report, ingest);
    std::cout << "summary written: " << args.out_summary << "\n";
    std::cout << "details written: " << args.out_details << "\n";
    return 0;
}

int run_inspect(const std::string& trace_path) {
    auto [trace, ingest] = parse_trace(trace_path);
    const auto streams = summarize_streams(trace);
    const auto classes = classify_streams(streams);
    std::cout << "trace: " << trace_path << "\n";
    std::cout << "rows: " << ingest.rows_parsed << " parsed, " << ingest.rows_skipped
              << " skipped of " << ingest.rows_total << "\n";
    print_stream_table(std::cout, streams, classes);
    return 0;
}

int run_synth(const SynthConfig& cfg, const std::string& out_trace, const std::string& out_truth) {
    generate_trace(cfg, out_trace, out_truth);
    std::cout << "trace written: " << out_trace << "\n";
    std::cout << "truth written: " << out_truth << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(itertrace::kToolName) +
                 " — iteration-level GPU trace analysis\n"
                 "exit codes: 0 success, 2 no pattern found, 3 unreadable or malformed trace, "
                 "4 invalid arguments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", itertrace::kToolVersion);

    AnalyzeCli analyze_args;
    auto* analyze = app.add_subcommand("analyze", "recover iterations and metrics from a trace");
    analyze->set_config("--config");
    analyze->add_option("--trace", analyze_args.trace, "GPU trace CSV")->required();
    analyze->add_option("--iterations", analyze_args.iterations,
                        "declared iteration count of the training loop");
    analyze->add_option("--loops", analyze_args.loops,
                        "comma-separated iteration counts for multi-loop applications")
        ->delimiter(',');
    analyze->add_option("--epsilon0", analyze_args.epsilon0,
                        "starting repetition slack (doubles on failed searches)")
        ->capture_default_str();
    analyze->add_option("--k0", analyze_args.k0,
                        "unmatched-token budget per occurrence (default: pattern length / 4, rounded up)");
    analyze->add_option("--theta-copy", analyze_args.theta_copy,
                        "avg-overlap threshold for the copy-bound diagnosis")
        ->capture_default_str();
    analyze->add_option("--theta-cpu", analyze_args.theta_cpu,
                        "interval/op-gap ratio threshold for the cpu-bound diagnosis")
        ->capture_default_str();
    analyze->add_option("--out-summary", analyze_args.out_summary, "summary JSON path")
        ->capture_default_str();
    analyze->add_option("--out-details", analyze_args.out_details, "per-iteration CSV path")
        ->capture_default_str();
    analyze->add_option("--main-stream", analyze_args.main_stream,
                        "analyze this stream id instead of auto-selecting");

    std::string inspect_trace;
    auto* inspect = app.add_subcommand("inspect", "print the per-stream operation census");
    inspect->add_option("--trace", inspect_trace, "GPU trace CSV")->required();

    itertrace::SynthConfig synth_cfg;
    std::string synth_out_trace = "synthetic_trace.csv";
    std::string synth_out_truth = "synthetic_truth.json";
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic trace");
    synth->set_config("--config");
    synth->add_option("--out-trace", synth_out_trace, "output trace CSV")->capture_default_str();
    synth->add_option("--out-truth", synth_out_truth, "output ground-truth JSON")
        ->capture_default_str();
    synth->add_option("--seed", synth_cfg.seed, "RNG seed")->capture_default_str();
    synth->add_option("--init-ops", synth_cfg.init_ops, "operations before the first iteration")
        ->capture_default_str();
    synth->add_option("--pattern-len", synth_cfg.pattern_len, "operations per iteration body")
        ->capture_default_str();
    synth->add_option("--iterations", synth_cfg.iterations, "planted iteration count")
        ->capture_default_str();
    synth->add_option("--vocab-size", synth_cfg.vocab_size, "distinct operation names")
        ->capture_default_str();
    synth->add_option("--insert-prob", synth_cfg.insert_prob,
                      "per-iteration probability of extra ops")
        ->capture_default_str();
    synth->add_option("--max-inserts", synth_cfg.max_inserts, "max extra ops per iteration")
        ->capture_default_str();
    synth
        ->add_option("--insert-placement", synth_cfg.insert_placement,
                     "where extra ops go: after_pattern or inside_pattern")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, itertrace::InsertPlacement>{
                {"after_pattern", itertrace::InsertPlacement::after_pattern},
                {"inside_pattern", itertrace::InsertPlacement::inside_pattern}},
            CLI::ignore_case));
    synth->add_option("--kernel-duration-ns", synth_cfg.kernel_duration_ns, "base kernel duration")
        ->capture_default_str();
    synth->add_option("--kernel-jitter-ns", synth_cfg.kernel_jitter_ns, "kernel duration jitter")
        ->capture_default_str();
    synth->add_option("--intra-gap-ns", synth_cfg.intra_gap_ns, "gap between ops inside an iteration")
        ->capture_default_str();
    synth->add_option("--interval-gap-ns", synth_cfg.interval_gap_ns, "gap between iterations")
        ->capture_default_str();
    synth->add_option("--interval-jitter-ns", synth_cfg.interval_jitter_ns, "iteration gap jitter")
        ->capture_default_str();
    synth->add_option("--htod-bytes", synth_cfg.htod_bytes_per_iter, "copied bytes per iteration")
        ->capture_default_str();
    synth->add_option("--htod-bandwidth", synth_cfg.htod_bandwidth_bps, "copy bandwidth, bytes/s")
        ->capture_default_str();
    synth
        ->add_option("--pathology", synth_cfg.pathology,
                     "planted bottleneck: none, graph_growth or oversize_copy")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, itertrace::Pathology>{
                {"none", itertrace::Pathology::none},
                {"graph_growth", itertrace::Pathology::graph_growth},
                {"oversize_copy", itertrace::Pathology::oversize_copy}},
            CLI::ignore_case));
    synth->add_option("--pathology-factor", synth_cfg.pathology_factor, "pathology scale factor")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 4;
    }

    try {
        if (analyze->parsed()) {
            if (!analyze_args.iterations && analyze_args.loops.empty()) {
                std::cerr << "error: analyze needs --iterations or --loops\n";
                return 4;
            }
            if (analyze_args.iterations && !analyze_args.loops.empty()) {
                std::cerr << "error: give either --iterations or --loops, not both\n";
                return 4;
            }
            if (analyze_args.out_summary == analyze_args.out_details) {
                std::cerr << "error: --out-summary and --out-details must differ\n";
                return 4;
            }
            return run_analyze(analyze_args);
        }
        if (inspect->parsed()) return run_inspect(inspect_trace);
        if (synth->parsed()) return run_synth(synth_cfg, synth_out_trace, synth_out_truth);
    } catch (const itertrace::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
