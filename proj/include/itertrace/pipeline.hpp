#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "itertrace/errors.hpp"
#include "itertrace/ingest.hpp"
#include "itertrace/match.hpp"
#include "itertrace/metrics.hpp"
#include "itertrace/mine.hpp"
#include "itertrace/report.hpp"
#include "itertrace/streams.hpp"

namespace itertrace {

struct AnalyzeOptions {
    std::vector<std::int64_t> loops;  // declared iteration counts, one per loop
    std::int64_t epsilon0 = 1;
    std::optional<std::int64_t> k0;   // match budget; derived from the pattern when absent
    double theta_copy = 0.10;
    double theta_cpu = 10.0;
    std::optional<std::uint32_t> main_stream;
};

struct AnalysisResult {
    Report report;
    std::vector<std::vector<IterationMetrics>> details;  // one table per loop
};

/// Runs classify -> tokenize -> mine -> match -> metrics -> diagnose over an
/// already-normalized trace. File rendering is up to the caller.
inline AnalysisResult analyze_trace(NormalizedTrace trace, const std::string& trace_label,
                                    const AnalyzeOptions& opt) {
    if (opt.loops.empty()) {
        throw Error(ErrorKind::InvalidConfig, "analyze: at least one iteration count is required");
    }

    AnalysisResult result;
    Report& report = result.report;
    report.trace_path = trace_label;
    report.epsilon0 = opt.epsilon0;
    report.theta_copy = opt.theta_copy;
    report.theta_cpu = opt.theta_cpu;
    report.k0_override = opt.k0;
    report.main_stream_override = opt.main_stream;

    auto filtered = filter_majority_device(std::move(trace));
    const NormalizedTrace& working = filtered.trace;
    report.warnings = working.warnings;
    for (auto& w : filtered.warnings) report.warnings.push_back(w);

    report.streams = summarize_streams(working);
    report.classes = classify_streams(report.streams);
    if (opt.main_stream) {
        report.main_stream = *opt.main_stream;
        const auto it = report.classes.find(*opt.main_stream);
        if (it == report.classes.end()) {
            throw Error(ErrorKind::EmptyMainStream,
                        "stream-classify: override stream " + std::to_string(*opt.main_stream) +
                            " does not appear in the trace");
        }
        if (it->second != StreamClass::Main) {
            report.warnings.push_back("MainStreamOverride: stream " +
                                      std::to_string(*opt.main_stream) +
                                      " carries no kernels but was selected by override");
        }
    } else {
        auto choice = select_main_stream(report.classes, report.streams);
        report.main_stream = choice.stream;
        for (auto& w : choice.warnings) report.warnings.push_back(w);
    }

    const auto seq = build_token_sequence(working, report.main_stream);
    if (const auto overlaps = count_interval_overlaps(working, report.main_stream); overlaps > 0) {
        report.warnings.push_back("OverlappingKernels: " + std::to_string(overlaps) +
                                  " consecutive main-stream records report overlapping intervals (timer granularity)");
    }

    std::vector<MiningConfig> configs;
    configs.reserve(opt.loops.size());
    for (const auto iters : opt.loops) {
        configs.push_back({iters, opt.epsilon0, std::nullopt});
    }
    std::vector<PatternCandidate> patterns;
    if (configs.size() == 1) {
        patterns.push_back(mine_pattern(seq, configs.front()));
    } else {
        patterns = mine_patterns_multi(seq, configs);
    }

    const auto htod = collect_htod_records(working);
    const DiagnosisThresholds thresholds{opt.theta_copy, opt.theta_cpu};

    for (std::size_t k = 0; k < patterns.size(); ++k) {
        const auto& pattern = patterns[k];
        LoopReport loop;
        loop.iterations_declared = opt.loops[k];
        loop.pattern_length = pattern.length();
        loop.pattern_count = pattern.count;
        loop.epsilon_used = pattern.epsilon_used;
        loop.first_occurrence_token = pattern.first_token;
        for (const auto tok : pattern.tokens) loop.pattern_names.push_back(seq.name_of(tok));

        const MatchConfig match_cfg{opt.k0.value_or(default_k0(pattern.length()))};
        loop.k0_used = match_cfg.k0;
        const auto spans = approx_match(seq, pattern.tokens, match_cfg);
        if (const auto violations = validate_spans(spans, seq.tokens, pattern.tokens, match_cfg);
            !violations.empty()) {
            throw Error(ErrorKind::InvalidConfig,
                        "matching: internal span contract violated: " + violations.front().message);
        }

        const auto windows = partition_iterations(working, seq, spans);
        auto analysis = compute_iteration_metrics(working, seq, windows, htod);
        if (analysis.negative_gap_clamps > 0) {
            report.warnings.push_back("NegativeGaps: " + std::to_string(analysis.negative_gap_clamps) +
                                      " negative dispatch gaps clamped to zero");
        }
        if (analysis.negative_interval_clamps > 0) {
            report.warnings.push_back("NegativeIntervals: " +
                                      std::to_string(analysis.negative_interval_clamps) +
                                      " negative iteration intervals clamped to zero");
        }
        loop.iterations_found = static_cast<std::int64_t>(analysis.iterations.size());
        loop.summary = compute_summary(analysis.iterations, opt.loops[k]);
        loop.diagnosis = diagnose(loop.summary, thresholds);

        report.loops.push_back(std::move(loop));
        result.details.push_back(std::move(analysis.iterations));
    }
    return result;
}

}  // namespace itertrace
