#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "itertrace/errors.hpp"
#include "itertrace/match.hpp"
#include "itertrace/streams.hpp"
#include "itertrace/trace.hpp"

namespace itertrace {

struct IterationWindow {
    MatchSpan span;
    TimeNs t_start = 0;  // start of the first main-stream record in the span
    TimeNs t_end = 0;    // end of the last main-stream record in the span
};

struct IterationMetrics {
    std::int64_t index = 0;  // 1-based
    MatchSpan span;
    TimeNs t_start = 0;
    TimeNs t_end = 0;
    std::optional<TimeNs> interval_ns;       // gap to the previous iteration; absent for the first
    std::optional<double> overlap_ratio;     // HtoD copy share of the interval; absent when interval is absent or zero
    std::int64_t htod_bytes = 0;
    double op_gap_mean_ns = 0.0;             // mean dispatch gap between records inside the span
    std::int64_t extra_ops = 0;
};

struct SummaryMetrics {
    double avg_interval_ns = 0.0;
    TimeNs max_interval_ns = 0;
    double avg_overlap = 0.0;
    double avg_operation_ns = 0.0;
    double avg_size_bytes = 0.0;
    std::int64_t iterations_found = 0;
    std::int64_t iterations_declared = 0;
    bool insufficient_intervals = false;  // fewer than two iterations: interval fields are zeroed
};

inline std::vector<IterationWindow> partition_iterations(const NormalizedTrace& trace,
                                                         const TokenSequence& seq,
                                                         const std::vector<MatchSpan>& spans) {
    std::vector<IterationWindow> out;
    out.reserve(spans.size());
    for (const auto& span : spans) {
        const auto& first = trace.records[seq.record_index[static_cast<std::size_t>(span.start_token)]];
        const auto& last = trace.records[seq.record_index[static_cast<std::size_t>(span.end_token)]];
        out.push_back({span, first.start_ns, last.end_ns()});
    }
    return out;
}

inline std::vector<const TraceRecord*> collect_htod_records(const NormalizedTrace& trace) {
    std::vector<const TraceRecord*> out;
    for (const auto& rec : trace.records) {
        if (kind_of(rec) == OpKind::MemcpyHtoD) out.push_back(&rec);
    }
    return out;
}

struct IterationAnalysis {
    std::vector<IterationMetrics> iterations;
    std::int64_t negative_gap_clamps = 0;       // op gaps clamped to zero (timer granularity)
    std::int64_t negative_interval_clamps = 0;  // intervals clamped to zero
};

namespace detail {

/// Total length of the union of [start, end] segments clipped to (lo, hi).
/// Overlapping copy segments are merged first, so the result never exceeds
/// the window and the ratio stays a true fraction.
inline TimeNs clipped_union_length(const std::vector<const TraceRecord*>& records,
                                   TimeNs lo, TimeNs hi) {
    std::vector<std::pair<TimeNs, TimeNs>> segments;
    for (const auto* rec : records) {
        const TimeNs a = std::max(rec->start_ns, lo);
        const TimeNs b = std::min(rec->end_ns(), hi);
        if (b > a) segments.emplace_back(a, b);
    }
    std::sort(segments.begin(), segments.end());
    TimeNs total = 0;
    TimeNs cur_lo = 0, cur_hi = 0;
    bool open = false;
    for (const auto& [a, b] : segments) {
        if (!open || a > cur_hi) {
            if (open) total += cur_hi - cur_lo;
            cur_lo = a;
            cur_hi = b;
            open = true;
        } else {
            cur_hi = std::max(cur_hi, b);
        }
    }
    if (open) total += cur_hi - cur_lo;
    return total;
}

}  // namespace detail

/// Per-iteration metrics over partitioned windows. The interval is the idle
/// gap on the main stream between adjacent iterations; the overlap ratio is
/// the unioned HtoD copy time clipped to that gap. HtoD bytes are attributed
/// to the iteration whose interval the copy can block: window
/// (prev t_end, this t_end], starting at 0 for the first iteration.
inline IterationAnalysis compute_iteration_metrics(const NormalizedTrace& trace,
                                                   const TokenSequence& seq,
                                                   const std::vector<IterationWindow>& partitions,
                                                   const std::vector<const TraceRecord*>& htod_records) {
    IterationAnalysis out;
    out.iterations.reserve(partitions.size());
    for (std::size_t k = 0; k < partitions.size(); ++k) {
        const auto& win = partitions[k];
        IterationMetrics m;
        m.index = static_cast<std::int64_t>(k + 1);
        m.span = win.span;
        m.t_start = win.t_start;
        m.t_end = win.t_end;
        m.extra_ops = win.span.extra;

        if (k > 0) {
            TimeNs interval = win.t_start - partitions[k - 1].t_end;
            if (interval < 0) {
                interval = 0;
                ++out.negative_interval_clamps;
            }
            m.interval_ns = interval;
            if (interval > 0) {
                const TimeNs copy = detail::clipped_union_length(
                    htod_records, partitions[k - 1].t_end, win.t_start);
                m.overlap_ratio = static_cast<double>(copy) / static_cast<double>(interval);
            }
        }

        const TimeNs attribution_lo = k > 0 ? partitions[k - 1].t_end : -1;
        for (const auto* rec : htod_records) {
            if (rec->start_ns > attribution_lo && rec->start_ns <= win.t_end) {
                m.htod_bytes += rec->size_bytes.value_or(0);
            }
        }

        TimeNs gap_sum = 0;
        std::int64_t gap_count = 0;
        for (auto tok = win.span.start_token; tok < win.span.end_token; ++tok) {
            const auto& cur = trace.records[seq.record_index[static_cast<std::size_t>(tok)]];
            const auto& next = trace.records[seq.record_index[static_cast<std::size_t>(tok + 1)]];
            TimeNs gap = next.start_ns - cur.end_ns();
            if (gap < 0) {
                gap = 0;
                ++out.negative_gap_clamps;
            }
            gap_sum += gap;
            ++gap_count;
        }
        m.op_gap_mean_ns = gap_count > 0
                               ? static_cast<double>(gap_sum) / static_cast<double>(gap_count)
                               : 0.0;
        out.iterations.push_back(std::move(m));
    }
    return out;
}

inline SummaryMetrics compute_summary(const std::vector<IterationMetrics>& items,
                                      std::int64_t iterations_declared) {
    if (items.empty()) {
        throw Error(ErrorKind::NoIterations, "metrics: no iterations to summarize");
    }
    SummaryMetrics s;
    s.iterations_found = static_cast<std::int64_t>(items.size());
    s.iterations_declared = iterations_declared;

    std::int64_t interval_sum = 0, interval_count = 0;
    double overlap_sum = 0.0;
    std::int64_t overlap_count = 0;
    double gap_sum = 0.0;
    std::int64_t bytes_total = 0;
    for (const auto& m : items) {
        if (m.interval_ns) {
            interval_sum += *m.interval_ns;
            ++interval_count;
            s.max_interval_ns = std::max(s.max_interval_ns, *m.interval_ns);
        }
        if (m.overlap_ratio) {
            overlap_sum += *m.overlap_ratio;
            ++overlap_count;
        }
        gap_sum += m.op_gap_mean_ns;
        bytes_total += m.htod_bytes;
    }
    if (interval_count > 0) {
        s.avg_interval_ns = static_cast<double>(interval_sum) / static_cast<double>(interval_count);
    } else {
        s.insufficient_intervals = true;
    }
    if (overlap_count > 0) s.avg_overlap = overlap_sum / static_cast<double>(overlap_count);
    s.avg_operation_ns = gap_sum / static_cast<double>(items.size());
    s.avg_size_bytes = static_cast<double>(bytes_total) / static_cast<double>(items.size());
    return s;
}

}  // namespace itertrace
