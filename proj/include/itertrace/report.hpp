#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "itertrace/errors.hpp"
#include "itertrace/metrics.hpp"
#include "itertrace/mine.hpp"
#include "itertrace/streams.hpp"
#include "itertrace/version.hpp"

namespace itertrace {

enum class DiagnosisCode { COPY_BOUND, CPU_BOUND, NONE, INSUFFICIENT_DATA };

inline const char* to_string(DiagnosisCode c) {
    switch (c) {
        case DiagnosisCode::COPY_BOUND: return "COPY_BOUND";
        case DiagnosisCode::CPU_BOUND: return "CPU_BOUND";
        case DiagnosisCode::NONE: return "NONE";
        case DiagnosisCode::INSUFFICIENT_DATA: return "INSUFFICIENT_DATA";
    }
    return "NONE";
}

struct Diagnosis {
    DiagnosisCode code = DiagnosisCode::NONE;
    std::vector<std::string> evidence;
    std::string message;
};

struct DiagnosisThresholds {
    double theta_copy = 0.10;  // avg overlap at or above this flags copy pressure
    double theta_cpu = 10.0;   // avg interval at or above this multiple of avg op gap flags host-side stalls
};

namespace detail {

inline std::string format_double(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

}  // namespace detail

/// Bottleneck heuristics over the summary metrics. With a large copy share of
/// the inter-iteration gap the diagnosis is COPY_BOUND even if the gap is also
/// long, since the copies explain the gap; otherwise a gap far exceeding the
/// in-iteration dispatch cadence points at host-side work between steps.
inline Diagnosis diagnose(const SummaryMetrics& summary, const DiagnosisThresholds& thresholds) {
    Diagnosis d;
    if (summary.iterations_found < 2 || summary.insufficient_intervals) {
        d.code = DiagnosisCode::INSUFFICIENT_DATA;
        d.message = "fewer than two recovered iterations; interval metrics are undefined, rerun with a longer trace or check the declared iteration count";
        return d;
    }
    if (summary.avg_overlap >= thresholds.theta_copy) {
        d.code = DiagnosisCode::COPY_BOUND;
        d.evidence.push_back("avg_overlap=" + detail::format_double(summary.avg_overlap) +
                             " >= theta_copy=" + detail::format_double(thresholds.theta_copy));
        d.evidence.push_back("avg_interval_ns=" + detail::format_double(summary.avg_interval_ns));
        d.message = "host-to-device copies occupy a large share of the gap between iterations; data transfer is the likely bottleneck. A smaller batch reduces per-step copy volume, at the cost of more steps; weigh that against what the algorithm needs per batch.";
        return d;
    }
    if (summary.avg_interval_ns > 0 &&
        summary.avg_interval_ns >= thresholds.theta_cpu * summary.avg_operation_ns) {
        d.code = DiagnosisCode::CPU_BOUND;
        d.evidence.push_back("avg_interval_ns=" + detail::format_double(summary.avg_interval_ns) +
                             " >= theta_cpu=" + detail::format_double(thresholds.theta_cpu) +
                             " * avg_operation_ns=" + detail::format_double(summary.avg_operation_ns));
        d.evidence.push_back("avg_overlap=" + detail::format_double(summary.avg_overlap) +
                             " below theta_copy=" + detail::format_double(thresholds.theta_copy));
        d.message = "iteration gaps dwarf the in-iteration dispatch cadence while copy activity is low; host-side work between steps is the likely bottleneck. Inspect the training loop for per-step work such as operations that keep growing or re-initializing the computation graph.";
        return d;
    }
    d.code = DiagnosisCode::NONE;
    d.message = "no bottleneck indicated by the interval and copy-overlap heuristics";
    return d;
}

struct LoopReport {
    std::int64_t iterations_declared = 0;
    std::vector<std::string> pattern_names;
    std::int64_t pattern_length = 0;
    std::int64_t pattern_count = 0;
    std::int64_t epsilon_used = 0;
    std::int64_t first_occurrence_token = 0;
    std::int64_t k0_used = 0;
    std::int64_t iterations_found = 0;
    SummaryMetrics summary;
    Diagnosis diagnosis;
};

struct Report {
    std::string tool = kToolName;
    std::string version = kToolVersion;
    std::string trace_path;
    std::int64_t epsilon0 = 1;
    double theta_copy = 0.10;
    double theta_cpu = 10.0;
    std::optional<std::int64_t> k0_override;
    std::optional<std::uint32_t> main_stream_override;
    std::vector<StreamSummary> streams;
    std::map<std::uint32_t, StreamClass> classes;
    std::uint32_t main_stream = 0;
    std::vector<LoopReport> loops;
    std::vector<std::string> warnings;
};

inline nlohmann::ordered_json summary_to_json(const Report& r) {
    using json = nlohmann::ordered_json;
    json j;
    j["tool"] = r.tool;
    j["version"] = r.version;
    j["trace"] = r.trace_path;

    json config;
    config["epsilon0"] = r.epsilon0;
    config["theta_copy"] = r.theta_copy;
    config["theta_cpu"] = r.theta_cpu;
    config["k0_override"] = r.k0_override ? json(*r.k0_override) : json(nullptr);
    config["main_stream_override"] =
        r.main_stream_override ? json(*r.main_stream_override) : json(nullptr);
    j["config"] = std::move(config);

    json streams = json::array();
    for (const auto& s : r.streams) {
        json row;
        row["stream"] = s.stream;
        const auto it = r.classes.find(s.stream);
        row["class"] = it != r.classes.end() ? to_string(it->second) : "Assist";
        row["kernel"] = s.count(OpKind::Kernel);
        row["memcpy_htod"] = s.count(OpKind::MemcpyHtoD);
        row["memcpy_dtoh"] = s.count(OpKind::MemcpyDtoH);
        row["memcpy_dtod"] = s.count(OpKind::MemcpyDtoD);
        row["memset"] = s.count(OpKind::Memset);
        row["other"] = s.count(OpKind::Other);
        row["first_start_ns"] = s.first_start;
        row["last_end_ns"] = s.last_end;
        streams.push_back(std::move(row));
    }
    j["streams"] = std::move(streams);
    j["main_stream"] = r.main_stream;

    json loops = json::array();
    for (const auto& loop : r.loops) {
        json l;
        l["iterations_declared"] = loop.iterations_declared;
        l["pattern"] = loop.pattern_names;
        l["pattern_length"] = loop.pattern_length;
        l["pattern_count"] = loop.pattern_count;
        l["epsilon_used"] = loop.epsilon_used;
        l["first_occurrence_token"] = loop.first_occurrence_token;
        l["k0"] = loop.k0_used;
        l["iterations_found"] = loop.iterations_found;
        json metrics;
        metrics["avg_interval_ns"] = loop.summary.avg_interval_ns;
        metrics["max_interval_ns"] = loop.summary.max_interval_ns;
        metrics["avg_overlap"] = loop.summary.avg_overlap;
        metrics["avg_operation_ns"] = loop.summary.avg_operation_ns;
        metrics["avg_size_bytes"] = loop.summary.avg_size_bytes;
        metrics["insufficient_intervals"] = loop.summary.insufficient_intervals;
        l["metrics"] = std::move(metrics);
        json diag;
        diag["code"] = to_string(loop.diagnosis.code);
        diag["evidence"] = loop.diagnosis.evidence;
        diag["message"] = loop.diagnosis.message;
        l["diagnosis"] = std::move(diag);
        loops.push_back(std::move(l));
    }
    j["loops"] = std::move(loops);
    j["warnings"] = r.warnings;
    return j;
}

inline constexpr const char* kDetailsHeader =
    "iteration,token_start,token_end,t_start_ns,t_end_ns,interval_ns,overlap_ratio,"
    "htod_bytes,op_gap_mean_ns,extra_ops";

/// Flat per-iteration table. Ratios carry six fractional digits, times are
/// printed as integers; fields that are undefined for the first iteration
/// stay empty.
inline std::string details_to_csv(const std::vector<IterationMetrics>& items) {
    std::string out = kDetailsHeader;
    out += '\n';
    for (const auto& m : items) {
        out += std::to_string(m.index);
        out += ',';
        out += std::to_string(m.span.start_token);
        out += ',';
        out += std::to_string(m.span.end_token);
        out += ',';
        out += std::to_string(m.t_start);
        out += ',';
        out += std::to_string(m.t_end);
        out += ',';
        if (m.interval_ns) out += std::to_string(*m.interval_ns);
        out += ',';
        if (m.overlap_ratio) out += detail::format_double(*m.overlap_ratio);
        out += ',';
        out += std::to_string(m.htod_bytes);
        out += ',';
        out += std::to_string(std::llround(m.op_gap_mean_ns));
        out += ',';
        out += std::to_string(m.extra_ops);
        out += '\n';
    }
    return out;
}

struct DetailsRow {
    std::int64_t iteration = 0;
    std::int64_t token_start = 0;
    std::int64_t token_end = 0;
    std::int64_t t_start_ns = 0;
    std::int64_t t_end_ns = 0;
    std::optional<std::int64_t> interval_ns;
    std::optional<double> overlap_ratio;
    std::int64_t htod_bytes = 0;
    std::int64_t op_gap_mean_ns = 0;
    std::int64_t extra_ops = 0;
};

inline std::vector<DetailsRow> parse_details_csv(const std::string& text) {
    std::vector<DetailsRow> rows;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        cells.push_back(cur);
        if (cells.size() != 10) continue;
        DetailsRow row;
        row.iteration = std::stoll(cells[0]);
        row.token_start = std::stoll(cells[1]);
        row.token_end = std::stoll(cells[2]);
        row.t_start_ns = std::stoll(cells[3]);
        row.t_end_ns = std::stoll(cells[4]);
        if (!cells[5].empty()) row.interval_ns = std::stoll(cells[5]);
        if (!cells[6].empty()) row.overlap_ratio = std::stod(cells[6]);
        row.htod_bytes = std::stoll(cells[7]);
        row.op_gap_mean_ns = std::stoll(cells[8]);
        row.extra_ops = std::stoll(cells[9]);
        rows.push_back(row);
    }
    return rows;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoError, "report: cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorKind::IoError, "report: write failed for '" + path.string() + "'");
    }
}

/// details path for loop k >= 2: "details.csv" -> "details.loop2.csv".
inline std::filesystem::path loop_details_path(const std::filesystem::path& base, std::size_t loop_index) {
    if (loop_index == 0) return base;
    auto stem = base.stem().string();
    auto ext = base.extension().string();
    return base.parent_path() / (stem + ".loop" + std::to_string(loop_index + 1) + ext);
}

}  // namespace detail

/// Writes the summary document and one details table per loop. Output is
/// byte-deterministic for identical inputs: stable key order, no timestamps.
inline void render_report(const Report& report,
                          const std::vector<std::vector<IterationMetrics>>& details_per_loop,
                          const std::filesystem::path& out_summary,
                          const std::filesystem::path& out_details) {
    detail::write_file(out_summary, summary_to_json(report).dump(2) + "\n");
    for (std::size_t k = 0; k < details_per_loop.size(); ++k) {
        detail::write_file(detail::loop_details_path(out_details, k),
                           details_to_csv(details_per_loop[k]));
    }
}

}  // namespace itertrace
