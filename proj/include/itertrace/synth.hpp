#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "itertrace/errors.hpp"
#include "itertrace/match.hpp"
#include "itertrace/metrics.hpp"
#include "itertrace/report.hpp"

namespace itertrace {

enum class Pathology { none, graph_growth, oversize_copy };

inline const char* to_string(Pathology p) {
    switch (p) {
        case Pathology::none: return "none";
        case Pathology::graph_growth: return "graph_growth";
        case Pathology::oversize_copy: return "oversize_copy";
    }
    return "none";
}

enum class InsertPlacement {
    after_pattern,   // extra ops trail the iteration body and land in the interval
    inside_pattern,  // extra ops split the body and consume match budget
};

inline const char* to_string(InsertPlacement p) {
    return p == InsertPlacement::after_pattern ? "after_pattern" : "inside_pattern";
}

struct SynthConfig {
    std::uint64_t seed = 42;
    std::int64_t init_ops = 8;
    std::int64_t pattern_len = 6;
    std::int64_t iterations = 40;
    std::int64_t vocab_size = 16;
    double insert_prob = 0.0;
    std::int64_t max_inserts = 0;
    InsertPlacement insert_placement = InsertPlacement::after_pattern;
    std::int64_t kernel_duration_ns = 5000;
    std::int64_t kernel_jitter_ns = 0;
    std::int64_t intra_gap_ns = 1000;
    std::int64_t interval_gap_ns = 8000;
    std::int64_t interval_jitter_ns = 0;
    std::int64_t htod_bytes_per_iter = 4096;
    std::int64_t htod_bandwidth_bps = 10'000'000'000;
    Pathology pathology = Pathology::none;
    double pathology_factor = 1.0;
};

struct GroundTruthIteration {
    std::int64_t index = 0;
    TimeNs t_start = 0;
    TimeNs t_end = 0;
    std::optional<TimeNs> interval_ns;
    std::optional<double> overlap_ratio;
    std::int64_t htod_bytes = 0;
};

struct GroundTruth {
    std::vector<std::string> pattern_names;
    std::vector<MatchSpan> spans;
    std::vector<GroundTruthIteration> iterations;
    DiagnosisCode expected_diagnosis = DiagnosisCode::NONE;
    std::uint32_t main_stream = 13;
};

struct SynthOutput {
    std::string trace_csv;
    GroundTruth truth;
};

namespace detail {

// mt19937_64 with explicit reductions, so identical seeds give identical
// streams on every platform (std distributions are implementation-defined).
class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed) : rng_(seed) {}

    std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
        if (hi <= lo) return lo;
        const auto range = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<std::int64_t>(rng_() % range);
    }

    std::int64_t jitter(std::int64_t half_width) {
        if (half_width <= 0) return 0;
        return uniform(-half_width, half_width);
    }

    bool coin(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        return u < p;
    }

private:
    std::mt19937_64 rng_;
};

inline std::int64_t ceil_div_duration(std::int64_t bytes, std::int64_t bandwidth_bps) {
    const unsigned __int128 num =
        static_cast<unsigned __int128>(bytes) * 1'000'000'000u + static_cast<unsigned __int128>(bandwidth_bps) - 1;
    return static_cast<std::int64_t>(num / static_cast<unsigned __int128>(bandwidth_bps));
}

struct SynthRecord {
    TimeNs start = 0;
    TimeNs duration = 0;
    std::optional<std::int64_t> size;
    std::optional<double> throughput_bps;
    std::uint32_t stream = 0;
    std::string name;
    std::size_t seq = 0;
};

inline void append_csv_row(std::string& out, const SynthRecord& r, double bandwidth_gbps) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%lld.%03lld,%lld.%03lld,",
                  static_cast<long long>(r.start / 1000), static_cast<long long>(r.start % 1000),
                  static_cast<long long>(r.duration / 1000),
                  static_cast<long long>(r.duration % 1000));
    out += buf;
    if (r.size) out += std::to_string(*r.size);
    out += ',';
    if (r.throughput_bps) {
        std::snprintf(buf, sizeof(buf), "%.6f", bandwidth_gbps);
        out += buf;
    }
    out += ",synthetic-gpu-0,";
    out += std::to_string(r.stream);
    out += ",\"";
    out += r.name;
    out += "\"\n";
}

}  // namespace detail

inline void validate(const SynthConfig& cfg) {
    auto fail = [](const std::string& msg) {
        throw Error(ErrorKind::InvalidConfig, "synth: " + msg);
    };
    if (cfg.pattern_len < 1) fail("pattern_len must be >= 1");
    if (cfg.iterations < 2) fail("iterations must be >= 2");
    if (cfg.max_inserts < 0) fail("max_inserts must be >= 0");
    if (cfg.vocab_size < cfg.pattern_len) fail("vocab_size must be >= pattern_len");
    if (cfg.init_ops < 1) fail("init_ops must be >= 1");
    if (cfg.vocab_size < cfg.pattern_len + 1) {
        fail("vocab_size must exceed pattern_len; init and inserted ops draw names outside the pattern");
    }
    if (cfg.insert_prob < 0.0 || cfg.insert_prob > 1.0) fail("insert_prob must be in [0, 1]");
    if (cfg.insert_placement == InsertPlacement::inside_pattern && cfg.max_inserts > 0 &&
        cfg.pattern_len < 2) {
        fail("inside_pattern placement needs pattern_len >= 2");
    }
    if (cfg.kernel_duration_ns < 1) fail("kernel_duration_ns must be >= 1");
    if (cfg.kernel_jitter_ns < 0 || cfg.kernel_jitter_ns >= cfg.kernel_duration_ns) {
        fail("kernel_jitter_ns must be in [0, kernel_duration_ns)");
    }
    if (cfg.intra_gap_ns < 1) fail("intra_gap_ns must be >= 1");
    if (cfg.interval_gap_ns < 4) fail("interval_gap_ns must be >= 4");
    if (cfg.interval_jitter_ns < 0 || cfg.interval_jitter_ns >= cfg.interval_gap_ns) {
        fail("interval_jitter_ns must be in [0, interval_gap_ns)");
    }
    if (cfg.htod_bytes_per_iter < 1) fail("htod_bytes_per_iter must be >= 1");
    if (cfg.htod_bandwidth_bps < 1) fail("htod_bandwidth_bps must be >= 1");
    if (cfg.pathology != Pathology::none && cfg.pathology_factor < 1.0) {
        fail("pathology_factor must be >= 1 when a pathology is planted");
    }
}

/// Builds the trace and its ground truth in memory. One main stream carries
/// init ops and the planted iterations, one copy stream feeds each
/// inter-iteration gap with an HtoD copy, one stream drains DtoH results, and
/// an assist stream holds the memset + HtoD pair at time zero.
inline SynthOutput generate(const SynthConfig& cfg) {
    validate(cfg);
    detail::SynthRng rng(cfg.seed);

    auto op_name = [](std::int64_t id) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "op_%05lld", static_cast<long long>(id));
        return std::string(buf);
    };

    const std::uint32_t kMainStream = 13;
    const std::uint32_t kHtoDStream = 14;
    const std::uint32_t kDtoHStream = 15;
    const std::uint32_t kAssistStream = 7;
    const std::int64_t kAssistBytes = 1024;
    const std::int64_t kDtoHBytes = 512;

    std::vector<detail::SynthRecord> records;
    std::size_t seq = 0;
    auto push = [&](detail::SynthRecord r) {
        r.seq = seq++;
        records.push_back(std::move(r));
    };

    const double factor = cfg.pathology == Pathology::none ? 1.0 : cfg.pathology_factor;
    const std::int64_t copy_bytes =
        cfg.pathology == Pathology::oversize_copy
            ? std::llround(static_cast<double>(cfg.htod_bytes_per_iter) * factor)
            : cfg.htod_bytes_per_iter;
    const std::int64_t copy_duration = detail::ceil_div_duration(copy_bytes, cfg.htod_bandwidth_bps);
    const double bandwidth_gbps = static_cast<double>(cfg.htod_bandwidth_bps) / 1e9;

    auto sample_kernel = [&]() {
        return std::max<std::int64_t>(1, cfg.kernel_duration_ns + rng.jitter(cfg.kernel_jitter_ns));
    };
    auto sample_gap = [&]() {
        std::int64_t gap = cfg.interval_gap_ns + rng.jitter(cfg.interval_jitter_ns);
        if (cfg.pathology == Pathology::graph_growth) {
            gap = std::llround(static_cast<double>(gap) * factor);
        }
        return std::max<std::int64_t>(4, gap);
    };

    // Assist stream: memset + HtoD at time zero.
    push({0, 1000, kAssistBytes, std::nullopt, kAssistStream, "[CUDA memset]"});
    const std::int64_t assist_copy_dur = detail::ceil_div_duration(kAssistBytes, cfg.htod_bandwidth_bps);
    push({1200, assist_copy_dur, kAssistBytes, static_cast<double>(cfg.htod_bandwidth_bps),
          kAssistStream, "[CUDA memcpy HtoD]"});

    // Main stream: init prefix.
    const std::int64_t extra_vocab = cfg.vocab_size - cfg.pattern_len;
    TimeNs cursor = 1200 + assist_copy_dur + cfg.intra_gap_ns;
    for (std::int64_t j = 0; j < cfg.init_ops; ++j) {
        const auto dur = sample_kernel();
        push({cursor, dur, std::nullopt, std::nullopt, kMainStream,
              op_name(cfg.pattern_len + rng.uniform(0, extra_vocab - 1))});
        cursor += dur + cfg.intra_gap_ns;
    }
    TimeNs prev_main_end = cursor - cfg.intra_gap_ns;

    GroundTruth truth;
    for (std::int64_t j = 0; j < cfg.pattern_len; ++j) truth.pattern_names.push_back(op_name(j));

    std::int64_t token_cursor = cfg.init_ops;
    TimeNs prev_pattern_end = 0;
    double overlap_sum = 0.0;
    std::int64_t overlap_count = 0;
    std::int64_t interval_sum = 0;

    for (std::int64_t k = 1; k <= cfg.iterations; ++k) {
        const auto gap = sample_gap();
        const TimeNs block_start = prev_main_end + gap;

        GroundTruthIteration iter;
        iter.index = k;
        iter.t_start = block_start;

        if (k >= 2) {
            // One HtoD copy inside the inter-iteration gap, centered when it fits.
            const TimeNs cs = prev_main_end + std::max<std::int64_t>(1, (gap - copy_duration) / 2);
            push({cs, copy_duration, copy_bytes, static_cast<double>(cfg.htod_bandwidth_bps),
                  kHtoDStream, "[CUDA memcpy HtoD]"});

            const TimeNs interval = block_start - prev_pattern_end;
            iter.interval_ns = interval;
            iter.htod_bytes = copy_bytes;
            if (interval > 0) {
                const TimeNs clipped = std::max<TimeNs>(
                    0, std::min<TimeNs>(cs + copy_duration, block_start) - cs);
                iter.overlap_ratio = static_cast<double>(clipped) / static_cast<double>(interval);
                overlap_sum += *iter.overlap_ratio;
                ++overlap_count;
            }
            interval_sum += interval;
        } else {
            iter.htod_bytes = kAssistBytes;  // the assist copy lands in the first window
        }

        std::int64_t n_inserts = 0;
        if (cfg.max_inserts > 0 && rng.coin(cfg.insert_prob)) {
            n_inserts = rng.uniform(1, cfg.max_inserts);
        }

        // Block op list: pattern tokens with inserts either interleaved or trailing.
        struct BlockOp {
            std::string name;
            bool is_pattern;
        };
        std::vector<BlockOp> ops;
        ops.reserve(static_cast<std::size_t>(cfg.pattern_len + n_inserts));
        if (cfg.insert_placement == InsertPlacement::inside_pattern && n_inserts > 0) {
            std::vector<std::int64_t> at_gap(static_cast<std::size_t>(cfg.pattern_len), 0);
            for (std::int64_t x = 0; x < n_inserts; ++x) {
                at_gap[static_cast<std::size_t>(rng.uniform(0, cfg.pattern_len - 2))] += 1;
            }
            for (std::int64_t j = 0; j < cfg.pattern_len; ++j) {
                ops.push_back({op_name(j), true});
                for (std::int64_t x = 0; x < at_gap[static_cast<std::size_t>(j)]; ++x) {
                    ops.push_back({op_name(cfg.pattern_len + rng.uniform(0, extra_vocab - 1)), false});
                }
            }
        } else {
            for (std::int64_t j = 0; j < cfg.pattern_len; ++j) ops.push_back({op_name(j), true});
            for (std::int64_t x = 0; x < n_inserts; ++x) {
                ops.push_back({op_name(cfg.pattern_len + rng.uniform(0, extra_vocab - 1)), false});
            }
        }

        TimeNs t = block_start;
        TimeNs last_pattern_end = block_start;
        std::int64_t last_pattern_offset = 0;
        for (std::size_t j = 0; j < ops.size(); ++j) {
            const auto dur = sample_kernel();
            push({t, dur, std::nullopt, std::nullopt, kMainStream, ops[j].name});
            if (ops[j].is_pattern) {
                last_pattern_end = t + dur;
                last_pattern_offset = static_cast<std::int64_t>(j);
            }
            t += dur + cfg.intra_gap_ns;
        }
        prev_main_end = t - cfg.intra_gap_ns;
        iter.t_end = last_pattern_end;
        prev_pattern_end = last_pattern_end;

        MatchSpan span;
        span.start_token = token_cursor;
        span.end_token = token_cursor + last_pattern_offset;
        span.extra = cfg.insert_placement == InsertPlacement::inside_pattern ? n_inserts : 0;
        truth.spans.push_back(span);
        token_cursor += static_cast<std::int64_t>(ops.size());

        // DtoH result drain, concurrent with the following gap.
        const std::int64_t dtoh_dur = detail::ceil_div_duration(kDtoHBytes, cfg.htod_bandwidth_bps);
        push({last_pattern_end + 200, dtoh_dur, kDtoHBytes,
              static_cast<double>(cfg.htod_bandwidth_bps), kDtoHStream, "[CUDA memcpy DtoH]"});

        truth.iterations.push_back(iter);
    }

    // Expected diagnosis from the planted numbers and default thresholds.
    {
        SummaryMetrics s;
        s.iterations_found = cfg.iterations;
        s.iterations_declared = cfg.iterations;
        s.avg_interval_ns =
            static_cast<double>(interval_sum) / static_cast<double>(cfg.iterations - 1);
        s.avg_overlap = overlap_count > 0 ? overlap_sum / static_cast<double>(overlap_count) : 0.0;
        s.avg_operation_ns = static_cast<double>(cfg.intra_gap_ns);
        truth.expected_diagnosis = diagnose(s, DiagnosisThresholds{}).code;
    }

    std::stable_sort(records.begin(), records.end(),
                     [](const detail::SynthRecord& a, const detail::SynthRecord& b) {
                         if (a.start != b.start) return a.start < b.start;
                         return a.seq < b.seq;
                     });

    SynthOutput out;
    out.truth = std::move(truth);
    std::string& csv = out.trace_csv;
    csv.reserve(records.size() * 64 + 256);
    csv += "== synthetic gpu trace\n";
    csv += "Start,Duration,Size,Throughput,Device,Stream,Name\n";
    csv += "us,us,B,GB/s,,,\n";
    for (const auto& r : records) detail::append_csv_row(csv, r, bandwidth_gbps);
    return out;
}

inline nlohmann::ordered_json truth_to_json(const SynthConfig& cfg, const GroundTruth& truth) {
    using json = nlohmann::ordered_json;
    json j;
    j["generator"] = std::string(kToolName) + " synth";
    json config;
    config["seed"] = cfg.seed;
    config["init_ops"] = cfg.init_ops;
    config["pattern_len"] = cfg.pattern_len;
    config["iterations"] = cfg.iterations;
    config["vocab_size"] = cfg.vocab_size;
    config["insert_prob"] = cfg.insert_prob;
    config["max_inserts"] = cfg.max_inserts;
    config["insert_placement"] = to_string(cfg.insert_placement);
    config["kernel_duration_ns"] = cfg.kernel_duration_ns;
    config["kernel_jitter_ns"] = cfg.kernel_jitter_ns;
    config["intra_gap_ns"] = cfg.intra_gap_ns;
    config["interval_gap_ns"] = cfg.interval_gap_ns;
    config["interval_jitter_ns"] = cfg.interval_jitter_ns;
    config["htod_bytes_per_iter"] = cfg.htod_bytes_per_iter;
    config["htod_bandwidth_bps"] = cfg.htod_bandwidth_bps;
    config["pathology"] = to_string(cfg.pathology);
    config["pathology_factor"] = cfg.pathology_factor;
    j["config"] = std::move(config);
    j["main_stream"] = truth.main_stream;
    j["pattern"] = truth.pattern_names;
    json spans = json::array();
    for (const auto& s : truth.spans) {
        json row;
        row["start_token"] = s.start_token;
        row["end_token"] = s.end_token;
        row["extra"] = s.extra;
        spans.push_back(std::move(row));
    }
    j["spans"] = std::move(spans);
    json iters = json::array();
    for (const auto& it : truth.iterations) {
        json row;
        row["index"] = it.index;
        row["t_start_ns"] = it.t_start;
        row["t_end_ns"] = it.t_end;
        row["interval_ns"] = it.interval_ns ? json(*it.interval_ns) : json(nullptr);
        row["overlap_ratio"] = it.overlap_ratio ? json(*it.overlap_ratio) : json(nullptr);
        row["htod_bytes"] = it.htod_bytes;
        iters.push_back(std::move(row));
    }
    j["iterations"] = std::move(iters);
    j["expected_diagnosis"] = to_string(truth.expected_diagnosis);
    return j;
}

/// Writes the trace CSV and the ground-truth sidecar. Identical seed and
/// config give byte-identical files.
inline void generate_trace(const SynthConfig& cfg, const std::filesystem::path& trace_out,
                           const std::filesystem::path& truth_out) {
    const auto out = generate(cfg);
    detail::write_file(trace_out, out.trace_csv);
    detail::write_file(truth_out, truth_to_json(cfg, out.truth).dump(2) + "\n");
}

/// Compares an analysis summary + details table against a truth sidecar:
/// pattern equality, span-set equality, per-iteration intervals within one
/// nanosecond, diagnosis code equality. Empty result means agreement.
inline std::vector<std::string> verify_against_truth(const nlohmann::json& summary,
                                                     const std::vector<DetailsRow>& details,
                                                     const nlohmann::json& truth) {
    std::vector<std::string> violations;
    if (!summary.contains("loops") || summary["loops"].empty()) {
        violations.push_back("summary has no loop results");
        return violations;
    }
    const auto& loop = summary["loops"][0];

    const auto mined = loop["pattern"].get<std::vector<std::string>>();
    const auto planted = truth["pattern"].get<std::vector<std::string>>();
    if (mined != planted) {
        violations.push_back("pattern mismatch: mined " + std::to_string(mined.size()) +
                             " tokens, planted " + std::to_string(planted.size()));
    }

    const auto& truth_spans = truth["spans"];
    if (details.size() != truth_spans.size()) {
        violations.push_back("span count mismatch: found " + std::to_string(details.size()) +
                             ", planted " + std::to_string(truth_spans.size()));
    }
    const std::size_t n = std::min(details.size(), truth_spans.size());
    for (std::size_t k = 0; k < n; ++k) {
        const auto& got = details[k];
        const auto& want = truth_spans[k];
        if (got.token_start != want["start_token"].get<std::int64_t>() ||
            got.token_end != want["end_token"].get<std::int64_t>() ||
            got.extra_ops != want["extra"].get<std::int64_t>()) {
            violations.push_back("span " + std::to_string(k + 1) + " mismatch");
        }
    }

    const auto& truth_iters = truth["iterations"];
    const std::size_t ni = std::min(details.size(), truth_iters.size());
    for (std::size_t k = 0; k < ni; ++k) {
        const auto& got = details[k];
        const auto& want = truth_iters[k];
        const bool want_has = !want["interval_ns"].is_null();
        if (want_has != got.interval_ns.has_value()) {
            violations.push_back("iteration " + std::to_string(k + 1) +
                                 " interval presence mismatch");
            continue;
        }
        if (want_has) {
            const auto diff = std::llabs(*got.interval_ns - want["interval_ns"].get<std::int64_t>());
            if (diff > 1) {
                violations.push_back("iteration " + std::to_string(k + 1) + " interval off by " +
                                     std::to_string(diff) + " ns");
            }
        }
    }

    const auto got_diag = loop["diagnosis"]["code"].get<std::string>();
    const auto want_diag = truth["expected_diagnosis"].get<std::string>();
    if (got_diag != want_diag) {
        violations.push_back("diagnosis mismatch: got " + got_diag + ", expected " + want_diag);
    }
    return violations;
}

}  // namespace itertrace
