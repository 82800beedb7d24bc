#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "itertrace/errors.hpp"
#include "itertrace/trace.hpp"

namespace itertrace {

struct IngestReport {
    std::size_t rows_total = 0;    // data rows only (header/units/comments excluded)
    std::size_t rows_parsed = 0;
    std::size_t rows_skipped = 0;
    std::vector<std::pair<std::size_t, std::string>> skip_reasons;  // (line, reason)
    std::map<std::string, std::size_t> column_map;

    friend bool operator==(const IngestReport&, const IngestReport&) = default;
};

namespace detail {

// Time factors are exact nanosecond multipliers; sizes are binary (1024-based)
// to match vendor size reporting, throughput is decimal.
inline std::optional<std::int64_t> time_factor(std::string_view unit) {
    if (unit == "s") return 1'000'000'000;
    if (unit == "ms") return 1'000'000;
    if (unit == "us") return 1'000;
    if (unit == "ns") return 1;
    return std::nullopt;
}

inline std::optional<std::int64_t> size_factor(std::string_view unit) {
    if (unit == "B") return 1;
    if (unit == "KB") return 1024;
    if (unit == "MB") return 1024 * 1024;
    if (unit == "GB") return 1024LL * 1024 * 1024;
    return std::nullopt;
}

inline std::optional<double> throughput_factor(std::string_view unit) {
    if (unit == "B/s") return 1.0;
    if (unit == "KB/s") return 1e3;
    if (unit == "MB/s") return 1e6;
    if (unit == "GB/s") return 1e9;
    return std::nullopt;
}

inline bool is_unit_token(std::string_view tok) {
    return time_factor(tok) || size_factor(tok) || throughput_factor(tok);
}

/// Parses a plain decimal "123.4567" and returns round-half-up(value * factor)
/// without going through floating point, so unit conversion is exact for any
/// input with a bounded number of fraction digits.
inline std::optional<std::int64_t> parse_scaled_decimal(std::string_view cell,
                                                        std::int64_t factor) {
    std::size_t i = 0;
    bool negative = false;
    if (i < cell.size() && (cell[i] == '+' || cell[i] == '-')) {
        negative = cell[i] == '-';
        ++i;
    }
    unsigned __int128 digits = 0;
    int n_digits = 0;
    int n_frac = 0;
    bool seen_point = false;
    bool seen_digit = false;
    for (; i < cell.size(); ++i) {
        const char c = cell[i];
        if (c == '.') {
            if (seen_point) return std::nullopt;
            seen_point = true;
            continue;
        }
        if (c < '0' || c > '9') return std::nullopt;
        seen_digit = true;
        if (++n_digits > 18) return std::nullopt;
        digits = digits * 10 + static_cast<unsigned>(c - '0');
        if (seen_point) ++n_frac;
    }
    if (!seen_digit) return std::nullopt;

    unsigned __int128 scale = 1;
    for (int k = 0; k < n_frac; ++k) scale *= 10;
    const unsigned __int128 scaled = digits * static_cast<unsigned __int128>(factor);
    const unsigned __int128 rounded = (scaled + scale / 2) / scale;
    if (rounded > static_cast<unsigned __int128>(INT64_MAX)) return std::nullopt;
    const auto magnitude = static_cast<std::int64_t>(rounded);
    return negative ? -magnitude : magnitude;
}

/// RFC-style CSV field split: quoted fields may contain commas and doubled
/// quotes. Trailing \r is stripped by the caller.
inline std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

/// Splits an optional trailing unit off a numeric cell ("312.48ms" -> "ms").
inline std::pair<std::string_view, std::string_view> split_inline_unit(std::string_view cell) {
    std::size_t end = cell.size();
    while (end > 0) {
        const char c = cell[end - 1];
        const bool unit_char = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '/';
        if (!unit_char) break;
        --end;
    }
    return {cell.substr(0, end), cell.substr(end)};
}

}  // namespace detail

inline std::pair<NormalizedTrace, IngestReport> parse_trace_text(std::string_view text,
                                                                 const std::string& origin_label) {
    using namespace detail;

    NormalizedTrace trace;
    IngestReport report;

    struct Column {
        std::size_t index = 0;
        bool present = false;
    };
    Column col_start, col_duration, col_size, col_throughput, col_device, col_stream, col_name;

    std::int64_t start_factor = 1'000;  // default microseconds
    std::int64_t duration_factor = 1'000;
    std::int64_t size_col_factor = 1;  // default bytes
    double throughput_col_factor = 1.0;

    bool header_seen = false;
    bool units_checked = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;

    auto next_line = [&](std::string_view& out) -> bool {
        if (pos >= text.size()) return false;
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = (nl == std::string_view::npos)
                                    ? text.substr(pos)
                                    : text.substr(pos, nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() : nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        out = line;
        return true;
    };

    auto parse_header = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const std::string name(trim(fields[i]));
            if (name == "Start") col_start = {i, true};
            else if (name == "Duration") col_duration = {i, true};
            else if (name == "Size") col_size = {i, true};
            else if (name == "Throughput") col_throughput = {i, true};
            else if (name == "Device") col_device = {i, true};
            else if (name == "Stream") col_stream = {i, true};
            else if (name == "Name") col_name = {i, true};
            if (name == "Start" || name == "Duration" || name == "Size" ||
                name == "Throughput" || name == "Device" || name == "Stream" ||
                name == "Name") {
                report.column_map[name] = i;
            }
        }
        for (const char* required : {"Start", "Duration", "Stream", "Name"}) {
            if (!report.column_map.count(required)) {
                throw Error(ErrorKind::MissingColumn,
                            "ingest: required column '" + std::string(required) +
                                "' missing from header of '" + origin_label + "'");
            }
        }
    };

    auto apply_units_row = [&](const std::vector<std::string>& fields) {
        auto unit_at = [&](const Column& col) -> std::string_view {
            if (!col.present || col.index >= fields.size()) return {};
            return trim(fields[col.index]);
        };
        if (auto u = unit_at(col_start); !u.empty()) {
            if (auto f = time_factor(u)) start_factor = *f;
            else trace.warnings.push_back("ingest: unit '" + std::string(u) + "' is not a time unit; Start defaults to us");
        }
        if (auto u = unit_at(col_duration); !u.empty()) {
            if (auto f = time_factor(u)) duration_factor = *f;
            else trace.warnings.push_back("ingest: unit '" + std::string(u) + "' is not a time unit; Duration defaults to us");
        }
        if (auto u = unit_at(col_size); !u.empty()) {
            if (auto f = size_factor(u)) size_col_factor = *f;
            else trace.warnings.push_back("ingest: unit '" + std::string(u) + "' is not a size unit; Size defaults to B");
        }
        if (auto u = unit_at(col_throughput); !u.empty()) {
            if (auto f = throughput_factor(u)) throughput_col_factor = *f;
            else trace.warnings.push_back("ingest: unit '" + std::string(u) + "' is not a throughput unit; Throughput defaults to B/s");
        }
    };

    auto cell_at = [&](const std::vector<std::string>& fields, const Column& col) -> std::string_view {
        if (!col.present || col.index >= fields.size()) return {};
        return trim(fields[col.index]);
    };

    // Time/size cells may carry their unit inline; it overrides the column unit.
    auto parse_time_cell = [&](std::string_view cell, std::int64_t column_factor)
        -> std::optional<std::int64_t> {
        auto [num, unit] = split_inline_unit(cell);
        std::int64_t factor = column_factor;
        if (!unit.empty()) {
            auto f = time_factor(unit);
            if (!f) return std::nullopt;
            factor = *f;
        }
        return parse_scaled_decimal(num, factor);
    };
    auto parse_size_cell = [&](std::string_view cell) -> std::optional<std::int64_t> {
        auto [num, unit] = split_inline_unit(cell);
        std::int64_t factor = size_col_factor;
        if (!unit.empty()) {
            auto f = size_factor(unit);
            if (!f) return std::nullopt;
            factor = *f;
        }
        return parse_scaled_decimal(num, factor);
    };
    auto parse_throughput_cell = [&](std::string_view cell) -> std::optional<double> {
        auto [num, unit] = split_inline_unit(cell);
        double factor = throughput_col_factor;
        if (!unit.empty()) {
            auto f = throughput_factor(unit);
            if (!f) return std::nullopt;
            factor = *f;
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(std::string(num), &used);
            if (used != num.size() || !(v >= 0) || !std::isfinite(v)) return std::nullopt;
            return v * factor;
        } catch (...) {
            return std::nullopt;
        }
    };

    auto skip_row = [&](std::size_t line, std::string reason) {
        ++report.rows_skipped;
        report.skip_reasons.emplace_back(line, std::move(reason));
    };

    std::string_view line;
    while (next_line(line)) {
        if (trim(line).empty()) continue;
        if (line.size() >= 2 && line[0] == '=' && line[1] == '=') continue;

        const auto fields = split_csv(line);
        if (!header_seen) {
            parse_header(fields);
            header_seen = true;
            continue;
        }
        if (!units_checked) {
            units_checked = true;
            bool any = false;
            bool all_units = true;
            for (const auto& f : fields) {
                const auto tok = trim(f);
                if (tok.empty()) continue;
                any = true;
                if (!is_unit_token(tok)) {
                    all_units = false;
                    break;
                }
            }
            if (any && all_units) {
                apply_units_row(fields);
                continue;
            }
        }

        ++report.rows_total;

        const auto start_cell = cell_at(fields, col_start);
        const auto duration_cell = cell_at(fields, col_duration);
        const auto stream_cell = cell_at(fields, col_stream);
        const auto name_cell = cell_at(fields, col_name);

        if (name_cell.empty()) {
            skip_row(line_no, "empty Name");
            continue;
        }
        const auto start = parse_time_cell(start_cell, start_factor);
        if (!start || *start < 0) {
            skip_row(line_no, "unparseable Start '" + std::string(start_cell) + "'");
            continue;
        }
        const auto duration = parse_time_cell(duration_cell, duration_factor);
        if (!duration || *duration < 0) {
            skip_row(line_no, "unparseable Duration '" + std::string(duration_cell) + "'");
            continue;
        }
        std::uint32_t stream = 0;
        {
            bool ok = !stream_cell.empty();
            std::uint64_t v = 0;
            for (char c : stream_cell) {
                if (c < '0' || c > '9') { ok = false; break; }
                v = v * 10 + static_cast<unsigned>(c - '0');
                if (v > UINT32_MAX) { ok = false; break; }
            }
            if (!ok) {
                skip_row(line_no, "unparseable Stream '" + std::string(stream_cell) + "'");
                continue;
            }
            stream = static_cast<std::uint32_t>(v);
        }

        TraceRecord rec;
        rec.start_ns = *start;
        rec.duration_ns = *duration;
        rec.stream = stream;
        rec.name = std::string(name_cell);
        rec.row = line_no;
        rec.device = col_device.present ? std::string(cell_at(fields, col_device)) : "unknown";
        if (rec.device.empty()) rec.device = "unknown";

        if (const auto size_cell = cell_at(fields, col_size); !size_cell.empty()) {
            const auto size = parse_size_cell(size_cell);
            if (!size || *size < 0) {
                skip_row(line_no, "unparseable Size '" + std::string(size_cell) + "'");
                continue;
            }
            rec.size_bytes = *size;
        }
        if (const auto tp_cell = cell_at(fields, col_throughput); !tp_cell.empty()) {
            const auto tp = parse_throughput_cell(tp_cell);
            if (!tp) {
                skip_row(line_no, "unparseable Throughput '" + std::string(tp_cell) + "'");
                continue;
            }
            rec.throughput_bps = *tp;
        }

        trace.records.push_back(std::move(rec));
        ++report.rows_parsed;
    }

    if (!header_seen) {
        throw Error(ErrorKind::MissingColumn,
                    "ingest: no header row found in '" + origin_label + "'");
    }
    if (report.rows_skipped * 10 > report.rows_total) {
        throw Error(ErrorKind::TooManyBadRows,
                    "ingest: " + std::to_string(report.rows_skipped) + " of " +
                        std::to_string(report.rows_total) + " data rows unparseable in '" +
                        origin_label + "'; this looks like a format mismatch");
    }

    std::stable_sort(trace.records.begin(), trace.records.end(),
                     [](const TraceRecord& a, const TraceRecord& b) {
                         if (a.start_ns != b.start_ns) return a.start_ns < b.start_ns;
                         return a.row < b.row;
                     });
    return {std::move(trace), std::move(report)};
}

/// Parses a profiler-exported GPU-trace CSV. Comment lines start with "==",
/// the first content row is the header, an optional units row follows. Rows
/// that fail to parse are skipped with a recorded reason; a skip rate above
/// 10% of data rows is treated as a format mismatch and raises an error.
inline std::pair<NormalizedTrace, IngestReport> parse_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::UnreadableFile,
                    "ingest: cannot open trace file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_trace_text(buf.str(), path.string());
}

}  // namespace itertrace
