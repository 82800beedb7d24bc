#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace itertrace {

/// All times are integer nanoseconds from the trace origin; integer math keeps
/// sums over millions of records exact where doubles would drift.
using TimeNs = std::int64_t;

enum class OpKind {
    Kernel,
    MemcpyHtoD,
    MemcpyDtoH,
    MemcpyDtoD,
    Memset,
    Other,
};

inline constexpr int kOpKindCount = 6;

inline const char* to_string(OpKind k) {
    switch (k) {
        case OpKind::Kernel: return "Kernel";
        case OpKind::MemcpyHtoD: return "MemcpyHtoD";
        case OpKind::MemcpyDtoH: return "MemcpyDtoH";
        case OpKind::MemcpyDtoD: return "MemcpyDtoD";
        case OpKind::Memset: return "Memset";
        case OpKind::Other: return "Other";
    }
    return "Other";
}

/// One GPU operation row. Sizes are bytes, throughput bytes per second;
/// throughput is kept only because its presence distinguishes copies from
/// kernels, it never enters metric arithmetic.
struct TraceRecord {
    TimeNs start_ns = 0;
    TimeNs duration_ns = 0;
    std::optional<std::int64_t> size_bytes;
    std::optional<double> throughput_bps;
    std::string device;
    std::uint32_t stream = 0;
    std::string name;
    std::size_t row = 0;  // source line number, for diagnostics

    TimeNs end_ns() const { return start_ns + duration_ns; }

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Canonical in-memory trace: records sorted by (start, row), all units
/// normalized. Immutable after construction by convention.
struct NormalizedTrace {
    std::vector<TraceRecord> records;
    TimeNs origin_ns = 0;  // raw timestamp that offset 0 corresponds to
    std::vector<std::string> warnings;

    friend bool operator==(const NormalizedTrace&, const NormalizedTrace&) = default;
};

namespace detail {

inline char ascii_lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](char c) { return ascii_lower(c); });
    return out;
}

inline bool contains_ci(std::string_view haystack, std::string_view needle_lower) {
    if (needle_lower.empty()) return true;
    if (haystack.size() < needle_lower.size()) return false;
    for (std::size_t i = 0; i + needle_lower.size() <= haystack.size(); ++i) {
        bool hit = true;
        for (std::size_t j = 0; j < needle_lower.size(); ++j) {
            if (ascii_lower(haystack[i + j]) != needle_lower[j]) {
                hit = false;
                break;
            }
        }
        if (hit) return true;
    }
    return false;
}

}  // namespace detail

/// Maps an operation name plus throughput presence to its kind. Total and
/// deterministic; precedence is copy marker > memset > throughput. Copy
/// markers are matched case-insensitively inside names that contain "memcpy",
/// since vendor bracketing and casing vary across profiler versions.
inline OpKind classify_op_kind(std::string_view name,
                               const std::optional<double>& throughput) {
    if (detail::contains_ci(name, "memcpy")) {
        if (detail::contains_ci(name, "htod")) return OpKind::MemcpyHtoD;
        if (detail::contains_ci(name, "dtoh")) return OpKind::MemcpyDtoH;
        if (detail::contains_ci(name, "dtod")) return OpKind::MemcpyDtoD;
    }
    if (detail::contains_ci(name, "memset")) return OpKind::Memset;
    if (!throughput.has_value()) return OpKind::Kernel;
    return OpKind::Other;
}

inline OpKind kind_of(const TraceRecord& r) {
    return classify_op_kind(r.name, r.throughput_bps);
}

inline TimeNs record_end(const TraceRecord& r) { return r.end_ns(); }

}  // namespace itertrace
