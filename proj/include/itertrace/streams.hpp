#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "itertrace/errors.hpp"
#include "itertrace/trace.hpp"

namespace itertrace {

struct StreamSummary {
    std::uint32_t stream = 0;
    std::array<std::int64_t, kOpKindCount> counts{};
    TimeNs first_start = 0;
    TimeNs last_end = 0;

    std::int64_t count(OpKind k) const { return counts[static_cast<std::size_t>(k)]; }
    std::int64_t total() const {
        return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    }
    std::int64_t memcpy_total() const {
        return count(OpKind::MemcpyHtoD) + count(OpKind::MemcpyDtoH) + count(OpKind::MemcpyDtoD);
    }

    friend bool operator==(const StreamSummary&, const StreamSummary&) = default;
};

enum class StreamClass { Main, CopyHtoD, CopyDtoH, CopyMixed, Assist };

inline const char* to_string(StreamClass c) {
    switch (c) {
        case StreamClass::Main: return "Main";
        case StreamClass::CopyHtoD: return "CopyHtoD";
        case StreamClass::CopyDtoH: return "CopyDtoH";
        case StreamClass::CopyMixed: return "CopyMixed";
        case StreamClass::Assist: return "Assist";
    }
    return "Assist";
}

/// The main-stream operation names as a dense integer token string. The
/// terminator id sits one past the vocabulary and appears only when a suffix
/// tree is built over the sequence.
struct TokenSequence {
    std::vector<std::int32_t> tokens;
    std::vector<std::string> names;                        // token id -> name
    std::unordered_map<std::string, std::int32_t> ids;     // name -> token id
    std::vector<std::size_t> record_index;                 // token -> record position

    std::size_t size() const { return tokens.size(); }
    std::int32_t terminator() const { return static_cast<std::int32_t>(names.size()); }
    const std::string& name_of(std::int32_t token) const { return names[static_cast<std::size_t>(token)]; }
};

inline std::vector<StreamSummary> summarize_streams(const NormalizedTrace& trace) {
    if (trace.records.empty()) {
        throw Error(ErrorKind::EmptyTrace, "stream-classify: trace has no records");
    }
    std::map<std::uint32_t, StreamSummary> by_stream;
    for (const auto& rec : trace.records) {
        auto [it, inserted] = by_stream.try_emplace(rec.stream);
        auto& s = it->second;
        if (inserted) {
            s.stream = rec.stream;
            s.first_start = rec.start_ns;
            s.last_end = rec.end_ns();
        }
        s.counts[static_cast<std::size_t>(kind_of(rec))] += 1;
        s.first_start = std::min(s.first_start, rec.start_ns);
        s.last_end = std::max(s.last_end, rec.end_ns());
    }
    std::vector<StreamSummary> out;
    out.reserve(by_stream.size());
    for (auto& [_, s] : by_stream) out.push_back(std::move(s));
    return out;
}

/// Rules: any kernel makes a stream Main; all-memcpy streams are copy streams,
/// split by direction; everything else (memsets, mixed housekeeping) assists.
inline std::map<std::uint32_t, StreamClass> classify_streams(
    const std::vector<StreamSummary>& summaries) {
    std::map<std::uint32_t, StreamClass> classes;
    for (const auto& s : summaries) {
        StreamClass cls = StreamClass::Assist;
        if (s.count(OpKind::Kernel) > 0) {
            cls = StreamClass::Main;
        } else if (s.total() > 0 && s.memcpy_total() == s.total()) {
            const bool htod = s.count(OpKind::MemcpyHtoD) > 0;
            const bool dtoh = s.count(OpKind::MemcpyDtoH) > 0;
            const bool dtod = s.count(OpKind::MemcpyDtoD) > 0;
            if (htod && !dtoh && !dtod) cls = StreamClass::CopyHtoD;
            else if (dtoh && !htod && !dtod) cls = StreamClass::CopyDtoH;
            else cls = StreamClass::CopyMixed;
        }
        classes[s.stream] = cls;
    }
    return classes;
}

struct MainStreamChoice {
    std::uint32_t stream = 0;
    std::vector<std::string> warnings;
};

/// Frameworks are expected to create a single kernel-bearing stream; if a
/// trace has several we analyze the dominant one (most kernels, ties to the
/// lowest id) and warn instead of refusing.
inline MainStreamChoice select_main_stream(const std::map<std::uint32_t, StreamClass>& classes,
                                           const std::vector<StreamSummary>& summaries) {
    std::vector<const StreamSummary*> mains;
    for (const auto& s : summaries) {
        auto it = classes.find(s.stream);
        if (it != classes.end() && it->second == StreamClass::Main) mains.push_back(&s);
    }
    if (mains.empty()) {
        throw Error(ErrorKind::NoMainStream,
                    "stream-classify: no stream contains kernel operations");
    }
    const StreamSummary* best = mains.front();
    for (const auto* s : mains) {
        if (s->count(OpKind::Kernel) > best->count(OpKind::Kernel) ||
            (s->count(OpKind::Kernel) == best->count(OpKind::Kernel) && s->stream < best->stream)) {
            best = s;
        }
    }
    MainStreamChoice choice;
    choice.stream = best->stream;
    if (mains.size() > 1) {
        std::string others;
        for (const auto* s : mains) {
            if (s->stream == best->stream) continue;
            if (!others.empty()) others += ", ";
            others += std::to_string(s->stream);
        }
        choice.warnings.push_back("MultipleMainStreams: analyzing stream " +
                                  std::to_string(best->stream) +
                                  " (most kernels); other kernel-bearing streams: " + others);
    }
    return choice;
}

inline TokenSequence build_token_sequence(const NormalizedTrace& trace, std::uint32_t main_stream) {
    TokenSequence seq;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const auto& rec = trace.records[i];
        if (rec.stream != main_stream) continue;
        auto it = seq.ids.find(rec.name);
        std::int32_t id;
        if (it == seq.ids.end()) {
            id = static_cast<std::int32_t>(seq.names.size());
            seq.ids.emplace(rec.name, id);
            seq.names.push_back(rec.name);
        } else {
            id = it->second;
        }
        seq.tokens.push_back(id);
        seq.record_index.push_back(i);
    }
    if (seq.tokens.empty()) {
        throw Error(ErrorKind::EmptyMainStream,
                    "stream-classify: stream " + std::to_string(main_stream) + " has no records");
    }
    return seq;
}

struct DeviceFilterResult {
    NormalizedTrace trace;
    std::vector<std::string> warnings;
};

/// Single-device analysis: records from minority devices are dropped with a
/// warning. Majority by record count, ties to the lexicographically smallest
/// label so the choice is reproducible.
inline DeviceFilterResult filter_majority_device(NormalizedTrace trace) {
    std::map<std::string, std::size_t> census;
    for (const auto& rec : trace.records) census[rec.device] += 1;
    DeviceFilterResult out;
    if (census.size() <= 1) {
        out.trace = std::move(trace);
        return out;
    }
    std::string majority;
    std::size_t best = 0;
    for (const auto& [device, n] : census) {
        if (n > best) {
            best = n;
            majority = device;
        }
    }
    std::size_t dropped = 0;
    NormalizedTrace filtered;
    filtered.origin_ns = trace.origin_ns;
    filtered.warnings = trace.warnings;
    for (auto& rec : trace.records) {
        if (rec.device == majority) filtered.records.push_back(std::move(rec));
        else ++dropped;
    }
    out.warnings.push_back("MultiDeviceTrace: kept majority device '" + majority + "', dropped " +
                           std::to_string(dropped) + " records from other devices");
    out.trace = std::move(filtered);
    return out;
}

/// Counts consecutive main-stream records whose reported intervals overlap
/// (end of one past the start of the next). Timer granularity makes this a
/// warning condition, not an error.
inline std::int64_t count_interval_overlaps(const NormalizedTrace& trace, std::uint32_t stream) {
    std::int64_t overlaps = 0;
    const TraceRecord* prev = nullptr;
    for (const auto& rec : trace.records) {
        if (rec.stream != stream) continue;
        if (prev && prev->end_ns() > rec.start_ns) ++overlaps;
        prev = &rec;
    }
    return overlaps;
}

}  // namespace itertrace
