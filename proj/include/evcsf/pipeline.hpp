// Copyright 2026 The evcs-forensics Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file pipeline.hpp
 * @brief Forensic process chain: acquisition, preprocessing, correlation and
 *        sequencing of station logs.
 *
 * Every stage is a deterministic function of its input. Only ingest touches
 * the file system.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "evcsf/timeline.hpp"

namespace evcsf {

// ---------------------------------------------------------------------------
// Acquisition
// ---------------------------------------------------------------------------

struct MalformedLine {
    std::string file;
    std::size_t line{0};
    std::string reason;
    std::string text;

    friend bool operator==(const MalformedLine&, const MalformedLine&) = default;
};

struct IngestReport {
    std::vector<MalformedLine> malformed;
    std::vector<std::string> warnings;
};

struct IngestResult {
    std::vector<LogRecord> records;
    IngestReport report;
};

/// Parses log text that came from `origin_file`. Records are appended to
/// `out` with ingest indices continuing from out.records.size().
inline void ingest_text(std::string_view text, const std::string& origin_file, IngestResult& out,
                        const TimestampOptions& options = {}) {
    std::size_t line_no = 0;
    std::size_t good = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(start, end - start);
        ++line_no;
        const bool last = end == text.size();
        start = end + 1;

        std::string_view trimmed = line;
        if (!trimmed.empty() && trimmed.back() == '\r') trimmed.remove_suffix(1);
        if (trimmed.empty() || trimmed.front() == '#') {
            if (last) break;
            continue;
        }
        auto parsed = parse_log_line(trimmed, options);
        if (parsed.record) {
            parsed.record->origin = {origin_file, line_no};
            parsed.record->ingest_index = out.records.size();
            out.records.push_back(std::move(*parsed.record));
            ++good;
        } else {
            out.report.malformed.push_back({origin_file, line_no, parsed.error, std::string(trimmed)});
        }
        if (last) break;
    }
    if (good == 0) out.report.warnings.push_back(origin_file + ": no well-formed records");
}

/// Reads each file in the given order. Throws FileUnreadable for a path that
/// cannot be opened.
inline IngestResult ingest(std::span<const std::filesystem::path> paths, const TimestampOptions& options = {}) {
    IngestResult out;
    for (const auto& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in || std::filesystem::is_directory(path)) {
            throw Error(ErrorCode::FileUnreadable, "cannot read " + path.string());
        }
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        ingest_text(text, path.string(), out, options);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

struct FilterSpec {
    std::optional<IncidentTimestamp> from;
    std::optional<IncidentTimestamp> to;
    std::set<std::string> sources;   // empty: all sources
    std::set<RecordKind> kinds;      // empty: all kinds
};

/// Applies the filters, then folds exact duplicates into their first
/// occurrence (adding to duplicate_count). Relative order is preserved.
inline std::vector<LogRecord> preprocess(std::span<const LogRecord> records, const FilterSpec& filters = {}) {
    if (filters.from && filters.to && compare_instants(*filters.from, *filters.to) > 0) {
        throw Error(ErrorCode::InvalidFilter, "time range start " + to_display(*filters.from) + " is after end " +
                                                  to_display(*filters.to));
    }
    std::vector<LogRecord> out;
    for (const auto& r : records) {
        if (filters.from && compare_instants(r.timestamp, *filters.from) < 0) continue;
        if (filters.to && compare_instants(r.timestamp, *filters.to) > 0) continue;
        if (!filters.sources.empty() && !filters.sources.contains(r.source)) continue;
        if (!filters.kinds.empty() && !filters.kinds.contains(r.kind)) continue;

        auto dup = std::find_if(out.begin(), out.end(), [&](const LogRecord& kept) { return same_content(kept, r); });
        if (dup != out.end()) {
            dup->duplicate_count += r.duplicate_count;
        } else {
            out.push_back(r);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Correlation and sequencing
// ---------------------------------------------------------------------------

struct RecordGroup {
    std::string correlation_id;
    std::vector<LogRecord> records;
};

/// "INC-yyyymmddThhmmssmmm-SOURCE" of the group's first record.
inline std::string correlation_id_for(const LogRecord& first) {
    const auto& t = first.timestamp;
    auto pad = [](unsigned v, std::size_t w) {
        auto s = std::to_string(v);
        while (s.size() < w) s.insert(s.begin(), '0');
        return s;
    };
    return "INC-" + pad(static_cast<unsigned>(t.year), 4) + pad(t.month, 2) + pad(t.day, 2) + "T" + pad(t.hours, 2) +
           pad(t.minutes, 2) + pad(t.seconds, 2) + pad(t.milliseconds, 3) + "-" + first.source;
}

/// Sorts by the sequencing order and starts a new group wherever two
/// consecutive records are more than `gap_threshold_ms` apart.
inline std::vector<RecordGroup> correlate(std::span<const LogRecord> records, std::int64_t gap_threshold_ms = 300'000) {
    if (gap_threshold_ms <= 0) throw Error(ErrorCode::InvalidFilter, "gap threshold must be positive");
    std::vector<LogRecord> sorted(records.begin(), records.end());
    std::sort(sorted.begin(), sorted.end(), sequence_before);

    std::vector<RecordGroup> groups;
    for (auto& r : sorted) {
        if (groups.empty() ||
            r.timestamp.instant_ms() - groups.back().records.back().timestamp.instant_ms() > gap_threshold_ms) {
            groups.push_back({correlation_id_for(r), {}});
        }
        groups.back().records.push_back(std::move(r));
    }
    return groups;
}

inline EventTimeline sequence(const RecordGroup& group) {
    if (group.records.empty()) throw Error(ErrorCode::EmptyGroup, "cannot sequence an empty group");
    EventTimeline timeline;
    timeline.correlation_id = group.correlation_id.empty() ? correlation_id_for(group.records.front())
                                                           : group.correlation_id;
    timeline.records = group.records;
    std::sort(timeline.records.begin(), timeline.records.end(), sequence_before);
    timeline.window_start = timeline.records.front().timestamp;
    timeline.window_end = timeline.records.back().timestamp;
    return timeline;
}

inline EventTimeline sequence(const EventTimeline& timeline) {
    return sequence(RecordGroup{timeline.correlation_id, timeline.records});
}

}  // namespace evcsf
