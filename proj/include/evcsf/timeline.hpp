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
 * @file timeline.hpp
 * @brief Station log records, the pipe-delimited log line format and the
 *        sequenced event timeline.
 *
 * Line format (one record per line, see docs/log-format.md):
 *
 *     SOURCE|DATE|TZ|TIME|KIND|COMMANDED|REPORTED|SEQ|PAYLOAD
 *
 * PAYLOAD is everything after the eighth '|' and may itself contain '|'.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "evcsf/domain.hpp"

namespace evcsf {

enum class RecordKind { Command, StatusReport, ProtocolMessage, OperatorNote };

constexpr std::string_view to_string(RecordKind kind) noexcept {
    switch (kind) {
        case RecordKind::Command: return "command";
        case RecordKind::StatusReport: return "status-report";
        case RecordKind::ProtocolMessage: return "protocol-message";
        case RecordKind::OperatorNote: return "operator-note";
    }
    return "";
}

inline std::optional<RecordKind> parse_record_kind(std::string_view text) noexcept {
    for (auto kind : {RecordKind::Command, RecordKind::StatusReport, RecordKind::ProtocolMessage,
                      RecordKind::OperatorNote}) {
        if (text == to_string(kind)) return kind;
    }
    return std::nullopt;
}

/// Where a record came from. Kept for diagnostics only; never rendered into
/// timelines or reports, which must not depend on file or line order.
struct RecordOrigin {
    std::string file;
    std::size_t line{0};

    friend bool operator==(const RecordOrigin&, const RecordOrigin&) = default;
};

struct LogRecord {
    std::string source;
    IncidentTimestamp timestamp;
    RecordKind kind{RecordKind::OperatorNote};
    std::optional<std::string> commanded_state;
    std::optional<std::string> reported_state;
    std::string payload;
    std::optional<std::uint64_t> sequence_hint;

    RecordOrigin origin;
    std::size_t ingest_index{0};
    std::uint64_t duplicate_count{1};

    friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

/// Identity of a record that survives re-ordering of input files and lines.
struct RecordKey {
    std::string source;
    std::string timestamp;  // to_display() form
    std::optional<std::uint64_t> sequence_hint;

    static RecordKey of(const LogRecord& r) { return {r.source, to_display(r.timestamp), r.sequence_hint}; }

    std::string to_string() const {
        return source + "@" + timestamp + (sequence_hint ? "#" + std::to_string(*sequence_hint) : std::string{});
    }

    friend auto operator<=>(const RecordKey&, const RecordKey&) = default;
};

/// True for two records that agree on every content field (source,
/// timestamp, kind, states, payload). Hints, origin and counts are ignored.
inline bool same_content(const LogRecord& a, const LogRecord& b) {
    return a.source == b.source && a.timestamp.instant_ms() == b.timestamp.instant_ms() &&
           a.timestamp.time_zone == b.timestamp.time_zone && a.kind == b.kind &&
           a.commanded_state == b.commanded_state && a.reported_state == b.reported_state && a.payload == b.payload;
}

/// Total order used to sequence records: timestamp, then sequence hint
/// (records without one go last), then source label, then ingest order.
inline bool sequence_before(const LogRecord& a, const LogRecord& b) {
    const auto hint_key = [](const LogRecord& r) {
        return std::make_tuple(!r.sequence_hint.has_value(), r.sequence_hint.value_or(0));
    };
    const auto ta = a.timestamp.instant_ms();
    const auto tb = b.timestamp.instant_ms();
    if (ta != tb) return ta < tb;
    if (hint_key(a) != hint_key(b)) return hint_key(a) < hint_key(b);
    if (a.source != b.source) return a.source < b.source;
    return a.ingest_index < b.ingest_index;
}

struct EventTimeline {
    std::string correlation_id;
    std::vector<LogRecord> records;
    IncidentTimestamp window_start;
    IncidentTimestamp window_end;

    friend bool operator==(const EventTimeline&, const EventTimeline&) = default;
};

// ---------------------------------------------------------------------------
// Line format
// ---------------------------------------------------------------------------

/// Thrown-free parse result for one line.
struct LineParse {
    std::optional<LogRecord> record;
    std::string error;  // set when record is empty
};

/// Parses one log line. Comment and blank lines are the caller's business.
/// A three-field TIME (hh:mm:ss) gets milliseconds 000.
inline LineParse parse_log_line(std::string_view line, const TimestampOptions& options = {}) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find('\t') != std::string_view::npos) return {std::nullopt, "tab character in line"};

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (fields.size() < 8) {
        const auto bar = line.find('|', start);
        if (bar == std::string_view::npos) break;
        fields.push_back(line.substr(start, bar - start));
        start = bar + 1;
    }
    if (fields.size() != 8) return {std::nullopt, "expected 9 '|'-separated fields"};
    fields.push_back(line.substr(start));

    LogRecord r;
    r.source = std::string(fields[0]);
    if (r.source.empty()) return {std::nullopt, "empty SOURCE"};

    std::string time_text(fields[3]);
    if (detail::split(time_text, ':').size() == 3) time_text += ":000";
    try {
        r.timestamp = parse_timestamp(fields[1], fields[2], time_text, options);
    } catch (const Error& e) {
        return {std::nullopt, e.what()};
    }

    const auto kind = parse_record_kind(fields[4]);
    if (!kind) return {std::nullopt, "unknown KIND '" + std::string(fields[4]) + "'"};
    r.kind = *kind;

    if (!fields[5].empty()) r.commanded_state = std::string(fields[5]);
    if (!fields[6].empty()) r.reported_state = std::string(fields[6]);
    if (r.kind == RecordKind::StatusReport && !r.reported_state) {
        return {std::nullopt, "status-report without REPORTED"};
    }
    if (r.kind == RecordKind::Command && !r.commanded_state) return {std::nullopt, "command without COMMANDED"};

    if (!fields[7].empty()) {
        std::uint64_t seq = 0;
        if (fields[7].size() > 18) return {std::nullopt, "SEQ too large"};
        for (char ch : fields[7]) {
            if (ch < '0' || ch > '9') return {std::nullopt, "SEQ is not a non-negative integer"};
            seq = seq * 10 + static_cast<std::uint64_t>(ch - '0');
        }
        r.sequence_hint = seq;
    }
    r.payload = std::string(fields[8]);
    return {std::move(r), {}};
}

inline std::string format_log_line(const LogRecord& r) {
    std::string out;
    out += r.source;
    out += '|';
    out += r.timestamp.date_text();
    out += '|';
    out += r.timestamp.time_zone;
    out += '|';
    out += r.timestamp.time_text();
    out += '|';
    out += to_string(r.kind);
    out += '|';
    out += r.commanded_state.value_or("");
    out += '|';
    out += r.reported_state.value_or("");
    out += '|';
    if (r.sequence_hint) out += std::to_string(*r.sequence_hint);
    out += '|';
    out += r.payload;
    return out;
}

}  // namespace evcsf
