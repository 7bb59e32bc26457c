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

// End-to-end steps shared by the command-line tool and the acceptance suite.

#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "evcsf/anomaly.hpp"
#include "evcsf/json_io.hpp"
#include "evcsf/pipeline.hpp"
#include "evcsf/report.hpp"
#include "evcsf/scenario.hpp"

namespace evcsf {

inline constexpr int kAnalysisSchemaVersion = 1;

struct AnalysisOptions {
    FilterSpec filters;
    std::int64_t gap_threshold_ms{300'000};
};

struct AnalysisResult {
    IngestReport ingest;
    std::size_t ingested{0};
    std::size_t kept{0};
    std::size_t deduplicated{0};
    std::vector<EventTimeline> timelines;
    std::vector<AnomalyAssessment> assessments;  // aligned with timelines
};

/// preprocess -> correlate -> sequence -> assess. Throws EmptyTimeline when
/// nothing was ingested.
inline AnalysisResult analyze(const IngestResult& ingested, const ModelFile& model,
                              const AnalysisOptions& options = {}) {
    if (ingested.records.empty()) throw Error(ErrorCode::EmptyTimeline, "no records ingested");
    AnalysisResult out;
    out.ingest = ingested.report;
    std::sort(out.ingest.malformed.begin(), out.ingest.malformed.end(),
              [](const MalformedLine& a, const MalformedLine& b) {
                  return std::tie(a.file, a.line) < std::tie(b.file, b.line);
              });
    std::sort(out.ingest.warnings.begin(), out.ingest.warnings.end());
    out.ingested = ingested.records.size();

    const auto clean = preprocess(ingested.records, options.filters);
    out.kept = clean.size();
    std::size_t passing = 0;
    for (const auto& r : clean) passing += r.duplicate_count;
    out.deduplicated = passing - clean.size();

    for (const auto& group : correlate(clean, options.gap_threshold_ms)) {
        out.timelines.push_back(sequence(group));
        out.assessments.push_back(assess_timeline(model.model, out.timelines.back(), model.mapping));
    }
    return out;
}

inline Json to_json(const AnalysisResult& a) {
    Json malformed = Json::array();
    for (const auto& m : a.ingest.malformed) {
        malformed.push_back({{"file", m.file}, {"line", m.line}, {"reason", m.reason}});
    }
    Json timelines = Json::array();
    for (const auto& t : a.timelines) timelines.push_back(to_json(t));
    Json assessments = Json::array();
    for (const auto& x : a.assessments) assessments.push_back(to_json(x));
    return Json{{"schema_version", kAnalysisSchemaVersion},
                {"ingest", {{"records", a.ingested}, {"malformed", std::move(malformed)}, {"warnings", a.ingest.warnings}}},
                {"preprocess", {{"kept", a.kept}, {"deduplicated", a.deduplicated}}},
                {"timelines", std::move(timelines)},
                {"assessments", std::move(assessments)}};
}

inline AnalysisResult analysis_from_json(const Json& j) {
    if (detail::get_as<int>(j, "schema_version") != kAnalysisSchemaVersion) {
        detail::bad_document("unsupported analysis schema_version");
    }
    AnalysisResult a;
    const auto& ingest = detail::member(j, "ingest");
    a.ingested = detail::get_as<std::size_t>(ingest, "records");
    for (const auto& m : detail::member(ingest, "malformed")) {
        a.ingest.malformed.push_back({detail::get_as<std::string>(m, "file"), detail::get_as<std::size_t>(m, "line"),
                                      detail::get_as<std::string>(m, "reason"), {}});
    }
    a.ingest.warnings = detail::get_as<std::vector<std::string>>(ingest, "warnings");
    const auto& pre = detail::member(j, "preprocess");
    a.kept = detail::get_as<std::size_t>(pre, "kept");
    a.deduplicated = detail::get_as<std::size_t>(pre, "deduplicated");
    for (const auto& t : detail::member(j, "timelines")) a.timelines.push_back(timeline_from_json(t));
    for (const auto& x : detail::member(j, "assessments")) a.assessments.push_back(assessment_from_json(x));
    if (a.timelines.size() != a.assessments.size()) detail::bad_document("timelines and assessments do not align");
    return a;
}

/// Index of the timeline to report on: the named one, else the first with
/// flagged records, else the first.
inline std::size_t select_timeline(const AnalysisResult& a, const std::optional<std::string>& correlation_id) {
    if (a.timelines.empty()) throw Error(ErrorCode::EmptyTimeline, "analysis has no timelines");
    if (correlation_id) {
        for (std::size_t i = 0; i < a.timelines.size(); ++i) {
            if (a.timelines[i].correlation_id == *correlation_id) return i;
        }
        throw Error(ErrorCode::MismatchedOrigin, "no timeline " + *correlation_id);
    }
    for (std::size_t i = 0; i < a.assessments.size(); ++i) {
        if (!a.assessments[i].flagged.empty()) return i;
    }
    return 0;
}

inline IncidentReport5W1H report_from_analysis(const AnalysisResult& a, const AttributionSpec& attributions,
                                               const AttributeVocabulary& vocab,
                                               const std::optional<std::string>& correlation_id = std::nullopt,
                                               ReportStatus status = ReportStatus::Final) {
    const auto i = select_timeline(a, correlation_id);
    const auto state = derive_incident_state(a.timelines[i], a.assessments[i], attributions);
    return build_report(a.timelines[i], a.assessments[i], state, attributions, vocab, status);
}

}  // namespace evcsf
