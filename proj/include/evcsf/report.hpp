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
 * @file report.hpp
 * @brief 5Ws & 1H incident report: construction from a sequenced timeline,
 *        an anomaly assessment and investigator attributions, plus the
 *        human-readable and structured renderings.
 *
 * Who/What/Where/Why/How labels are investigator input. The library fills
 * in When (first flagged record, else first record), the evidence list and
 * the incident verdict.
 */

#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evcsf/anomaly.hpp"
#include "evcsf/incident.hpp"
#include "evcsf/json_io.hpp"

namespace evcsf {

inline constexpr int kReportSchemaVersion = 1;

struct LabeledValue {
    std::string label;
    bool extended{false};

    friend bool operator==(const LabeledValue&, const LabeledValue&) = default;
};

struct EvidenceItem {
    std::size_t timeline_index{0};
    RecordKey record;
    std::string annotation;

    friend bool operator==(const EvidenceItem&, const EvidenceItem&) = default;
};

struct AnomalySummary {
    double p_abnormal{0.0};
    std::size_t flagged{0};
    std::size_t examined{0};
    std::size_t skipped{0};

    friend bool operator==(const AnomalySummary&, const AnomalySummary&) = default;
};

enum class ReportStatus { Final, Draft };

struct IncidentReport5W1H {
    std::string correlation_id;
    ReportStatus status{ReportStatus::Final};

    std::optional<LabeledValue> attacker;    // Who: alpha
    std::vector<LabeledValue> victim;        // Who: nu
    std::vector<LabeledValue> target;        // What: tau
    std::optional<IncidentTimestamp> when;   // When: delta (date) and iota (time)
    std::vector<LabeledValue> attack_path;   // Where: rho
    std::vector<LabeledValue> hazardous_behavior;  // Why: beta
    std::vector<LabeledValue> attack_method;       // How: omega

    std::vector<EvidenceItem> evidence;
    AnomalySummary anomaly;
    std::uint64_t incident_score{0};
    bool is_incident{false};
    std::optional<IncidentState> incident_state;

    friend bool operator==(const IncidentReport5W1H&, const IncidentReport5W1H&) = default;
};

/// Investigator input for one report.
struct AttributionSpec {
    std::optional<std::string> attacker;
    std::vector<std::string> victim;
    std::vector<std::string> target;
    std::vector<std::string> attack_path;
    std::vector<std::string> hazardous_behavior;
    std::vector<std::string> attack_method;
    std::optional<IncidentTimestamp> when;

    /// Source label -> station entity, used to build the zeta vector.
    std::map<std::string, EntityRef> entities;
    /// Mitigator -> "no controllability" flag. Empty: C1 and I1 both failed.
    std::vector<std::pair<MitigatorRef, bool>> mitigators;
};

/// Which of the six investigator-supplied attributes are absent.
inline std::vector<AttributeCategory> missing_attributions(const AttributionSpec& spec) {
    std::vector<AttributeCategory> missing;
    if (!spec.attacker || spec.attacker->empty()) missing.push_back(AttributeCategory::Attacker);
    if (spec.victim.empty()) missing.push_back(AttributeCategory::Victim);
    if (spec.target.empty()) missing.push_back(AttributeCategory::Target);
    if (spec.attack_path.empty()) missing.push_back(AttributeCategory::AttackPath);
    if (spec.hazardous_behavior.empty()) missing.push_back(AttributeCategory::HazardousBehavior);
    if (spec.attack_method.empty()) missing.push_back(AttributeCategory::AttackMethod);
    return missing;
}

/// zeta_i = 1 for every entity whose records were flagged; chi from the
/// attribution's mitigator list. Sources without an explicit entity get
/// S-indices after the largest one in use, in source-name order.
inline IncidentState derive_incident_state(const EventTimeline& timeline, const AnomalyAssessment& assessment,
                                           const AttributionSpec& spec) {
    std::set<std::string> sources;
    for (const auto& r : timeline.records) sources.insert(r.source);

    std::map<std::string, EntityRef> refs;
    std::uint32_t next_station = 0;
    for (const auto& [source, ref] : spec.entities) {
        if (ref.subsystem == Subsystem::S) next_station = std::max(next_station, ref.index);
    }
    for (const auto& source : sources) {
        auto it = spec.entities.find(source);
        refs.emplace(source, it != spec.entities.end() ? it->second : EntityRef{Subsystem::S, ++next_station});
    }

    std::vector<EntityRef> entities;
    std::vector<bool> zeta;
    for (const auto& [source, ref] : refs) {
        if (std::find(entities.begin(), entities.end(), ref) != entities.end()) continue;
        entities.push_back(ref);
        zeta.push_back(false);
    }
    if (entities.empty()) throw Error(ErrorCode::EmptyTimeline, "timeline has no records");
    std::vector<MitigatorRef> mitigators;
    std::vector<bool> chi;
    if (spec.mitigators.empty()) {
        mitigators = {MitigatorRef{MitigatorKind::C, 1}, MitigatorRef{MitigatorKind::I, 1}};
        chi = {true, true};
    } else {
        for (const auto& [ref, failed] : spec.mitigators) {
            mitigators.push_back(ref);
            chi.push_back(failed);
        }
    }
    IncidentState state(std::move(entities), std::move(zeta), std::move(mitigators), std::move(chi));
    for (const auto& flag : assessment.flagged) {
        auto it = refs.find(flag.record.source);
        if (it != refs.end()) state = state.with_attack_flag(it->second, true);
    }
    return state;
}

namespace detail {

inline std::string format_probability(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", p);
    return buf;
}

inline std::vector<LabeledValue> labeled(const std::vector<std::string>& labels, AttributeCategory c,
                                         const AttributeVocabulary& vocab) {
    std::vector<LabeledValue> out;
    for (const auto& l : labels) out.push_back({l, validate_label(c, l, vocab) == Membership::Extended});
    return out;
}

}  // namespace detail

/// Throws EmptyTimeline, MissingAttribution (final reports only) or
/// MismatchedOrigin when the assessment does not belong to the timeline.
inline IncidentReport5W1H build_report(const EventTimeline& timeline, const AnomalyAssessment& assessment,
                                       const IncidentState& incident, const AttributionSpec& attributions,
                                       const AttributeVocabulary& vocab,
                                       ReportStatus status = ReportStatus::Final) {
    if (timeline.records.empty()) throw Error(ErrorCode::EmptyTimeline, "cannot report on an empty timeline");
    if (!assessment.correlation_id.empty() && assessment.correlation_id != timeline.correlation_id) {
        throw Error(ErrorCode::MismatchedOrigin, "assessment " + assessment.correlation_id + " does not belong to " +
                                                     timeline.correlation_id);
    }
    if (status == ReportStatus::Final) {
        const auto missing = missing_attributions(attributions);
        if (!missing.empty()) {
            std::string list;
            for (auto c : missing) list += (list.empty() ? "" : ", ") + std::string(key_of(c));
            throw Error(ErrorCode::MissingAttribution, "{" + list + "}");
        }
    }

    IncidentReport5W1H r;
    r.correlation_id = timeline.correlation_id;
    r.status = status;
    if (attributions.attacker && !attributions.attacker->empty()) {
        r.attacker = LabeledValue{*attributions.attacker,
                                  validate_label(AttributeCategory::Attacker, *attributions.attacker, vocab) ==
                                      Membership::Extended};
    }
    r.victim = detail::labeled(attributions.victim, AttributeCategory::Victim, vocab);
    r.target = detail::labeled(attributions.target, AttributeCategory::Target, vocab);
    r.attack_path = detail::labeled(attributions.attack_path, AttributeCategory::AttackPath, vocab);
    r.hazardous_behavior = detail::labeled(attributions.hazardous_behavior, AttributeCategory::HazardousBehavior, vocab);
    r.attack_method = detail::labeled(attributions.attack_method, AttributeCategory::AttackMethod, vocab);

    for (const auto& f : assessment.flagged) {
        if (f.timeline_index >= timeline.records.size() ||
            RecordKey::of(timeline.records[f.timeline_index]) != f.record) {
            throw Error(ErrorCode::MismatchedOrigin, "flagged record " + f.record.to_string() + " is not in timeline " +
                                                         timeline.correlation_id);
        }
        const auto& rec = timeline.records[f.timeline_index];
        std::string note = std::string(to_string(rec.kind)) + " reported '" + rec.reported_state.value_or("") +
                           "' while '" + rec.commanded_state.value_or("") + "' was commanded; " +
                           f.transmitted.to_string() + " received as " + f.received.to_string();
        note += f.posterior ? ", P(sent|received) = " + detail::format_probability(*f.posterior)
                            : ", received symbol has zero probability under the model";
        r.evidence.push_back({f.timeline_index, f.record, std::move(note)});
    }

    if (attributions.when) {
        r.when = attributions.when;
    } else if (!assessment.flagged.empty()) {
        r.when = timeline.records[assessment.flagged.front().timeline_index].timestamp;
    } else {
        r.when = timeline.records.front().timestamp;
    }

    r.anomaly = {assessment.p_abnormal, assessment.flagged.size(), assessment.examined.size(), assessment.skipped};
    r.incident_score = incident_score(incident);
    r.is_incident = is_incident(incident);
    r.incident_state = incident;
    return r;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

enum class ReportFormat { HumanText, Structured };

namespace detail {

inline std::string join_labels(const std::vector<LabeledValue>& values) {
    if (values.empty()) return "undetermined";
    std::string out;
    for (const auto& v : values) {
        if (!out.empty()) out += ", ";
        out += v.label;
        if (v.extended) out += "*";
    }
    return out;
}

inline Json labels_json(const std::vector<LabeledValue>& values) {
    Json a = Json::array();
    for (const auto& v : values) a.push_back({{"label", v.label}, {"extended", v.extended}});
    return a;
}

inline std::vector<LabeledValue> labels_from_json(const Json& j) {
    std::vector<LabeledValue> out;
    for (const auto& v : j) out.push_back({get_as<std::string>(v, "label"), get_as<bool>(v, "extended")});
    return out;
}

}  // namespace detail

inline Json to_json(const IncidentReport5W1H& r) {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["correlation_id"] = r.correlation_id;
    j["status"] = r.status == ReportStatus::Final ? "final" : "draft";
    Json attrs;
    attrs["attacker"] = r.attacker ? Json{{"label", r.attacker->label}, {"extended", r.attacker->extended}}
                                   : Json(nullptr);
    attrs["victim"] = detail::labels_json(r.victim);
    attrs["target"] = detail::labels_json(r.target);
    if (r.when) {
        attrs["date"] = r.when->date_text();
        attrs["time"] = {{"tz", r.when->time_zone}, {"time", r.when->time_text()}};
    } else {
        attrs["date"] = nullptr;
        attrs["time"] = nullptr;
    }
    attrs["attack_path"] = detail::labels_json(r.attack_path);
    attrs["hazardous_behavior"] = detail::labels_json(r.hazardous_behavior);
    attrs["attack_method"] = detail::labels_json(r.attack_method);
    j["attributes"] = std::move(attrs);

    Json evidence = Json::array();
    for (const auto& e : r.evidence) {
        evidence.push_back(
            {{"timeline_index", e.timeline_index}, {"record", to_json(e.record)}, {"annotation", e.annotation}});
    }
    j["evidence"] = std::move(evidence);
    j["anomaly"] = {{"p_abnormal", r.anomaly.p_abnormal},
                    {"flagged", r.anomaly.flagged},
                    {"examined", r.anomaly.examined},
                    {"skipped", r.anomaly.skipped}};
    Json incident{{"score", r.incident_score}, {"is_incident", r.is_incident}};
    incident["state"] = r.incident_state ? to_json(*r.incident_state) : Json(nullptr);
    j["incident"] = std::move(incident);
    return j;
}

inline IncidentReport5W1H report_from_json(const Json& j) {
    if (detail::get_as<int>(j, "schema_version") != kReportSchemaVersion) {
        detail::bad_document("unsupported report schema_version");
    }
    IncidentReport5W1H r;
    r.correlation_id = detail::get_as<std::string>(j, "correlation_id");
    const auto status = detail::get_as<std::string>(j, "status");
    if (status != "final" && status != "draft") detail::bad_document("unknown report status '" + status + "'");
    r.status = status == "final" ? ReportStatus::Final : ReportStatus::Draft;

    const auto& a = detail::member(j, "attributes");
    if (const auto& att = detail::member(a, "attacker"); !att.is_null()) {
        r.attacker = LabeledValue{detail::get_as<std::string>(att, "label"), detail::get_as<bool>(att, "extended")};
    }
    r.victim = detail::labels_from_json(detail::member(a, "victim"));
    r.target = detail::labels_from_json(detail::member(a, "target"));
    const auto& date = detail::member(a, "date");
    const auto& time = detail::member(a, "time");
    if (!date.is_null() && !time.is_null()) {
        r.when = parse_timestamp(date.get<std::string>(), detail::get_as<std::string>(time, "tz"),
                                 detail::get_as<std::string>(time, "time"));
    }
    r.attack_path = detail::labels_from_json(detail::member(a, "attack_path"));
    r.hazardous_behavior = detail::labels_from_json(detail::member(a, "hazardous_behavior"));
    r.attack_method = detail::labels_from_json(detail::member(a, "attack_method"));

    for (const auto& e : detail::member(j, "evidence")) {
        r.evidence.push_back({detail::get_as<std::size_t>(e, "timeline_index"),
                              record_key_from_json(detail::member(e, "record")),
                              detail::get_as<std::string>(e, "annotation")});
    }
    const auto& an = detail::member(j, "anomaly");
    r.anomaly = {detail::get_as<double>(an, "p_abnormal"), detail::get_as<std::size_t>(an, "flagged"),
                 detail::get_as<std::size_t>(an, "examined"), detail::get_as<std::size_t>(an, "skipped")};
    const auto& inc = detail::member(j, "incident");
    r.incident_score = detail::get_as<std::uint64_t>(inc, "score");
    r.is_incident = detail::get_as<bool>(inc, "is_incident");
    if (const auto& st = detail::member(inc, "state"); !st.is_null()) r.incident_state = incident_state_from_json(st);
    return r;
}

/// Human text mirrors the two-column attribute table: rows in Who, What,
/// When, Where, Why, How order; empty attributes read "undetermined".
inline std::string render_text(const IncidentReport5W1H& r) {
    struct Row {
        const char* question;
        const char* definition;
        std::string value;
    };
    const std::string attacker =
        r.attacker ? r.attacker->label + (r.attacker->extended ? "*" : "") : std::string("undetermined");
    const std::vector<Row> rows{
        {"Who", "Attacker (alpha)", attacker},
        {"", "Victim (nu)", detail::join_labels(r.victim)},
        {"What", "Attack target (tau)", detail::join_labels(r.target)},
        {"When", "Date (delta)", r.when ? r.when->date_text() : "undetermined"},
        {"", "Time (iota)", r.when ? r.when->time_zone + " " + r.when->time_text() : "undetermined"},
        {"Where", "Attack path (rho)", detail::join_labels(r.attack_path)},
        {"Why", "Hazardous behavior (beta)", detail::join_labels(r.hazardous_behavior)},
        {"How", "Attack method (omega)", detail::join_labels(r.attack_method)},
    };

    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(s.size(), w), ' ');
        return s;
    };
    std::string out;
    out += "5Ws & 1H incident report\n";
    out += "Correlation id: " + r.correlation_id + "\n";
    out += std::string("Status: ") + (r.status == ReportStatus::Final ? "final" : "draft") + "\n\n";
    out += pad("Attribute", 10) + pad("Definition", 27) + "Value\n";
    out += std::string(9, '-') + " " + std::string(26, '-') + " " + std::string(40, '-') + "\n";
    for (const auto& row : rows) out += pad(row.question, 10) + pad(row.definition, 27) + row.value + "\n";
    out += "(* label outside the configured vocabulary)\n\n";

    out += "Incident: " + std::string(r.is_incident ? "yes" : "no") + " (score " + std::to_string(r.incident_score) +
           ")\n";
    if (r.incident_state) {
        const auto& s = *r.incident_state;
        out += "  zeta:";
        for (std::size_t i = 0; i < s.entities().size(); ++i) {
            out += " " + s.entities()[i].to_string() + "=" + (s.zeta()[i] ? "1" : "0");
        }
        out += "\n  chi:";
        for (std::size_t i = 0; i < s.mitigators().size(); ++i) {
            out += " " + s.mitigators()[i].to_string() + "=" + (s.chi()[i] ? "1" : "0");
        }
        out += "\n";
    }
    out += "Anomaly: P(E) = " + detail::format_probability(r.anomaly.p_abnormal) + "; " +
           std::to_string(r.anomaly.flagged) + " flagged of " + std::to_string(r.anomaly.examined) +
           " examined; " + std::to_string(r.anomaly.skipped) + " skipped\n";
    out += "Evidence:\n";
    if (r.evidence.empty()) out += "  (none)\n";
    for (std::size_t i = 0; i < r.evidence.size(); ++i) {
        const auto& e = r.evidence[i];
        out += "  [" + std::to_string(i + 1) + "] #" + std::to_string(e.timeline_index) + " " + e.record.to_string() +
               ": " + e.annotation + "\n";
    }
    return out;
}

inline std::string render_report(const IncidentReport5W1H& r, ReportFormat format) {
    return format == ReportFormat::HumanText ? render_text(r) : dump(to_json(r));
}

inline IncidentReport5W1H parse_report(std::string_view structured) {
    try {
        return report_from_json(Json::parse(structured));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedDocument, e.what());
    }
}

// ---------------------------------------------------------------------------
// Attribution file
// ---------------------------------------------------------------------------

/// Keys: attacker (string), victim/target/attack_path/hazardous_behavior/
/// attack_method (string or list), optional date + tz + time override,
/// optional "entities" {source: "S1"} and "mitigators" {"C1": 1}.
inline AttributionSpec attribution_from_json(const Json& j) {
    if (!j.is_object()) detail::bad_document("attribution document must be an object");
    auto list = [&](const char* key) {
        std::vector<std::string> out;
        if (!j.contains(key) || j.at(key).is_null()) return out;
        if (j.at(key).is_string()) {
            out.push_back(j.at(key).get<std::string>());
        } else {
            out = detail::get_as<std::vector<std::string>>(j, key);
        }
        return out;
    };
    AttributionSpec s;
    s.attacker = detail::opt_string(j, "attacker");
    s.victim = list("victim");
    s.target = list("target");
    s.attack_path = list("attack_path");
    s.hazardous_behavior = list("hazardous_behavior");
    s.attack_method = list("attack_method");
    if (j.contains("date") || j.contains("time")) {
        s.when = parse_timestamp(detail::get_as<std::string>(j, "date"), detail::get_as<std::string>(j, "tz"),
                                 detail::get_as<std::string>(j, "time"));
    }
    if (j.contains("entities")) {
        for (const auto& [source, ref] : j.at("entities").items()) {
            s.entities.emplace(source, EntityRef::parse(ref.get<std::string>()));
        }
    }
    if (j.contains("mitigators")) {
        for (const auto& [ref, failed] : j.at("mitigators").items()) {
            s.mitigators.emplace_back(MitigatorRef::parse(ref), failed.is_boolean() ? failed.get<bool>()
                                                                                   : failed.get<int>() != 0);
        }
    }
    return s;
}

}  // namespace evcsf
