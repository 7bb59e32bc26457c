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
 * @file scenario.hpp
 * @brief Deterministic station-episode generator with attack injection, and
 *        scoring of detections against the generator's ground truth.
 */

#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "evcsf/anomaly.hpp"
#include "evcsf/json_io.hpp"

namespace evcsf {

struct ScriptStep {
    std::int64_t at_ms{0};  // offset from the scenario base timestamp
    std::string source;
    RecordKind kind{RecordKind::OperatorNote};
    std::optional<std::string> commanded_state;
    std::optional<std::string> true_state;
    std::string payload;

    friend bool operator==(const ScriptStep&, const ScriptStep&) = default;
};

struct AttackInjection {
    std::string target;
    std::string method;       // attack-method label, e.g. "tampering"
    std::string attack_path;  // optional attack-path label, e.g. "OTA update"
    std::map<std::string, std::string> effect;  // true state -> falsified report
    std::int64_t start_ms{0};
    std::int64_t end_ms{0};
    std::string ground_truth_tag;

    friend bool operator==(const AttackInjection&, const AttackInjection&) = default;
};

struct Scenario {
    std::string name;
    std::uint64_t seed{0};
    std::vector<ScriptStep> script;
    std::vector<AttackInjection> injections;
    IncidentTimestamp base_timestamp;
    std::int64_t jitter_ms{0};  // 0 disables timing jitter

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct ManifestEntry {
    std::string ground_truth_tag;
    std::string method;
    std::string attack_path;
    RecordKey record;
    std::string true_state;
    std::string reported_state;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct GroundTruthManifest {
    std::string scenario;
    std::uint64_t seed{0};
    std::size_t record_count{0};
    std::vector<ManifestEntry> falsified;

    friend bool operator==(const GroundTruthManifest&, const GroundTruthManifest&) = default;
};

struct GeneratedEpisode {
    std::vector<LogRecord> records;
    GroundTruthManifest manifest;
};

/// Throws InvalidScenario naming the first violated invariant.
inline void validate_scenario(const Scenario& s) {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidScenario, why); };
    if (s.name.empty()) fail("scenario name is empty");
    if (s.script.empty()) fail("script is empty");
    if (s.jitter_ms < 0) fail("jitter must be non-negative");
    check_timestamp(s.base_timestamp);
    std::set<std::string> sources;
    for (std::size_t i = 0; i < s.script.size(); ++i) {
        const auto& step = s.script[i];
        if (step.at_ms < 0) fail("step " + std::to_string(i + 1) + " has a negative offset");
        if (i > 0 && step.at_ms < s.script[i - 1].at_ms) fail("step " + std::to_string(i + 1) + " goes back in time");
        if (step.source.empty() || step.source.find('|') != std::string::npos) {
            fail("step " + std::to_string(i + 1) + " has an invalid source");
        }
        if (step.kind == RecordKind::Command && !step.commanded_state) {
            fail("command step " + std::to_string(i + 1) + " has no commanded state");
        }
        if (step.kind == RecordKind::StatusReport && !step.true_state) {
            fail("status-report step " + std::to_string(i + 1) + " has no true state");
        }
        sources.insert(step.source);
    }
    for (const auto& inj : s.injections) {
        if (!sources.contains(inj.target)) fail("injection " + inj.ground_truth_tag + " targets unknown source " + inj.target);
        if (inj.start_ms > inj.end_ms) fail("injection " + inj.ground_truth_tag + " has an inverted window");
        if (inj.method.empty()) fail("injection " + inj.ground_truth_tag + " has no attack method");
        if (inj.ground_truth_tag.empty()) fail("injection without ground-truth tag");
        const bool changes_something =
            std::any_of(inj.effect.begin(), inj.effect.end(), [](const auto& kv) { return kv.first != kv.second; });
        if (!changes_something) fail("injection " + inj.ground_truth_tag + " has an identity effect");
    }
}

/// One record per scripted step. Inside an active injection window the
/// reported state is the injection's falsified value. Output depends only on
/// (scenario, seed).
inline GeneratedEpisode generate(const Scenario& s) {
    validate_scenario(s);
    GeneratedEpisode out;
    out.manifest.scenario = s.name;
    out.manifest.seed = s.seed;

    std::mt19937_64 rng(s.seed);
    std::int64_t previous = 0;
    for (std::size_t i = 0; i < s.script.size(); ++i) {
        const auto& step = s.script[i];
        std::int64_t at = step.at_ms;
        if (s.jitter_ms > 0) {
            const auto span = static_cast<std::uint64_t>(2 * s.jitter_ms + 1);
            at += static_cast<std::int64_t>(rng() % span) - s.jitter_ms;
        }
        // jitter never reorders the script
        at = std::max({at, previous, std::int64_t{0}});
        previous = at;

        LogRecord r;
        r.source = step.source;
        r.timestamp = shifted(s.base_timestamp, at);
        r.kind = step.kind;
        r.commanded_state = step.commanded_state;
        r.reported_state = step.true_state;
        r.payload = step.payload;
        r.sequence_hint = i + 1;
        r.ingest_index = i;

        if (step.true_state) {
            for (const auto& inj : s.injections) {
                if (inj.target != step.source || step.at_ms < inj.start_ms || step.at_ms > inj.end_ms) continue;
                auto it = inj.effect.find(*step.true_state);
                if (it == inj.effect.end() || it->second == *step.true_state) continue;
                r.reported_state = it->second;
                out.manifest.falsified.push_back(
                    {inj.ground_truth_tag, inj.method, inj.attack_path, RecordKey::of(r), *step.true_state, it->second});
                break;
            }
        }
        out.records.push_back(std::move(r));
    }
    out.manifest.record_count = out.records.size();
    return out;
}

inline std::string to_log_text(std::span<const LogRecord> records, const std::string& header = {}) {
    std::string out;
    if (!header.empty()) out += "# " + header + "\n";
    for (const auto& r : records) out += format_log_line(r) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Builtin scenarios
// ---------------------------------------------------------------------------

/// Feeder fault, PCC trip, operator response, and tampered BMS and CB
/// status reports. Steps are one second apart; the tampered reports land
/// on 05-16-22 EST 02:20:40:47. The operator opens the CB before switching
/// the BMS mode.
inline Scenario builtin_scenario_1() {
    Scenario s;
    s.name = "scenario1";
    s.seed = 1;
    s.base_timestamp = parse_timestamp("05-16-22", "EST", "02:20:36:47");
    s.script = {
        {0, "BMS", RecordKind::StatusReport, "charging", "charging", "BMS in charging mode, drawing power from utility"},
        {0, "CB", RecordKind::StatusReport, "closed", "closed", "PCC breaker closed, grid-connected operation"},
        {1000, "FEEDER", RecordKind::ProtocolMessage, std::nullopt, std::nullopt,
         "IEC 61850 GOOSE: external fault on distribution feeder line"},
        {2000, "PROTECTION", RecordKind::ProtocolMessage, std::nullopt, std::nullopt,
         "IEC 61850 GOOSE: overcurrent protection trips PCC breaker"},
        {3000, "CB", RecordKind::Command, "open", std::nullopt, "operator command: open CB"},
        {3000, "BMS", RecordKind::Command, "discharging", std::nullopt, "operator command: switch BMS to discharging"},
        {4000, "CB", RecordKind::StatusReport, "open", "open", "OCPP StatusNotification: CB status"},
        {4000, "BMS", RecordKind::StatusReport, "discharging", "discharging", "OCPP StatusNotification: BMS mode"},
    };
    s.injections = {
        {"BMS", "tampering", "OTA update", {{"discharging", "charging"}}, 3000, 4000, "S1-BMS-MODE"},
        {"CB", "tampering", "OTA update", {{"open", "closed"}}, 3000, 4000, "S1-CB-STATUS"},
    };
    return s;
}

/// Scenario 1 with the injections stripped.
inline Scenario builtin_scenario_1_clean() {
    Scenario s = builtin_scenario_1();
    s.name = "scenario1-clean";
    s.injections.clear();
    return s;
}

inline std::optional<Scenario> builtin_scenario(std::string_view name) {
    if (name == "scenario1") return builtin_scenario_1();
    if (name == "scenario1-clean") return builtin_scenario_1_clean();
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Detection scoring
// ---------------------------------------------------------------------------

struct ConfusionSummary {
    std::size_t true_positives{0};
    std::size_t false_positives{0};
    std::size_t false_negatives{0};
    /// 1 by convention when the denominator is zero.
    double precision{1.0};
    double recall{1.0};

    friend bool operator==(const ConfusionSummary&, const ConfusionSummary&) = default;
};

/// Compares flagged records against the falsified records in the manifest.
/// Every manifest record must have been examined by one of the
/// assessments, otherwise the two do not describe the same record set.
inline ConfusionSummary evaluate_detection(const GroundTruthManifest& manifest,
                                           std::span<const AnomalyAssessment> assessments) {
    std::set<RecordKey> examined;
    std::set<RecordKey> flagged;
    for (const auto& a : assessments) {
        examined.insert(a.examined.begin(), a.examined.end());
        for (const auto& f : a.flagged) flagged.insert(f.record);
    }
    std::set<RecordKey> truth;
    for (const auto& e : manifest.falsified) {
        if (!examined.contains(e.record)) {
            throw Error(ErrorCode::MismatchedOrigin, "manifest record " + e.record.to_string() + " was never assessed");
        }
        truth.insert(e.record);
    }
    ConfusionSummary c;
    for (const auto& k : flagged) (truth.contains(k) ? c.true_positives : c.false_positives)++;
    for (const auto& k : truth) {
        if (!flagged.contains(k)) ++c.false_negatives;
    }
    if (c.true_positives + c.false_positives > 0) {
        c.precision = static_cast<double>(c.true_positives) / static_cast<double>(c.true_positives + c.false_positives);
    }
    if (c.true_positives + c.false_negatives > 0) {
        c.recall = static_cast<double>(c.true_positives) / static_cast<double>(c.true_positives + c.false_negatives);
    }
    return c;
}

inline ConfusionSummary evaluate_detection(const GroundTruthManifest& manifest, const AnomalyAssessment& assessment) {
    return evaluate_detection(manifest, std::span<const AnomalyAssessment>(&assessment, 1));
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline Json to_json(const GroundTruthManifest& m) {
    Json entries = Json::array();
    for (const auto& e : m.falsified) {
        entries.push_back({{"ground_truth_tag", e.ground_truth_tag},
                           {"method", e.method},
                           {"attack_path", e.attack_path},
                           {"record", to_json(e.record)},
                           {"true_state", e.true_state},
                           {"reported_state", e.reported_state}});
    }
    return Json{{"scenario", m.scenario}, {"seed", m.seed}, {"record_count", m.record_count},
                {"falsified", std::move(entries)}};
}

inline GroundTruthManifest manifest_from_json(const Json& j) {
    GroundTruthManifest m;
    m.scenario = detail::get_as<std::string>(j, "scenario");
    m.seed = detail::get_as<std::uint64_t>(j, "seed");
    m.record_count = detail::get_as<std::size_t>(j, "record_count");
    for (const auto& e : detail::member(j, "falsified")) {
        m.falsified.push_back({detail::get_as<std::string>(e, "ground_truth_tag"),
                               detail::get_as<std::string>(e, "method"), detail::get_as<std::string>(e, "attack_path"),
                               record_key_from_json(detail::member(e, "record")),
                               detail::get_as<std::string>(e, "true_state"),
                               detail::get_as<std::string>(e, "reported_state")});
    }
    return m;
}

inline Json to_json(const ConfusionSummary& c) {
    return Json{{"true_positives", c.true_positives}, {"false_positives", c.false_positives},
                {"false_negatives", c.false_negatives}, {"precision", c.precision}, {"recall", c.recall}};
}

inline Json to_json(const Scenario& s) {
    Json script = Json::array();
    for (const auto& st : s.script) {
        Json j{{"at_ms", st.at_ms}, {"source", st.source}, {"kind", std::string(to_string(st.kind))}};
        j["commanded"] = st.commanded_state ? Json(*st.commanded_state) : Json(nullptr);
        j["true_state"] = st.true_state ? Json(*st.true_state) : Json(nullptr);
        j["payload"] = st.payload;
        script.push_back(std::move(j));
    }
    Json injections = Json::array();
    for (const auto& inj : s.injections) {
        injections.push_back({{"target", inj.target},
                              {"method", inj.method},
                              {"attack_path", inj.attack_path},
                              {"effect", inj.effect},
                              {"active_window", {inj.start_ms, inj.end_ms}},
                              {"ground_truth_tag", inj.ground_truth_tag}});
    }
    return Json{{"name", s.name},
                {"seed", s.seed},
                {"jitter_ms", s.jitter_ms},
                {"base_timestamp", to_json(s.base_timestamp)},
                {"script", std::move(script)},
                {"injections", std::move(injections)}};
}

inline Scenario scenario_from_json(const Json& j) {
    Scenario s;
    s.name = detail::get_as<std::string>(j, "name");
    if (j.contains("seed")) s.seed = detail::get_as<std::uint64_t>(j, "seed");
    if (j.contains("jitter_ms")) s.jitter_ms = detail::get_as<std::int64_t>(j, "jitter_ms");
    s.base_timestamp = timestamp_from_json(detail::member(j, "base_timestamp"));
    for (const auto& st : detail::member(j, "script")) {
        ScriptStep step;
        step.at_ms = detail::get_as<std::int64_t>(st, "at_ms");
        step.source = detail::get_as<std::string>(st, "source");
        const auto kind = parse_record_kind(detail::get_as<std::string>(st, "kind"));
        if (!kind) detail::bad_document("unknown step kind");
        step.kind = *kind;
        step.commanded_state = detail::opt_string(st, "commanded");
        step.true_state = detail::opt_string(st, "true_state");
        if (st.contains("payload")) step.payload = detail::get_as<std::string>(st, "payload");
        s.script.push_back(std::move(step));
    }
    if (j.contains("injections")) {
        for (const auto& ij : j.at("injections")) {
            AttackInjection inj;
            inj.target = detail::get_as<std::string>(ij, "target");
            inj.method = detail::get_as<std::string>(ij, "method");
            if (ij.contains("attack_path")) inj.attack_path = detail::get_as<std::string>(ij, "attack_path");
            inj.effect = detail::get_as<std::map<std::string, std::string>>(ij, "effect");
            const auto window = detail::get_as<std::vector<std::int64_t>>(ij, "active_window");
            if (window.size() != 2) detail::bad_document("active_window must be [start, end]");
            inj.start_ms = window[0];
            inj.end_ms = window[1];
            inj.ground_truth_tag = detail::get_as<std::string>(ij, "ground_truth_tag");
            s.injections.push_back(std::move(inj));
        }
    }
    return s;
}

}  // namespace evcsf
