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
 * @file json_io.hpp
 * @brief JSON encodings of the shared types and the configuration and model
 *        files. Field-by-field reference: docs/file-formats.md.
 */

#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "evcsf/anomaly.hpp"
#include "evcsf/domain.hpp"
#include "evcsf/incident.hpp"
#include "evcsf/pipeline.hpp"

namespace evcsf {

using Json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void bad_document(const std::string& why) { throw Error(ErrorCode::MalformedDocument, why); }

inline const Json& member(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) bad_document(std::string("missing field '") + key + "'");
    return j.at(key);
}

template <typename T>
T get_as(const Json& j, const char* key) {
    try {
        return member(j, key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        bad_document(std::string("field '") + key + "': " + e.what());
    }
}

inline std::optional<std::string> opt_string(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return get_as<std::string>(j, key);
}

}  // namespace detail

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::MalformedDocument, path.string() + ": " + e.what());
    }
}

/// Pretty-printed, two-space indent, trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Timestamps and records
// ---------------------------------------------------------------------------

inline Json to_json(const IncidentTimestamp& ts) {
    return Json{{"date", ts.date_text()}, {"tz", ts.time_zone}, {"time", ts.time_text()}};
}

inline IncidentTimestamp timestamp_from_json(const Json& j, const TimestampOptions& options = {}) {
    return parse_timestamp(detail::get_as<std::string>(j, "date"), detail::get_as<std::string>(j, "tz"),
                           detail::get_as<std::string>(j, "time"), options);
}

inline Json to_json(const RecordKey& key) {
    Json j{{"source", key.source}, {"timestamp", key.timestamp}};
    j["seq"] = key.sequence_hint ? Json(*key.sequence_hint) : Json(nullptr);
    return j;
}

inline RecordKey record_key_from_json(const Json& j) {
    RecordKey key{detail::get_as<std::string>(j, "source"), detail::get_as<std::string>(j, "timestamp"), std::nullopt};
    if (j.contains("seq") && !j.at("seq").is_null()) key.sequence_hint = detail::get_as<std::uint64_t>(j, "seq");
    return key;
}

/// Origin and ingest index are deliberately left out.
inline Json to_json(const LogRecord& r) {
    Json j;
    j["source"] = r.source;
    j["timestamp"] = to_json(r.timestamp);
    j["kind"] = std::string(to_string(r.kind));
    j["commanded"] = r.commanded_state ? Json(*r.commanded_state) : Json(nullptr);
    j["reported"] = r.reported_state ? Json(*r.reported_state) : Json(nullptr);
    j["seq"] = r.sequence_hint ? Json(*r.sequence_hint) : Json(nullptr);
    j["payload"] = r.payload;
    j["duplicates"] = r.duplicate_count;
    return j;
}

inline LogRecord record_from_json(const Json& j) {
    LogRecord r;
    r.source = detail::get_as<std::string>(j, "source");
    r.timestamp = timestamp_from_json(detail::member(j, "timestamp"));
    const auto kind = parse_record_kind(detail::get_as<std::string>(j, "kind"));
    if (!kind) detail::bad_document("unknown record kind");
    r.kind = *kind;
    r.commanded_state = detail::opt_string(j, "commanded");
    r.reported_state = detail::opt_string(j, "reported");
    if (j.contains("seq") && !j.at("seq").is_null()) r.sequence_hint = detail::get_as<std::uint64_t>(j, "seq");
    r.payload = detail::get_as<std::string>(j, "payload");
    if (j.contains("duplicates")) r.duplicate_count = detail::get_as<std::uint64_t>(j, "duplicates");
    return r;
}

inline Json to_json(const EventTimeline& t) {
    Json records = Json::array();
    for (const auto& r : t.records) records.push_back(to_json(r));
    return Json{{"correlation_id", t.correlation_id},
                {"window", {{"start", to_json(t.window_start)}, {"end", to_json(t.window_end)}}},
                {"records", std::move(records)}};
}

/// Ingest indices are rebuilt from document order.
inline EventTimeline timeline_from_json(const Json& j) {
    EventTimeline t;
    t.correlation_id = detail::get_as<std::string>(j, "correlation_id");
    const auto& window = detail::member(j, "window");
    t.window_start = timestamp_from_json(detail::member(window, "start"));
    t.window_end = timestamp_from_json(detail::member(window, "end"));
    const auto& records = detail::member(j, "records");
    if (!records.is_array()) detail::bad_document("'records' must be an array");
    for (const auto& rj : records) {
        t.records.push_back(record_from_json(rj));
        t.records.back().ingest_index = t.records.size() - 1;
    }
    return t;
}

// ---------------------------------------------------------------------------
// Anomaly assessment
// ---------------------------------------------------------------------------

inline Json to_json(const TransmittedSymbol& a) { return Json{{"entity", a.entity}, {"channel", a.channel}}; }
inline Json to_json(const ReceivedSymbol& b) { return Json{{"channel", b.channel}, {"operation", b.operation}}; }

inline TransmittedSymbol transmitted_from_json(const Json& j) {
    return {detail::get_as<std::uint32_t>(j, "entity"), detail::get_as<std::uint32_t>(j, "channel")};
}
inline ReceivedSymbol received_from_json(const Json& j) {
    return {detail::get_as<std::uint32_t>(j, "channel"), detail::get_as<std::uint32_t>(j, "operation")};
}

inline Json to_json(const AnomalyAssessment& a) {
    Json per_symbol = Json::array();
    for (const auto& s : a.per_symbol) {
        per_symbol.push_back({{"symbol", to_json(s.symbol)}, {"p_abnormal_given", s.probability}});
    }
    Json flagged = Json::array();
    for (const auto& f : a.flagged) {
        Json fj{{"timeline_index", f.timeline_index},
                {"record", to_json(f.record)},
                {"transmitted", to_json(f.transmitted)},
                {"received", to_json(f.received)}};
        fj["posterior"] = f.posterior ? Json(*f.posterior) : Json(nullptr);
        flagged.push_back(std::move(fj));
    }
    Json examined = Json::array();
    for (const auto& k : a.examined) examined.push_back(to_json(k));
    return Json{{"correlation_id", a.correlation_id}, {"p_abnormal", a.p_abnormal},
                {"per_symbol", std::move(per_symbol)}, {"flagged", std::move(flagged)},
                {"examined", std::move(examined)}, {"skipped", a.skipped},
                {"not_applicable", a.not_applicable}};
}

inline AnomalyAssessment assessment_from_json(const Json& j) {
    AnomalyAssessment a;
    a.correlation_id = detail::get_as<std::string>(j, "correlation_id");
    a.p_abnormal = detail::get_as<double>(j, "p_abnormal");
    for (const auto& s : detail::member(j, "per_symbol")) {
        a.per_symbol.push_back({transmitted_from_json(detail::member(s, "symbol")),
                                detail::get_as<double>(s, "p_abnormal_given")});
    }
    for (const auto& fj : detail::member(j, "flagged")) {
        FlaggedObservation f;
        f.timeline_index = detail::get_as<std::size_t>(fj, "timeline_index");
        f.record = record_key_from_json(detail::member(fj, "record"));
        f.transmitted = transmitted_from_json(detail::member(fj, "transmitted"));
        f.received = received_from_json(detail::member(fj, "received"));
        if (!detail::member(fj, "posterior").is_null()) f.posterior = detail::get_as<double>(fj, "posterior");
        a.flagged.push_back(std::move(f));
    }
    for (const auto& k : detail::member(j, "examined")) a.examined.push_back(record_key_from_json(k));
    a.skipped = detail::get_as<std::size_t>(j, "skipped");
    a.not_applicable = detail::get_as<std::size_t>(j, "not_applicable");
    return a;
}

// ---------------------------------------------------------------------------
// Model file
// ---------------------------------------------------------------------------

struct ModelFile {
    TransmissionModel model;
    ObservationMapping mapping;
};

/// Structural decode only; normalization is checked by load_model().
inline ModelFile model_file_from_json(const Json& j) {
    ModelFile out;
    auto& m = out.model;
    m.k = detail::get_as<std::uint32_t>(j, "k");
    if (m.k < 1 || m.k > 64) detail::bad_document("k must be in 1..64");
    if (j.contains("tolerance")) m.tolerance = detail::get_as<double>(j, "tolerance");

    auto [grid_a, grid_b] = full_grid(m.k);
    if (j.contains("transmitted")) {
        for (const auto& s : j.at("transmitted")) {
            m.transmitted.push_back(transmitted_from_json(s));
            if (s.contains("name")) m.transmitted_names.push_back(s.at("name").get<std::string>());
        }
    } else {
        m.transmitted = grid_a;
    }
    if (j.contains("received")) {
        for (const auto& s : j.at("received")) {
            m.received.push_back(received_from_json(s));
            if (s.contains("name")) m.received_names.push_back(s.at("name").get<std::string>());
        }
    } else {
        m.received = grid_b;
    }

    if (j.contains("priors")) {
        m.priors = detail::get_as<std::vector<double>>(j, "priors");
    } else {
        m.priors.assign(m.transmitted.size(), 1.0 / static_cast<double>(m.transmitted.size()));
    }

    const auto& lik = detail::member(j, "likelihood");
    if (!lik.is_array()) detail::bad_document("'likelihood' must be an array");
    if (!lik.empty() && lik.front().is_array()) {
        m.likelihood = detail::get_as<std::vector<std::vector<double>>>(j, "likelihood");
    } else {
        const auto flat = detail::get_as<std::vector<double>>(j, "likelihood");
        const auto cols = m.received.size();
        if (cols == 0 || flat.size() != m.transmitted.size() * cols) {
            detail::bad_document("flat likelihood has " + std::to_string(flat.size()) + " entries, expected " +
                                 std::to_string(m.transmitted.size() * cols));
        }
        for (std::size_t i = 0; i < m.transmitted.size(); ++i) {
            m.likelihood.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i * cols),
                                      flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
        }
    }

    if (j.contains("observation_mapping")) {
        for (const auto& [source, spec] : j.at("observation_mapping").items()) {
            SourceMapping sm;
            sm.entity = detail::get_as<std::uint32_t>(spec, "entity");
            sm.states = detail::get_as<std::map<std::string, std::uint32_t>>(spec, "states");
            out.mapping.sources.emplace(source, std::move(sm));
        }
    }
    return out;
}

inline Json to_json(const TransmissionModel& m, const ObservationMapping& mapping = {}) {
    Json a = Json::array();
    for (std::size_t i = 0; i < m.transmitted.size(); ++i) {
        Json s = to_json(m.transmitted[i]);
        if (!m.transmitted_names.empty()) s["name"] = m.transmitted_names[i];
        a.push_back(std::move(s));
    }
    Json b = Json::array();
    for (std::size_t i = 0; i < m.received.size(); ++i) {
        Json s = to_json(m.received[i]);
        if (!m.received_names.empty()) s["name"] = m.received_names[i];
        b.push_back(std::move(s));
    }
    Json j{{"k", m.k}, {"tolerance", m.tolerance}, {"transmitted", a}, {"received", b},
           {"priors", m.priors}, {"likelihood", m.likelihood}};
    if (!mapping.sources.empty()) {
        Json om = Json::object();
        for (const auto& [source, sm] : mapping.sources) om[source] = {{"entity", sm.entity}, {"states", sm.states}};
        j["observation_mapping"] = std::move(om);
    }
    return j;
}

/// Reads a model file. Non-normalized models are rejected with InvalidModel
/// unless `renormalize` is set, in which case priors and rows are rescaled.
inline ModelFile load_model(const std::filesystem::path& path, bool renormalize = false) {
    auto file = model_file_from_json(read_json_file(path));
    if (renormalize) file.model = renormalized(std::move(file.model));
    require_valid(file.model);
    return file;
}

// ---------------------------------------------------------------------------
// Vocabulary / layer configuration
// ---------------------------------------------------------------------------

struct DomainConfig {
    AttributeVocabulary vocabulary;
    LayerHierarchy layers = LayerHierarchy::defaults();
};

/// Label sets in the document are merged over the defaults; "layers", when
/// present, replaces the default hierarchy.
inline DomainConfig domain_config_from_json(const Json& j) {
    if (!j.is_object()) detail::bad_document("configuration must be an object");
    AttributeVocabulary extension;
    for (auto c : kAllCategories) {
        auto* set = extension.labels(c);
        if (set == nullptr) continue;
        const auto key = std::string(key_of(c));
        set->clear();
        if (j.contains(key)) *set = detail::get_as<std::vector<std::string>>(j, key.c_str());
    }
    DomainConfig out;
    out.vocabulary = AttributeVocabulary{}.merged(extension);
    out.vocabulary.check();
    if (j.contains("layers")) {
        std::vector<Layer> layers;
        for (const auto& lj : j.at("layers")) {
            layers.push_back({detail::get_as<std::string>(lj, "name"),
                              detail::get_as<std::vector<std::string>>(lj, "nodes")});
        }
        out.layers = LayerHierarchy(std::move(layers));
    }
    return out;
}

inline Json to_json(const DomainConfig& c) {
    Json j;
    for (auto cat : kAllCategories) {
        if (const auto* set = c.vocabulary.labels(cat)) j[std::string(key_of(cat))] = *set;
    }
    Json layers = Json::array();
    for (const auto& l : c.layers.layers()) layers.push_back({{"name", l.name}, {"nodes", l.nodes}});
    j["layers"] = std::move(layers);
    return j;
}

// ---------------------------------------------------------------------------
// Incident state and validation report
// ---------------------------------------------------------------------------

inline Json to_json(const IncidentState& s) {
    Json zeta = Json::object();
    for (std::size_t i = 0; i < s.entities().size(); ++i) zeta[s.entities()[i].to_string()] = s.zeta()[i] ? 1 : 0;
    Json chi = Json::object();
    for (std::size_t i = 0; i < s.mitigators().size(); ++i) chi[s.mitigators()[i].to_string()] = s.chi()[i] ? 1 : 0;
    return Json{{"zeta", std::move(zeta)}, {"chi", std::move(chi)}};
}

inline IncidentState incident_state_from_json(const Json& j) {
    std::vector<EntityRef> entities;
    std::vector<bool> zeta;
    for (const auto& [key, v] : detail::member(j, "zeta").items()) {
        entities.push_back(EntityRef::parse(key));
        zeta.push_back(v.get<int>() != 0);
    }
    std::vector<MitigatorRef> mitigators;
    std::vector<bool> chi;
    for (const auto& [key, v] : detail::member(j, "chi").items()) {
        mitigators.push_back(MitigatorRef::parse(key));
        chi.push_back(v.get<int>() != 0);
    }
    return IncidentState(std::move(entities), std::move(zeta), std::move(mitigators), std::move(chi));
}

inline Json to_json(const ValidationReport& r) {
    Json v = Json::array();
    for (const auto& x : r.violations) {
        Json e{{"message", x.message}, {"row", x.row}};
        if (x.kind == Violation::Kind::PriorSum || x.kind == Violation::Kind::LikelihoodRowSum) {
            e["sum"] = x.sum;
            e["residual"] = x.residual;
        }
        v.push_back(std::move(e));
    }
    return Json{{"valid", r.ok()}, {"violations", std::move(v)}};
}

}  // namespace evcsf
