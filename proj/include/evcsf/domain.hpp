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
 * @file domain.hpp
 * @brief Shared vocabulary of the toolkit: station entities, mitigators, the
 *        layer hierarchy, 5Ws & 1H attribute vocabularies and timestamps.
 *
 * Everything here is an immutable value type. Nothing in this header depends
 * on any other part of the library except error.hpp.
 */

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evcsf/error.hpp"

namespace evcsf {

// ---------------------------------------------------------------------------
// Entities and mitigators
// ---------------------------------------------------------------------------

/// Station subsystem kinds: power grid, EV, cloud server, communication
/// protocols and station infrastructure.
enum class Subsystem : char { G = 'G', V = 'V', O = 'O', P = 'P', S = 'S' };

/// Mitigating actors: physical/technical controls and intrusion detection &
/// prevention.
enum class MitigatorKind : char { C = 'C', I = 'I' };

inline constexpr std::array<Subsystem, 5> kAllSubsystems{Subsystem::G, Subsystem::V, Subsystem::O,
                                                         Subsystem::P, Subsystem::S};

constexpr std::string_view describe(Subsystem s) noexcept {
    switch (s) {
        case Subsystem::G: return "power grid";
        case Subsystem::V: return "EV";
        case Subsystem::O: return "cloud server";
        case Subsystem::P: return "communication protocols";
        case Subsystem::S: return "station infrastructure";
    }
    return "";
}

constexpr std::string_view describe(MitigatorKind m) noexcept {
    return m == MitigatorKind::C ? "physical and technical controls"
                                 : "intrusion detection & prevention";
}

namespace detail {

inline std::optional<std::uint32_t> parse_positive(std::string_view digits) {
    if (digits.empty() || digits.size() > 9) return std::nullopt;
    std::uint32_t value = 0;
    for (char ch : digits) {
        if (ch < '0' || ch > '9') return std::nullopt;
        value = value * 10 + static_cast<std::uint32_t>(ch - '0');
    }
    if (value == 0) return std::nullopt;
    return value;
}

}  // namespace detail

/// The i-th component of subsystem k. Written as e.g. "S3".
struct EntityRef {
    Subsystem subsystem{Subsystem::S};
    std::uint32_t index{1};

    EntityRef() = default;
    EntityRef(Subsystem s, std::uint32_t i) : subsystem(s), index(i) {
        if (i < 1) throw Error(ErrorCode::IndexOutOfRange, "entity index must be >= 1");
    }

    std::string to_string() const { return std::string(1, static_cast<char>(subsystem)) + std::to_string(index); }

    static EntityRef parse(std::string_view text) {
        if (text.size() >= 2) {
            auto index = detail::parse_positive(text.substr(1));
            for (auto s : kAllSubsystems) {
                if (text[0] == static_cast<char>(s) && index) return {s, *index};
            }
        }
        throw Error(ErrorCode::UnknownEntity, "not an entity reference: '" + std::string(text) + "'");
    }

    friend auto operator<=>(const EntityRef&, const EntityRef&) = default;
};

/// The j-th mitigating feature of kind l. Written as e.g. "I1".
struct MitigatorRef {
    MitigatorKind kind{MitigatorKind::C};
    std::uint32_t index{1};

    MitigatorRef() = default;
    MitigatorRef(MitigatorKind k, std::uint32_t i) : kind(k), index(i) {
        if (i < 1) throw Error(ErrorCode::IndexOutOfRange, "mitigator index must be >= 1");
    }

    std::string to_string() const { return std::string(1, static_cast<char>(kind)) + std::to_string(index); }

    static MitigatorRef parse(std::string_view text) {
        if (text.size() >= 2 && (text[0] == 'C' || text[0] == 'I')) {
            if (auto index = detail::parse_positive(text.substr(1))) {
                return {static_cast<MitigatorKind>(text[0]), *index};
            }
        }
        throw Error(ErrorCode::UnknownEntity, "not a mitigator reference: '" + std::string(text) + "'");
    }

    friend auto operator<=>(const MitigatorRef&, const MitigatorRef&) = default;
};

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

/// Labels compare ASCII case-insensitively ("Tampering" == "tampering").
inline bool labels_equal(std::string_view a, std::string_view b) noexcept {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; };
        if (lower(a[i]) != lower(b[i])) return false;
    }
    return true;
}

inline bool contains_label(const std::vector<std::string>& set, std::string_view label) {
    return std::any_of(set.begin(), set.end(), [&](const std::string& s) { return labels_equal(s, label); });
}

// ---------------------------------------------------------------------------
// Layer hierarchy
// ---------------------------------------------------------------------------

struct Layer {
    std::string name;
    std::vector<std::string> nodes;

    friend bool operator==(const Layer&, const Layer&) = default;
};

/// Ordered layers of the networked station model. Layer 3 transmits and
/// layer 4 receives in the anomaly model, so at least four layers are needed.
class LayerHierarchy {
public:
    static constexpr std::size_t kMinLayers = 4;
    static constexpr std::size_t kTransmitLayer = 3;  // 1-based
    static constexpr std::size_t kReceiveLayer = 4;   // 1-based

    explicit LayerHierarchy(std::vector<Layer> layers) : layers_(std::move(layers)) {
        if (layers_.size() < kMinLayers) {
            throw Error(ErrorCode::InvalidConfig, "layer hierarchy needs at least 4 layers, got " +
                                                      std::to_string(layers_.size()));
        }
        for (const auto& layer : layers_) {
            for (std::size_t i = 0; i < layer.nodes.size(); ++i) {
                for (std::size_t j = i + 1; j < layer.nodes.size(); ++j) {
                    if (layer.nodes[i] == layer.nodes[j]) {
                        throw Error(ErrorCode::InvalidConfig,
                                    "duplicate node '" + layer.nodes[i] + "' in layer '" + layer.name + "'");
                    }
                }
            }
        }
    }

    static LayerHierarchy defaults() {
        return LayerHierarchy({
            {"EVCS system", {"EVCS"}},
            {"communication channel", {"OCPP", "IEC 61850", "ISO 15118"}},
            {"core entities", {"power grid", "EV", "charging station"}},
            {"components", {"BMS", "CB", "smart meter", "charging adapter", "cooling system", "HMI"}},
            {"operations", {"charging", "discharging", "open", "closed"}},
            {"operation outcomes", {"normal", "abnormal"}},
        });
    }

    const std::vector<Layer>& layers() const noexcept { return layers_; }
    std::size_t depth() const noexcept { return layers_.size(); }
    const Layer& transmit_layer() const { return layers_.at(kTransmitLayer - 1); }
    const Layer& receive_layer() const { return layers_.at(kReceiveLayer - 1); }

    friend bool operator==(const LayerHierarchy&, const LayerHierarchy&) = default;

private:
    std::vector<Layer> layers_;
};

// ---------------------------------------------------------------------------
// 5Ws & 1H attributes
// ---------------------------------------------------------------------------

enum class AttributeCategory {
    Attacker,           // Who
    Victim,             // Who
    Target,             // What
    Date,               // When
    Time,               // When
    AttackPath,         // Where
    HazardousBehavior,  // Why
    AttackMethod,       // How
};

inline constexpr std::array<AttributeCategory, 8> kAllCategories{
    AttributeCategory::Attacker,   AttributeCategory::Victim,           AttributeCategory::Target,
    AttributeCategory::Date,       AttributeCategory::Time,             AttributeCategory::AttackPath,
    AttributeCategory::HazardousBehavior, AttributeCategory::AttackMethod};

/// Key used for the category in every structured document.
constexpr std::string_view key_of(AttributeCategory c) noexcept {
    switch (c) {
        case AttributeCategory::Attacker: return "attacker";
        case AttributeCategory::Victim: return "victim";
        case AttributeCategory::Target: return "target";
        case AttributeCategory::Date: return "date";
        case AttributeCategory::Time: return "time";
        case AttributeCategory::AttackPath: return "attack_path";
        case AttributeCategory::HazardousBehavior: return "hazardous_behavior";
        case AttributeCategory::AttackMethod: return "attack_method";
    }
    return "";
}

/// Labels accepted for each attribute. Unknown labels are not rejected
/// anywhere; they are reported as extended.
struct AttributeVocabulary {
    std::vector<std::string> attacker{"hacker", "spy", "terrorist", "vandal", "raider"};
    std::vector<std::string> victim{"EV", "power grid", "cloud system", "communication protocols"};
    std::vector<std::string> target{"OCPP", "BMS", "charging adapter", "cooling system", "smart meter", "HMI"};
    std::vector<std::string> attack_path{"OTA", "software kickout", "incorrect coding"};
    std::vector<std::string> hazardous_behavior{"faulty SOC", "unintended overcharging", "incorrect scheduling",
                                                "system malfunction"};
    std::vector<std::string> attack_method{"spoofing", "tampering", "repudiation", "information disclosure",
                                           "denial of service"};

    /// Set for a label-valued category, nullptr for date/time.
    const std::vector<std::string>* labels(AttributeCategory c) const noexcept {
        switch (c) {
            case AttributeCategory::Attacker: return &attacker;
            case AttributeCategory::Victim: return &victim;
            case AttributeCategory::Target: return &target;
            case AttributeCategory::AttackPath: return &attack_path;
            case AttributeCategory::HazardousBehavior: return &hazardous_behavior;
            case AttributeCategory::AttackMethod: return &attack_method;
            default: return nullptr;
        }
    }
    std::vector<std::string>* labels(AttributeCategory c) noexcept {
        return const_cast<std::vector<std::string>*>(std::as_const(*this).labels(c));
    }

    /// Throws InvalidConfig on an empty set or a label repeated within a set.
    void check() const {
        for (auto c : kAllCategories) {
            const auto* set = labels(c);
            if (set == nullptr) continue;
            if (set->empty()) throw Error(ErrorCode::InvalidConfig, std::string(key_of(c)) + " vocabulary is empty");
            for (std::size_t i = 0; i < set->size(); ++i) {
                for (std::size_t j = i + 1; j < set->size(); ++j) {
                    if (labels_equal((*set)[i], (*set)[j])) {
                        throw Error(ErrorCode::InvalidConfig,
                                    "duplicate label '" + (*set)[i] + "' in " + std::string(key_of(c)));
                    }
                }
            }
        }
    }

    /// Returns this vocabulary extended with every label of `extension` not
    /// already present. Base labels keep their positions.
    AttributeVocabulary merged(const AttributeVocabulary& extension) const {
        AttributeVocabulary out = *this;
        for (auto c : kAllCategories) {
            auto* dst = out.labels(c);
            const auto* src = extension.labels(c);
            if (dst == nullptr) continue;
            for (const auto& label : *src) {
                if (!contains_label(*dst, label)) dst->push_back(label);
            }
        }
        return out;
    }

    friend bool operator==(const AttributeVocabulary&, const AttributeVocabulary&) = default;
};

// ---------------------------------------------------------------------------
// Timestamps
// ---------------------------------------------------------------------------

struct TimestampOptions {
    /// Two-digit years map onto [century, century + 99].
    int century = 2000;
};

/// A "When" value: calendar date (mm-dd-yy), an opaque time-zone label and a
/// wall-clock time (hh:mm:ss:msec). The millisecond field keeps the number of
/// digits it was written with (2 or 3) so formatting reproduces the input.
struct IncidentTimestamp {
    int year{2000};
    unsigned month{1};
    unsigned day{1};
    std::string time_zone{"UTC"};
    unsigned hours{0};
    unsigned minutes{0};
    unsigned seconds{0};
    unsigned milliseconds{0};
    unsigned msec_digits{3};

    std::string date_text() const {
        return two(month) + "-" + two(day) + "-" + two(static_cast<unsigned>(((year % 100) + 100) % 100));
    }

    std::string time_text() const {
        std::string ms = std::to_string(milliseconds);
        while (ms.size() < msec_digits) ms.insert(ms.begin(), '0');
        return two(hours) + ":" + two(minutes) + ":" + two(seconds) + ":" + ms;
    }

    /// Milliseconds since 1970-01-01 00:00:00.000 in the record's own zone.
    /// Zones are labels only; no offset is applied.
    std::int64_t instant_ms() const {
        using namespace std::chrono;
        const sys_days days{std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day}};
        return static_cast<std::int64_t>(days.time_since_epoch().count()) * 86'400'000LL +
               ((static_cast<std::int64_t>(hours) * 60 + minutes) * 60 + seconds) * 1000LL + milliseconds;
    }

    friend bool operator==(const IncidentTimestamp&, const IncidentTimestamp&) = default;

private:
    static std::string two(unsigned v) {
        return std::string{static_cast<char>('0' + (v / 10) % 10), static_cast<char>('0' + v % 10)};
    }
};

/// Chronological comparison; width and zone label do not participate.
inline std::strong_ordering compare_instants(const IncidentTimestamp& a, const IncidentTimestamp& b) {
    return a.instant_ms() <=> b.instant_ms();
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == sep) {
            parts.push_back(text.substr(start, i - start));
            start = i + 1;
        }
    }
    return parts;
}

inline std::optional<unsigned> parse_digits(std::string_view s, std::size_t min_width, std::size_t max_width) {
    if (s.size() < min_width || s.size() > max_width) return std::nullopt;
    unsigned v = 0;
    for (char ch : s) {
        if (ch < '0' || ch > '9') return std::nullopt;
        v = v * 10 + static_cast<unsigned>(ch - '0');
    }
    return v;
}

[[noreturn]] inline void bad_timestamp(const std::string& why) { throw Error(ErrorCode::MalformedTimestamp, why); }

inline bool valid_zone_label(std::string_view tz) {
    if (tz.empty()) return false;
    return std::none_of(tz.begin(), tz.end(), [](char c) {
        return c == '|' || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ',';
    });
}

}  // namespace detail

/// Checks every field of an already-populated timestamp.
inline void check_timestamp(const IncidentTimestamp& ts, const TimestampOptions& options = {}) {
    if (ts.year < options.century || ts.year > options.century + 99) {
        detail::bad_timestamp("year " + std::to_string(ts.year) + " outside two-digit century");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{ts.year}, std::chrono::month{ts.month},
                                          std::chrono::day{ts.day}};
    if (!ymd.ok()) detail::bad_timestamp("not a calendar date: " + ts.date_text());
    if (!detail::valid_zone_label(ts.time_zone)) detail::bad_timestamp("invalid time zone label '" + ts.time_zone + "'");
    if (ts.hours > 23 || ts.minutes > 59 || ts.seconds > 59 || ts.milliseconds > 999) {
        detail::bad_timestamp("time field out of range");
    }
    if (ts.msec_digits != 2 && ts.msec_digits != 3) detail::bad_timestamp("millisecond width must be 2 or 3");
    if (ts.msec_digits == 2 && ts.milliseconds > 99) detail::bad_timestamp("millisecond value needs 3 digits");
}

/// Parses the incident formats: date "mm-dd-yy", time "hh:mm:ss:msec" with a
/// 2- or 3-digit millisecond field.
inline IncidentTimestamp parse_timestamp(std::string_view date_text, std::string_view time_zone,
                                         std::string_view time_text, const TimestampOptions& options = {}) {
    const auto date = detail::split(date_text, '-');
    if (date.size() != 3) detail::bad_timestamp("date '" + std::string(date_text) + "' is not mm-dd-yy");
    const auto time = detail::split(time_text, ':');
    if (time.size() != 4) detail::bad_timestamp("time '" + std::string(time_text) + "' is not hh:mm:ss:msec");

    const auto mm = detail::parse_digits(date[0], 2, 2);
    const auto dd = detail::parse_digits(date[1], 2, 2);
    const auto yy = detail::parse_digits(date[2], 2, 2);
    if (!mm || !dd || !yy) detail::bad_timestamp("date '" + std::string(date_text) + "' is not mm-dd-yy");

    const auto h = detail::parse_digits(time[0], 2, 2);
    const auto m = detail::parse_digits(time[1], 2, 2);
    const auto s = detail::parse_digits(time[2], 2, 2);
    const auto ms = detail::parse_digits(time[3], 2, 3);
    if (!h || !m || !s || !ms) detail::bad_timestamp("time '" + std::string(time_text) + "' is not hh:mm:ss:msec");

    IncidentTimestamp ts;
    ts.year = options.century + static_cast<int>(*yy);
    ts.month = *mm;
    ts.day = *dd;
    ts.time_zone = std::string(time_zone);
    ts.hours = *h;
    ts.minutes = *m;
    ts.seconds = *s;
    ts.milliseconds = *ms;
    ts.msec_digits = static_cast<unsigned>(time[3].size());
    check_timestamp(ts, options);
    return ts;
}

/// Returns `ts` shifted by `delta_ms`, in the same zone. The millisecond
/// width is kept when the new value still fits it.
inline IncidentTimestamp shifted(const IncidentTimestamp& ts, std::int64_t delta_ms,
                                 const TimestampOptions& options = {}) {
    using namespace std::chrono;
    const std::int64_t total = ts.instant_ms() + delta_ms;
    std::int64_t days = total / 86'400'000LL;
    std::int64_t rem = total % 86'400'000LL;
    if (rem < 0) {
        rem += 86'400'000LL;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    IncidentTimestamp out = ts;
    out.year = static_cast<int>(ymd.year());
    out.month = static_cast<unsigned>(ymd.month());
    out.day = static_cast<unsigned>(ymd.day());
    out.hours = static_cast<unsigned>(rem / 3'600'000);
    out.minutes = static_cast<unsigned>(rem / 60'000 % 60);
    out.seconds = static_cast<unsigned>(rem / 1000 % 60);
    out.milliseconds = static_cast<unsigned>(rem % 1000);
    if (out.msec_digits == 2 && out.milliseconds > 99) out.msec_digits = 3;
    check_timestamp(out, options);
    return out;
}

/// "mm-dd-yy TZ hh:mm:ss:msec", the single-string form used on the command
/// line and in human-readable output.
inline std::string to_display(const IncidentTimestamp& ts) {
    return ts.date_text() + " " + ts.time_zone + " " + ts.time_text();
}

/// Accepts "mm-dd-yy TZ hh:mm:ss:msec" or "mm-dd-yy hh:mm:ss:msec" (zone
/// defaults to `default_zone`).
inline IncidentTimestamp parse_display(std::string_view text, std::string_view default_zone = "UTC",
                                       const TimestampOptions& options = {}) {
    std::vector<std::string_view> tokens;
    for (auto token : detail::split(text, ' ')) {
        if (!token.empty()) tokens.push_back(token);
    }
    if (tokens.size() == 3) return parse_timestamp(tokens[0], tokens[1], tokens[2], options);
    if (tokens.size() == 2) return parse_timestamp(tokens[0], default_zone, tokens[1], options);
    detail::bad_timestamp("expected 'mm-dd-yy [TZ] hh:mm:ss:msec', got '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Label validation
// ---------------------------------------------------------------------------

enum class Membership { Known, Extended };

/// Date and time categories are "known" when the label parses in the
/// corresponding incident format; the others are set membership queries.
inline Membership validate_label(AttributeCategory category, std::string_view label,
                                 const AttributeVocabulary& vocab) {
    if (category == AttributeCategory::Date) {
        try {
            parse_timestamp(label, "UTC", "00:00:00:000");
            return Membership::Known;
        } catch (const Error&) {
            return Membership::Extended;
        }
    }
    if (category == AttributeCategory::Time) {
        try {
            parse_timestamp("01-01-00", "UTC", label);
            return Membership::Known;
        } catch (const Error&) {
            return Membership::Extended;
        }
    }
    return contains_label(*vocab.labels(category), label) ? Membership::Known : Membership::Extended;
}

}  // namespace evcsf
