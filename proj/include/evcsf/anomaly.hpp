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
 * @file anomaly.hpp
 * @brief Stochastic M-ary transmission model and abnormal-behavior scoring.
 *
 * A transmitting layer sends symbols A(e,c): entity e addressing channel or
 * component c. The receiving layer observes symbols B(c,o): operation o
 * realized on channel c. The model holds a prior P(A) for every transmitted
 * symbol and a likelihood P(B|A) for every (A, B) pair.
 *
 * Delivery is normal when the realized operation equals the intended
 * channel (B.o == A.c) and abnormal otherwise. The abnormal event E thus has
 *
 *     P(E|A) = sum over B with B.o != A.c of P(B|A)
 *     P(E)   = sum over A of P(E|A) P(A)
 *
 * and observations are inverted with Bayes' rule,
 *
 *     P(A|B) = P(B|A) P(A) / P(B),   P(B) = sum over A of P(B|A) P(A).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evcsf/timeline.hpp"

namespace evcsf {

struct TransmittedSymbol {
    std::uint32_t entity{1};
    std::uint32_t channel{1};

    std::string to_string() const { return "A(" + std::to_string(entity) + "," + std::to_string(channel) + ")"; }
    friend auto operator<=>(const TransmittedSymbol&, const TransmittedSymbol&) = default;
};

struct ReceivedSymbol {
    std::uint32_t channel{1};
    std::uint32_t operation{1};

    std::string to_string() const { return "B(" + std::to_string(channel) + "," + std::to_string(operation) + ")"; }
    friend auto operator<=>(const ReceivedSymbol&, const ReceivedSymbol&) = default;
};

enum class Classification { Normal, Abnormal };

constexpr std::string_view to_string(Classification c) noexcept {
    return c == Classification::Normal ? "normal" : "abnormal";
}

/// Normal iff the realized operation is the intended channel.
constexpr Classification classify_pair(const TransmittedSymbol& a, const ReceivedSymbol& b) noexcept {
    return b.operation == a.channel ? Classification::Normal : Classification::Abnormal;
}

/// Plain data. Use validate_model() before trusting it; every scoring
/// operation re-checks and throws InvalidModel on a defective model.
struct TransmissionModel {
    std::uint32_t k{1};
    std::vector<TransmittedSymbol> transmitted;
    std::vector<ReceivedSymbol> received;
    std::vector<double> priors;                   // aligned with transmitted
    std::vector<std::vector<double>> likelihood;  // [transmitted][received]
    double tolerance{1e-9};

    /// Optional display names, empty or aligned with the symbol lists.
    std::vector<std::string> transmitted_names;
    std::vector<std::string> received_names;

    std::optional<std::size_t> index_of(const TransmittedSymbol& a) const {
        auto it = std::find(transmitted.begin(), transmitted.end(), a);
        if (it == transmitted.end()) return std::nullopt;
        return static_cast<std::size_t>(it - transmitted.begin());
    }

    std::optional<std::size_t> index_of(const ReceivedSymbol& b) const {
        auto it = std::find(received.begin(), received.end(), b);
        if (it == received.end()) return std::nullopt;
        return static_cast<std::size_t>(it - received.begin());
    }

    friend bool operator==(const TransmissionModel&, const TransmissionModel&) = default;
};

/// Every (e, c) and every (c, o) over 1..k, in row-major order.
inline std::pair<std::vector<TransmittedSymbol>, std::vector<ReceivedSymbol>> full_grid(std::uint32_t k) {
    std::vector<TransmittedSymbol> a;
    std::vector<ReceivedSymbol> b;
    for (std::uint32_t i = 1; i <= k; ++i) {
        for (std::uint32_t j = 1; j <= k; ++j) {
            a.push_back({i, j});
            b.push_back({i, j});
        }
    }
    return {std::move(a), std::move(b)};
}

/// Error-free channel over the full grid: A(e,c) is always received as
/// B(c,c). Priors are uniform.
inline TransmissionModel identity_channel(std::uint32_t k) {
    TransmissionModel m;
    m.k = k;
    std::tie(m.transmitted, m.received) = full_grid(k);
    m.priors.assign(m.transmitted.size(), 1.0 / static_cast<double>(m.transmitted.size()));
    m.likelihood.assign(m.transmitted.size(), std::vector<double>(m.received.size(), 0.0));
    for (std::size_t i = 0; i < m.transmitted.size(); ++i) {
        const auto c = m.transmitted[i].channel;
        m.likelihood[i][*m.index_of(ReceivedSymbol{c, c})] = 1.0;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
    enum class Kind { Shape, IndexBounds, DuplicateSymbol, ProbabilityRange, PriorSum, LikelihoodRowSum };

    Kind kind;
    std::size_t row{0};     // likelihood row / prior index where relevant
    double sum{0.0};        // for *Sum kinds
    double residual{0.0};   // |1 - sum| for *Sum kinds
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const noexcept { return violations.empty(); }
};

inline ValidationReport validate_model(const TransmissionModel& m) {
    ValidationReport report;
    auto add = [&](Violation::Kind kind, std::size_t row, double sum, std::string msg) {
        report.violations.push_back({kind, row, sum, std::fabs(1.0 - sum), std::move(msg)});
    };

    if (m.k < 1) add(Violation::Kind::Shape, 0, 0.0, "alphabet bound k must be >= 1");
    if (m.transmitted.empty()) add(Violation::Kind::Shape, 0, 0.0, "no transmitted symbols");
    if (m.received.empty()) add(Violation::Kind::Shape, 0, 0.0, "no received symbols");
    if (m.priors.size() != m.transmitted.size()) {
        add(Violation::Kind::Shape, 0, 0.0,
            "prior vector has " + std::to_string(m.priors.size()) + " entries for " +
                std::to_string(m.transmitted.size()) + " transmitted symbols");
    }
    if (m.likelihood.size() != m.transmitted.size()) {
        add(Violation::Kind::Shape, 0, 0.0,
            "likelihood has " + std::to_string(m.likelihood.size()) + " rows for " +
                std::to_string(m.transmitted.size()) + " transmitted symbols");
    }
    for (std::size_t i = 0; i < m.likelihood.size(); ++i) {
        if (m.likelihood[i].size() != m.received.size()) {
            add(Violation::Kind::Shape, i, 0.0, "likelihood row " + std::to_string(i) + " has wrong width");
        }
    }
    if (!m.transmitted_names.empty() && m.transmitted_names.size() != m.transmitted.size()) {
        add(Violation::Kind::Shape, 0, 0.0, "transmitted names do not align with symbols");
    }
    if (!m.received_names.empty() && m.received_names.size() != m.received.size()) {
        add(Violation::Kind::Shape, 0, 0.0, "received names do not align with symbols");
    }
    if (!(m.tolerance >= 0.0)) add(Violation::Kind::Shape, 0, 0.0, "tolerance must be non-negative");
    if (!report.ok()) return report;

    auto in_bounds = [&](std::uint32_t v) { return v >= 1 && v <= m.k; };
    for (std::size_t i = 0; i < m.transmitted.size(); ++i) {
        const auto& a = m.transmitted[i];
        if (!in_bounds(a.entity) || !in_bounds(a.channel)) {
            add(Violation::Kind::IndexBounds, i, 0.0, a.to_string() + " outside 1.." + std::to_string(m.k));
        }
        for (std::size_t j = i + 1; j < m.transmitted.size(); ++j) {
            if (m.transmitted[j] == a) add(Violation::Kind::DuplicateSymbol, j, 0.0, a.to_string() + " repeated");
        }
    }
    for (std::size_t i = 0; i < m.received.size(); ++i) {
        const auto& b = m.received[i];
        if (!in_bounds(b.channel) || !in_bounds(b.operation)) {
            add(Violation::Kind::IndexBounds, i, 0.0, b.to_string() + " outside 1.." + std::to_string(m.k));
        }
        for (std::size_t j = i + 1; j < m.received.size(); ++j) {
            if (m.received[j] == b) add(Violation::Kind::DuplicateSymbol, j, 0.0, b.to_string() + " repeated");
        }
    }

    auto in_unit = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
    double prior_sum = 0.0;
    for (std::size_t i = 0; i < m.priors.size(); ++i) {
        if (!in_unit(m.priors[i])) {
            add(Violation::Kind::ProbabilityRange, i, 0.0, "prior of " + m.transmitted[i].to_string() + " outside [0,1]");
        }
        prior_sum += m.priors[i];
    }
    if (!(std::fabs(1.0 - prior_sum) <= m.tolerance)) {
        add(Violation::Kind::PriorSum, 0, prior_sum, "priors sum to " + std::to_string(prior_sum));
    }
    for (std::size_t i = 0; i < m.likelihood.size(); ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < m.likelihood[i].size(); ++j) {
            if (!in_unit(m.likelihood[i][j])) {
                add(Violation::Kind::ProbabilityRange, i, 0.0,
                    "P(" + m.received[j].to_string() + "|" + m.transmitted[i].to_string() + ") outside [0,1]");
            }
            row_sum += m.likelihood[i][j];
        }
        if (!(std::fabs(1.0 - row_sum) <= m.tolerance)) {
            add(Violation::Kind::LikelihoodRowSum, i, row_sum,
                "likelihood row " + m.transmitted[i].to_string() + " sums to " + std::to_string(row_sum));
        }
    }
    return report;
}

inline void require_valid(const TransmissionModel& m) {
    const auto report = validate_model(m);
    if (!report.ok()) {
        const auto& v = report.violations.front();
        std::string msg = v.message;
        if (v.kind == Violation::Kind::PriorSum || v.kind == Violation::Kind::LikelihoodRowSum) {
            msg += " (residual " + std::to_string(v.residual) + ")";
        }
        throw Error(ErrorCode::InvalidModel, msg);
    }
}

/// Scales priors and every likelihood row to sum to one. Rows that sum to
/// zero are left untouched (validation will still reject them).
inline TransmissionModel renormalized(TransmissionModel m) {
    auto normalize = [](std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        if (s > 0.0 && std::isfinite(s)) {
            for (double& x : v) x /= s;
        }
    };
    normalize(m.priors);
    for (auto& row : m.likelihood) normalize(row);
    return m;
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

inline void check_bounds(const TransmissionModel& m, const TransmittedSymbol& a) {
    if (a.entity < 1 || a.entity > m.k || a.channel < 1 || a.channel > m.k) {
        throw Error(ErrorCode::IndexOutOfRange, a.to_string() + " outside 1.." + std::to_string(m.k));
    }
}

inline void check_bounds(const TransmissionModel& m, const ReceivedSymbol& b) {
    if (b.channel < 1 || b.channel > m.k || b.operation < 1 || b.operation > m.k) {
        throw Error(ErrorCode::IndexOutOfRange, b.to_string() + " outside 1.." + std::to_string(m.k));
    }
}

inline Classification classify(const TransmissionModel& m, const TransmittedSymbol& a, const ReceivedSymbol& b) {
    check_bounds(m, a);
    check_bounds(m, b);
    return classify_pair(a, b);
}

namespace detail {

inline std::size_t row_of(const TransmissionModel& m, const TransmittedSymbol& a) {
    check_bounds(m, a);
    auto row = m.index_of(a);
    if (!row) throw Error(ErrorCode::IndexOutOfRange, a.to_string() + " is not in the transmitted alphabet");
    return *row;
}

inline std::size_t column_of(const TransmissionModel& m, const ReceivedSymbol& b) {
    check_bounds(m, b);
    auto col = m.index_of(b);
    if (!col) throw Error(ErrorCode::IndexOutOfRange, b.to_string() + " is not in the received alphabet");
    return *col;
}

inline double mismatch_mass(const TransmissionModel& m, std::size_t row) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m.received.size(); ++j) {
        if (classify_pair(m.transmitted[row], m.received[j]) == Classification::Abnormal) sum += m.likelihood[row][j];
    }
    return sum;
}

}  // namespace detail

/// P(E|A): likelihood mass on received symbols whose operation differs from
/// A's channel.
inline double prob_abnormal_given(const TransmissionModel& m, const TransmittedSymbol& a) {
    require_valid(m);
    return detail::mismatch_mass(m, detail::row_of(m, a));
}

struct SymbolProbability {
    TransmittedSymbol symbol;
    double probability{0.0};

    friend bool operator==(const SymbolProbability&, const SymbolProbability&) = default;
};

/// One timeline record whose received symbol disagrees with what was sent.
struct FlaggedObservation {
    std::size_t timeline_index{0};
    RecordKey record;
    TransmittedSymbol transmitted;
    ReceivedSymbol received;
    /// P(transmitted | received); empty when the model gives the received
    /// symbol zero probability.
    std::optional<double> posterior;

    friend bool operator==(const FlaggedObservation&, const FlaggedObservation&) = default;
};

struct AnomalyAssessment {
    std::string correlation_id;
    double p_abnormal{0.0};
    std::vector<SymbolProbability> per_symbol;  // P(E|A) for prior-positive A
    std::vector<FlaggedObservation> flagged;
    std::vector<RecordKey> examined;  // every record translated into a symbol pair
    std::size_t skipped{0};           // state pairs the mapping could not translate
    std::size_t not_applicable{0};    // records without a commanded/reported pair

    friend bool operator==(const AnomalyAssessment&, const AnomalyAssessment&) = default;
};

/// Model-level P(E) by total probability over the transmitted alphabet.
inline AnomalyAssessment prob_abnormal(const TransmissionModel& m) {
    require_valid(m);
    AnomalyAssessment out;
    for (std::size_t i = 0; i < m.transmitted.size(); ++i) {
        if (m.priors[i] <= 0.0) continue;
        const double given = detail::mismatch_mass(m, i);
        out.per_symbol.push_back({m.transmitted[i], given});
        out.p_abnormal += m.priors[i] * given;
    }
    return out;
}

/// P(B) = sum over A of P(B|A) P(A).
inline double marginal(const TransmissionModel& m, const ReceivedSymbol& b) {
    require_valid(m);
    const auto col = detail::column_of(m, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < m.transmitted.size(); ++i) sum += m.likelihood[i][col] * m.priors[i];
    return sum;
}

/// P(A|B) for every prior-positive transmitted symbol, in alphabet order.
/// Throws ZeroMarginal when the model gives `b` no probability.
inline std::vector<SymbolProbability> bayes_posterior(const TransmissionModel& m, const ReceivedSymbol& b) {
    const double evidence = marginal(m, b);
    if (!(evidence > 0.0)) throw Error(ErrorCode::ZeroMarginal, b.to_string() + " has zero marginal probability");
    const auto col = *m.index_of(b);
    std::vector<SymbolProbability> out;
    for (std::size_t i = 0; i < m.transmitted.size(); ++i) {
        if (m.priors[i] <= 0.0) continue;
        out.push_back({m.transmitted[i], m.likelihood[i][col] * m.priors[i] / evidence});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Timeline assessment
// ---------------------------------------------------------------------------

/// How one record source's state labels map onto symbol indices: the source
/// is transmitting entity `entity`, and each state label names a channel
/// (when commanded) or an operation (when reported).
struct SourceMapping {
    std::uint32_t entity{1};
    std::map<std::string, std::uint32_t> states;

    friend bool operator==(const SourceMapping&, const SourceMapping&) = default;
};

struct ObservationMapping {
    std::map<std::string, SourceMapping> sources;

    /// (A, B) for a record carrying both a commanded and a reported state,
    /// or nothing when the source or either label is unknown.
    std::optional<std::pair<TransmittedSymbol, ReceivedSymbol>> translate(const LogRecord& r) const {
        if (!r.commanded_state || !r.reported_state) return std::nullopt;
        auto src = sources.find(r.source);
        if (src == sources.end()) return std::nullopt;
        auto cmd = src->second.states.find(*r.commanded_state);
        auto rep = src->second.states.find(*r.reported_state);
        if (cmd == src->second.states.end() || rep == src->second.states.end()) return std::nullopt;
        return std::make_pair(TransmittedSymbol{src->second.entity, cmd->second},
                              ReceivedSymbol{cmd->second, rep->second});
    }

    friend bool operator==(const ObservationMapping&, const ObservationMapping&) = default;
};

/// Scores every commanded/reported pair in the timeline. Mismatches are
/// flagged with their Bayes posterior; p_abnormal is the model-level P(E).
inline AnomalyAssessment assess_timeline(const TransmissionModel& m, const EventTimeline& timeline,
                                         const ObservationMapping& mapping) {
    if (timeline.records.empty()) throw Error(ErrorCode::EmptyTimeline, "timeline has no records");
    AnomalyAssessment out = prob_abnormal(m);
    out.correlation_id = timeline.correlation_id;

    for (std::size_t i = 0; i < timeline.records.size(); ++i) {
        const auto& r = timeline.records[i];
        if (!r.commanded_state || !r.reported_state) {
            ++out.not_applicable;
            continue;
        }
        const auto pair = mapping.translate(r);
        const bool in_model = pair && pair->first.entity >= 1 && pair->first.entity <= m.k &&
                              pair->first.channel >= 1 && pair->first.channel <= m.k &&
                              pair->second.operation >= 1 && pair->second.operation <= m.k &&
                              m.index_of(pair->first) && m.index_of(pair->second);
        if (!in_model) {
            ++out.skipped;
            continue;
        }
        out.examined.push_back(RecordKey::of(r));
        const auto& [a, b] = *pair;
        if (classify_pair(a, b) == Classification::Normal) continue;

        FlaggedObservation flag{i, RecordKey::of(r), a, b, std::nullopt};
        const auto col = *m.index_of(b);
        double evidence = 0.0;
        for (std::size_t row = 0; row < m.transmitted.size(); ++row) evidence += m.likelihood[row][col] * m.priors[row];
        if (evidence > 0.0) flag.posterior = m.likelihood[*m.index_of(a)][col] * m.priors[*m.index_of(a)] / evidence;
        out.flagged.push_back(std::move(flag));
    }
    return out;
}

}  // namespace evcsf
