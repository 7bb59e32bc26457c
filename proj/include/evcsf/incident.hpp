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

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "evcsf/domain.hpp"

namespace evcsf {

/// Attack flags over station entities (zeta) and no-controllability flags
/// over mitigators (chi). An incident exists when at least one attacked
/// entity coincides with at least one failed mitigation.
class IncidentState {
public:
    IncidentState(std::vector<EntityRef> entities, std::vector<bool> zeta, std::vector<MitigatorRef> mitigators,
                  std::vector<bool> chi)
        : entities_(std::move(entities)), zeta_(std::move(zeta)), mitigators_(std::move(mitigators)),
          chi_(std::move(chi)) {
        if (entities_.empty() || mitigators_.empty()) {
            throw Error(ErrorCode::EmptyState, "incident state needs at least one entity and one mitigator");
        }
        if (zeta_.size() != entities_.size() || chi_.size() != mitigators_.size()) {
            throw Error(ErrorCode::EmptyState, "flag vectors must align with their index lists");
        }
    }

    /// Everything unflagged.
    static IncidentState clear(std::vector<EntityRef> entities, std::vector<MitigatorRef> mitigators) {
        std::vector<bool> zeta(entities.size(), false);
        std::vector<bool> chi(mitigators.size(), false);
        return IncidentState(std::move(entities), std::move(zeta), std::move(mitigators), std::move(chi));
    }

    const std::vector<EntityRef>& entities() const noexcept { return entities_; }
    const std::vector<MitigatorRef>& mitigators() const noexcept { return mitigators_; }
    const std::vector<bool>& zeta() const noexcept { return zeta_; }
    const std::vector<bool>& chi() const noexcept { return chi_; }

    IncidentState with_attack_flag(const EntityRef& entity, bool flagged) const {
        auto it = std::find(entities_.begin(), entities_.end(), entity);
        if (it == entities_.end()) throw Error(ErrorCode::UnknownEntity, entity.to_string() + " is not indexed");
        IncidentState out = *this;
        out.zeta_[static_cast<std::size_t>(it - entities_.begin())] = flagged;
        return out;
    }

    IncidentState with_mitigation_failed(const MitigatorRef& mitigator, bool failed) const {
        auto it = std::find(mitigators_.begin(), mitigators_.end(), mitigator);
        if (it == mitigators_.end()) {
            throw Error(ErrorCode::UnknownEntity, mitigator.to_string() + " is not indexed");
        }
        IncidentState out = *this;
        out.chi_[static_cast<std::size_t>(it - mitigators_.begin())] = failed;
        return out;
    }

    friend bool operator==(const IncidentState&, const IncidentState&) = default;

private:
    std::vector<EntityRef> entities_;
    std::vector<bool> zeta_;
    std::vector<MitigatorRef> mitigators_;
    std::vector<bool> chi_;
};

/// Sum over every (entity, mitigator) pair of zeta_i * chi_j. Equal to
/// (sum zeta) * (sum chi); computed through the factored form.
inline std::uint64_t incident_score(const IncidentState& state) {
    const auto attacked = static_cast<std::uint64_t>(std::count(state.zeta().begin(), state.zeta().end(), true));
    const auto failed = static_cast<std::uint64_t>(std::count(state.chi().begin(), state.chi().end(), true));
    return attacked * failed;
}

inline bool is_incident(const IncidentState& state) { return incident_score(state) >= 1; }

/// Free-function form of IncidentState::with_attack_flag.
inline IncidentState set_attack_flag(const IncidentState& state, const EntityRef& entity, bool flagged) {
    return state.with_attack_flag(entity, flagged);
}

}  // namespace evcsf
