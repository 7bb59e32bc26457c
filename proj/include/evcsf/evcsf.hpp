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

#include "evcsf/anomaly.hpp"
#include "evcsf/domain.hpp"
#include "evcsf/error.hpp"
#include "evcsf/incident.hpp"
#include "evcsf/json_io.hpp"
#include "evcsf/pipeline.hpp"
#include "evcsf/report.hpp"
#include "evcsf/scenario.hpp"
#include "evcsf/timeline.hpp"
#include "evcsf/workflow.hpp"
