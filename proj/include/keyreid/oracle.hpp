// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>
#include <vector>

#include "keyreid/rerank.hpp"
#include "keyreid/types.hpp"

namespace keyreid {

/// Unoptimised, step-by-step transcription of key-person-aided re-ranking
/// (nearest keys, key matching, candidate windows, weighting). Shares no code
/// with rerank_query and exists to check it; intended for galleries of a
/// few dozen people.
std::vector<RankedCandidate> oracle_rerank(std::string_view query, const FlowSet& probe, const FlowSet& gallery,
                                           const FeatureBank& bank, const KeySet& keys,
                                           const PipelineConfig& config);

}  // namespace keyreid
