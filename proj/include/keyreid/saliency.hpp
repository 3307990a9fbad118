// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "keyreid/types.hpp"

namespace keyreid {

/// Saliency of every member of one flow in one feature space: the mean
/// distance to the K nearest other members, min-max scaled over the flow.
struct SaliencyTable {
    std::string feature;
    std::size_t k_used = 0;
    std::map<std::string, double, std::less<>> scores;
    std::map<std::string, double, std::less<>> raw_knn_mean;
};

/// Mean distance from `person` to its `k` nearest other members of `set`.
/// The person's own entry is never part of its neighbour pool.
double knn_mean_distance(const FeatureSpace& space, const FlowSet& set, std::string_view person,
                         std::size_t k);

/// When every raw K-NN mean is equal the set has no salient member and all
/// scores are 0.
SaliencyTable saliency_scores(const FeatureSpace& space, const FlowSet& set, std::size_t k);

/// Members with score >= rho, by descending score then ascending id.
std::vector<ScoredId> select_key_persons(const SaliencyTable& table, double rho);

/// Per-feature key sets and their union. Each union entry carries the
/// feature in which the person is most salient (ties go to bank order).
KeySet union_key_sets(const FeatureBank& bank, const FlowSet& set, const PipelineConfig& config);

struct RhoSweepPoint {
    double rho = 0.0;
    double sigma = 1.0;  // rank-1 accuracy of the key persons; 1 when there are none
    std::size_t n_keys = 0;
};

/// Key-set size and key-person rank-1 accuracy across a grid of thresholds,
/// for choosing rho. Every probe member needs a true match.
std::vector<RhoSweepPoint> sweep_rho(const FeatureSpace& space, const FlowSet& probe, const FlowSet& gallery,
                                     std::span<const double> grid, std::size_t k);

}  // namespace keyreid
