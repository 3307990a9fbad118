// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "keyreid/types.hpp"

namespace keyreid {

/// Knobs of the synthetic two-camera pedestrian flow. Embeddings per feature
/// are a bulk Gaussian cluster (RMS radius `cluster_spread`) plus
/// `salient_fraction` outliers placed 10-20x `cluster_spread` from the bulk
/// centroid; each camera sees base + isotropic noise of RMS `cross_view_noise`.
struct SynthParams {
    std::size_t num_identities = 200;
    std::size_t num_features = 3;
    std::vector<std::size_t> dims = {64};  // one per feature, or a single shared value
    std::vector<std::string> feature_names;  // default: GOG, DNS, SDALF, F4, F5, ...
    double salient_fraction = 0.1;
    double cluster_spread = 1.0;
    double cross_view_noise = 1.4;
    double arrival_rate = 30.0;    // mean inter-arrival frames in camera A
    double transit_mean = 300.0;   // frames from camera A to camera B
    double transit_jitter = 30.0;  // std. dev. of the transit time
    double direction_split = 0.5;  // fraction walking in +x
    double speed_spread = 0.1;     // relative std. dev. of walking speed
    std::uint64_t seed = 1;
    bool require_salient = false;  // demand at least one outlier per feature

    /// Throws ParameterError on infeasible values.
    void validate() const;
    std::size_t dim_of(std::size_t feature) const;
    std::string name_of(std::size_t feature) const;
};

using GroundTruth = std::map<std::string, std::string, std::less<>>;  // probe id -> gallery id

struct SyntheticFlow {
    FlowSet probe;    // camera "A"
    FlowSet gallery;  // camera "B"
    FeatureBank bank;
    GroundTruth truth;
    /// Per feature, the probe ids planted as appearance outliers.
    std::vector<std::vector<std::string>> outliers;
};

/// Deterministic in `params` (including the seed). Embeddings, times,
/// velocities and gallery ids draw from separate seed streams, so changing
/// e.g. the jitter leaves the embeddings untouched.
SyntheticFlow generate_flow(const SynthParams& params);

/// Fraction of probe identity pairs whose entering order differs between the
/// two cameras. When the probe flow is split, only pairs inside one velocity
/// subset are counted. 0 when there are no pairs.
double order_inversion_rate(const FlowSet& probe, const FlowSet& gallery, const GroundTruth& truth);

}  // namespace keyreid
