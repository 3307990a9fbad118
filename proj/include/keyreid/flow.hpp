// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "keyreid/types.hpp"

namespace keyreid {

/// Orders one camera's records by entering frame; equal frames keep input order.
FlowSet build_flow(std::vector<PedestrianRecord> records, std::string camera);

/// T_a - T_b in frames.
std::int64_t temporal_distance(const FlowSet& flow, std::string_view a, std::string_view b);

/// Angle between two non-zero vectors, in degrees.
double angle_between_deg(const Vec2& a, const Vec2& b);

/// Greedy velocity clustering. The fastest unassigned member seeds a subset
/// and its velocity becomes the main velocity; every unassigned member whose
/// speed is within `epsilon` of it and whose direction is within `theta_deg`
/// joins. Repeats until all moving members are assigned. Zero-velocity
/// members share one trailing "stationary" subset.
FlowSet split_by_velocity(const FlowSet& flow, double theta_deg, double epsilon);

struct SubsetPair {
    std::size_t probe_subset = 0;
    /// nullopt: no counterpart, the subset is matched against the full gallery.
    std::optional<std::size_t> gallery_subset;
};

/// One entry per probe subset, in probe subset order. Greedy by descending
/// cosine similarity of main velocities; each gallery subset is used at most
/// once and only pairs with positive similarity are formed.
std::vector<SubsetPair> correspond_subsets(const FlowSet& probe, const FlowSet& gallery,
                                           const DirectionMap& direction_map);

}  // namespace keyreid
