// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "keyreid/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "keyreid/error.hpp"

namespace keyreid {

FlowSet build_flow(std::vector<PedestrianRecord> records, std::string camera) {
    return FlowSet(std::move(camera), std::move(records));
}

std::int64_t temporal_distance(const FlowSet& flow, std::string_view a, std::string_view b) {
    return flow.at(a).entering_frame - flow.at(b).entering_frame;
}

double angle_between_deg(const Vec2& a, const Vec2& b) {
    const double c = a.dot(b) / (a.norm() * b.norm());
    return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

FlowSet split_by_velocity(const FlowSet& flow, double theta_deg, double epsilon) {
    const auto members = flow.members();
    std::vector<std::size_t> moving;
    std::vector<std::string> stationary;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const Vec2& v = members[i].velocity;
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
            throw ParameterError(fmt::format("'{}' has a non-finite velocity", members[i].id));
        }
        if (v.norm() == 0.0) {
            stationary.push_back(members[i].id);
        } else {
            moving.push_back(i);
        }
    }

    std::vector<VelocitySubset> subsets;
    std::vector<bool> assigned(members.size(), false);
    std::size_t remaining = moving.size();
    while (remaining > 0) {
        std::size_t seed = members.size();
        for (std::size_t i : moving) {
            if (assigned[i]) continue;
            if (seed == members.size()) {
                seed = i;
                continue;
            }
            const double s = members[i].velocity.norm();
            const double best = members[seed].velocity.norm();
            if (s > best || (s == best && members[i].id < members[seed].id)) seed = i;
        }

        VelocitySubset subset;
        subset.label = fmt::format("S{}", subsets.size());
        subset.main_velocity = members[seed].velocity;
        const double main_speed = subset.main_velocity.norm();
        for (std::size_t i : moving) {
            if (assigned[i]) continue;
            const Vec2& v = members[i].velocity;
            const bool joins = i == seed || (std::abs(v.norm() - main_speed) <= epsilon &&
                                             angle_between_deg(v, subset.main_velocity) < theta_deg);
            if (joins) {
                assigned[i] = true;
                --remaining;
                subset.member_ids.push_back(members[i].id);
            }
        }
        subsets.push_back(std::move(subset));
    }
    if (!stationary.empty()) {
        VelocitySubset still;
        still.label = "stationary";
        still.member_ids = std::move(stationary);
        still.stationary = true;
        subsets.push_back(std::move(still));
    }
    return flow.with_subsets(std::move(subsets));
}

namespace {

double subset_similarity(const VelocitySubset& p, const VelocitySubset& g, bool negate) {
    if (p.stationary || g.stationary) return p.stationary && g.stationary ? 1.0 : 0.0;
    const Vec2 gv = negate ? -g.main_velocity : g.main_velocity;
    return p.main_velocity.dot(gv) / (p.main_velocity.norm() * gv.norm());
}

std::vector<SubsetPair> pair_by_table(const FlowSet& probe, const FlowSet& gallery,
                                      const DirectionMap& direction_map) {
    auto find_label = [](const FlowSet& flow, const std::string& label) {
        for (std::size_t i = 0; i < flow.subsets().size(); ++i) {
            if (flow.subsets()[i].label == label) return i;
        }
        throw ParameterError(fmt::format("direction map names unknown subset '{}' (camera '{}')", label,
                                         flow.camera()));
    };
    std::vector<SubsetPair> out(probe.subsets().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i].probe_subset = i;
    std::vector<bool> used(gallery.subsets().size(), false);
    for (const auto& [from, to] : direction_map.table) {
        const std::size_t p = find_label(probe, from);
        const std::size_t g = find_label(gallery, to);
        if (used[g] || out[p].gallery_subset) {
            throw ParameterError(fmt::format("direction map pairs '{}' -> '{}' more than once", from, to));
        }
        used[g] = true;
        out[p].gallery_subset = g;
    }
    return out;
}

}  // namespace

std::vector<SubsetPair> correspond_subsets(const FlowSet& probe, const FlowSet& gallery,
                                           const DirectionMap& direction_map) {
    if (!probe.has_subsets() || !gallery.has_subsets()) {
        throw ParameterError("subset correspondence needs both flows split by velocity");
    }
    if (direction_map.mode == DirectionMap::Mode::table) return pair_by_table(probe, gallery, direction_map);

    const bool negate = direction_map.mode == DirectionMap::Mode::negate;
    struct Candidate {
        double similarity;
        std::size_t p;
        std::size_t g;
    };
    std::vector<Candidate> candidates;
    for (std::size_t p = 0; p < probe.subsets().size(); ++p) {
        for (std::size_t g = 0; g < gallery.subsets().size(); ++g) {
            const double s = subset_similarity(probe.subsets()[p], gallery.subsets()[g], negate);
            if (s > 0.0) candidates.push_back({s, p, g});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        if (a.p != b.p) return a.p < b.p;
        return a.g < b.g;
    });

    std::vector<SubsetPair> out(probe.subsets().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i].probe_subset = i;
    std::vector<bool> used(gallery.subsets().size(), false);
    for (const auto& c : candidates) {
        if (out[c.p].gallery_subset || used[c.g]) continue;
        out[c.p].gallery_subset = c.g;
        used[c.g] = true;
    }
    return out;
}

}  // namespace keyreid
