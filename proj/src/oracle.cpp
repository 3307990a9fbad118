// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "keyreid/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>

#include "keyreid/error.hpp"
#include "keyreid/flow.hpp"

namespace keyreid {

namespace {

double oracle_distance(Metric metric, const std::vector<double>& a, const std::vector<double>& b) {
    if (metric == Metric::euclidean) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(s);
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 1.0;
    double d = 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
    if (d < 0.0) d = 0.0;
    if (d > 2.0) d = 2.0;
    return d;
}

const PedestrianRecord& find_member(const FlowSet& flow, std::string_view id) {
    for (const auto& m : flow.members()) {
        if (m.id == id) return m;
    }
    throw NotFoundError(std::string(id));
}

}  // namespace

std::vector<RankedCandidate> oracle_rerank(std::string_view query, const FlowSet& probe, const FlowSet& gallery,
                                           const FeatureBank& bank, const KeySet& keys,
                                           const PipelineConfig& config) {
    const PedestrianRecord& pa = find_member(probe, query);
    const std::int64_t t_a = pa.entering_frame;

    // Gallery members the query (and its keys) may be matched against.
    std::vector<const PedestrianRecord*> scope;
    std::optional<std::size_t> query_subset;
    if (probe.has_subsets()) query_subset = probe.subset_of(query);
    std::optional<std::size_t> gallery_subset;
    if (query_subset && gallery.has_subsets()) {
        gallery_subset = correspond_subsets(probe, gallery, config.direction_map)[*query_subset].gallery_subset;
    }
    for (const auto& g : gallery.members()) {
        if (!gallery_subset || gallery.subset_of(g.id) == gallery_subset) scope.push_back(&g);
    }

    // Step 1: the L key persons nearest in time, picked one at a time.
    std::vector<const KeyEntry*> remaining;
    for (const auto& k : keys.keys) {
        if (query_subset && probe.subset_of(k.id) != query_subset) continue;
        remaining.push_back(&k);
    }
    std::vector<const KeyEntry*> chosen;
    for (std::size_t l = 0; l < config.num_keys && !remaining.empty(); ++l) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < remaining.size(); ++i) {
            const std::int64_t ti = find_member(probe, remaining[i]->id).entering_frame;
            const std::int64_t tb = find_member(probe, remaining[best]->id).entering_frame;
            const std::int64_t gi = std::abs(t_a - ti);
            const std::int64_t gb = std::abs(t_a - tb);
            if (gi < gb || (gi == gb && (ti < tb || (ti == tb && remaining[i]->id < remaining[best]->id)))) {
                best = i;
            }
        }
        chosen.push_back(remaining[best]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }

    // Steps 2 and 3: top match and candidate window per key.
    struct Window {
        double d_key;
        std::vector<std::string> members;
    };
    std::vector<Window> windows;
    for (const KeyEntry* key : chosen) {
        const FeatureSpace& space = bank.space(key->feature);
        const std::vector<double>& key_vec = space.embedding(probe.camera(), key->id);
        std::vector<double> d(scope.size());
        double d_max = 0.0;
        for (std::size_t j = 0; j < scope.size(); ++j) {
            d[j] = oracle_distance(space.metric, key_vec, space.embedding(gallery.camera(), scope[j]->id));
            if (d[j] > d_max) d_max = d[j];
        }
        std::size_t top = 0;
        for (std::size_t j = 1; j < scope.size(); ++j) {
            if (d[j] < d[top] || (d[j] == d[top] && scope[j]->id < scope[top]->id)) top = j;
        }
        double d_key = 1.0;
        if (d_max > 0.0) d_key = d[top] / d_max;
        if (d_key < kMinKeyWeight) d_key = kMinKeyWeight;

        const double t_key_b = static_cast<double>(scope[top]->entering_frame);
        const double delta = static_cast<double>(t_a - find_member(probe, key->id).entering_frame);
        double lo = t_key_b + (1.0 - config.tau) * delta;
        double hi = t_key_b + (1.0 + config.tau) * delta;
        if (hi < lo) std::swap(lo, hi);

        Window w{d_key, {}};
        for (const PedestrianRecord* g : scope) {
            const double t = static_cast<double>(g->entering_frame);
            if (lo <= t && t <= hi) w.members.push_back(g->id);
        }
        windows.push_back(std::move(w));
    }

    // Step 4: weight the baseline score of every gallery member and sort.
    const FeatureSpace& base_space =
        bank.space(config.baseline_feature.empty() ? bank.baseline : config.baseline_feature);
    std::vector<RankedCandidate> out;
    for (const auto& g : gallery.members()) {
        double base = 0.0;
        if (bank.baseline_matrix) {
            base = bank.baseline_matrix->at(query, g.id);
        } else {
            base = oracle_distance(base_space.metric, base_space.embedding(probe.camera(), query),
                                   base_space.embedding(gallery.camera(), g.id));
        }
        double omega = 1.0;
        bool inside = false;
        for (const auto& w : windows) {
            if (std::find(w.members.begin(), w.members.end(), g.id) == w.members.end()) continue;
            if (!inside) {
                omega = w.d_key;
                inside = true;
            } else if (config.weight_combine == WeightCombine::min) {
                omega = std::min(omega, w.d_key);
            } else if (config.weight_combine == WeightCombine::max) {
                omega = std::max(omega, w.d_key);
            } else {
                omega = omega * w.d_key;
            }
        }
        out.push_back({g.id, omega * base});
    }
    std::stable_sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.id < b.id;
    });
    return out;
}

}  // namespace keyreid
