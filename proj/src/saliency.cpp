// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "keyreid/saliency.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "keyreid/distance.hpp"
#include "keyreid/error.hpp"

namespace keyreid {

namespace {

void check_k(std::size_t k, std::size_t set_size) {
    if (k == 0) throw ParameterError("k must be at least 1");
    if (k >= set_size) {
        throw ParameterError(
            fmt::format("k = {} needs at least {} members, the set has {}", k, k + 1, set_size));
    }
}

double mean_of_smallest(std::vector<double>& distances, std::size_t k) {
    std::partial_sort(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(k), distances.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += distances[i];
    return sum / static_cast<double>(k);
}

bool by_score_then_id(const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

KeySet merge_per_feature(const FeatureBank& bank,
                         std::vector<std::vector<ScoredId>> per_feature) {
    KeySet out;
    std::map<std::string, std::size_t, std::less<>> position;
    for (std::size_t m = 0; m < bank.spaces.size(); ++m) {
        auto& selected = per_feature[m];
        std::sort(selected.begin(), selected.end(), by_score_then_id);
        for (const auto& s : selected) {
            auto [it, inserted] = position.emplace(s.id, out.keys.size());
            if (inserted) {
                out.keys.push_back({s.id, bank.spaces[m].name, s.score});
            } else if (s.score > out.keys[it->second].score) {
                // strictly greater: equal scores stay with the earlier feature
                out.keys[it->second].feature = bank.spaces[m].name;
                out.keys[it->second].score = s.score;
            }
        }
        out.per_feature.emplace_back(bank.spaces[m].name, std::move(selected));
    }
    std::sort(out.keys.begin(), out.keys.end(), [](const KeyEntry& a, const KeyEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    return out;
}

}  // namespace

double knn_mean_distance(const FeatureSpace& space, const FlowSet& set, std::string_view person,
                         std::size_t k) {
    const std::size_t self = set.position(person);
    check_k(k, set.size());
    const auto& query = space.embedding(set.camera(), person);
    std::vector<double> distances;
    distances.reserve(set.size() - 1);
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (i == self) continue;
        distances.push_back(distance(space.metric, query, space.embedding(set.camera(), set.members()[i].id)));
    }
    return mean_of_smallest(distances, k);
}

SaliencyTable saliency_scores(const FeatureSpace& space, const FlowSet& set, std::size_t k) {
    const std::size_t n = set.size();
    if (n < 2) throw ParameterError(fmt::format("saliency needs at least 2 members, the set has {}", n));
    check_k(k, n);

    const auto ids = set.ids();
    const DenseEmbeddings dense(space, set.camera(), ids);

    std::vector<double> pairwise(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = distance(space.metric, dense.row(i), dense.row(j));
            pairwise[i * n + j] = d;
            pairwise[j * n + i] = d;
        }
    }

    std::vector<double> raw(n);
    std::vector<double> row;
    row.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) row.push_back(pairwise[i * n + j]);
        }
        raw[i] = mean_of_smallest(row, k);
    }

    const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    const bool degenerate = range <= 1e-12 * std::max(1.0, std::abs(*hi_it));

    SaliencyTable table;
    table.feature = space.name;
    table.k_used = k;
    for (std::size_t i = 0; i < n; ++i) {
        table.raw_knn_mean.emplace(ids[i], raw[i]);
        table.scores.emplace(ids[i], degenerate ? 0.0 : (raw[i] - lo) / range);
    }
    return table;
}

std::vector<ScoredId> select_key_persons(const SaliencyTable& table, double rho) {
    std::vector<ScoredId> out;
    for (const auto& [id, score] : table.scores) {
        if (score >= rho) out.push_back({id, score});
    }
    std::sort(out.begin(), out.end(), by_score_then_id);
    return out;
}

KeySet union_key_sets(const FeatureBank& bank, const FlowSet& set, const PipelineConfig& config) {
    std::vector<std::vector<ScoredId>> per_feature(bank.spaces.size());
    if (set.empty()) return merge_per_feature(bank, std::move(per_feature));

    for (const auto& space : bank.spaces) {
        for (const auto& m : set.members()) space.embedding(set.camera(), m.id);
    }

    if (config.saliency_scope == SaliencyScope::subset && set.has_subsets()) {
        for (const auto& subset : set.subsets()) {
            // too small for a K-NN neighbourhood: contributes no key persons
            if (subset.member_ids.size() <= config.k_nn) continue;
            const FlowSet sub = set.restricted_to(subset.member_ids);
            for (std::size_t m = 0; m < bank.spaces.size(); ++m) {
                const auto table = saliency_scores(bank.spaces[m], sub, config.k_nn);
                auto selected = select_key_persons(table, config.rho_for(bank.spaces[m]));
                per_feature[m].insert(per_feature[m].end(), selected.begin(), selected.end());
            }
        }
    } else {
        for (std::size_t m = 0; m < bank.spaces.size(); ++m) {
            const auto table = saliency_scores(bank.spaces[m], set, config.k_nn);
            per_feature[m] = select_key_persons(table, config.rho_for(bank.spaces[m]));
        }
    }
    return merge_per_feature(bank, std::move(per_feature));
}

std::vector<RhoSweepPoint> sweep_rho(const FeatureSpace& space, const FlowSet& probe, const FlowSet& gallery,
                                     std::span<const double> grid, std::size_t k) {
    for (const auto& p : probe.members()) {
        if (!p.true_match) throw ParameterError(fmt::format("probe '{}' has no ground-truth match", p.id));
    }
    if (gallery.empty()) throw ParameterError("rho sweep needs a non-empty gallery");

    const auto table = saliency_scores(space, probe, k);
    const auto gallery_ids = gallery.ids();
    const DenseEmbeddings gallery_rows(space, gallery.camera(), gallery_ids);

    std::map<std::string, bool, std::less<>> rank1_correct;
    for (const auto& p : probe.members()) {
        const auto& q = space.embedding(probe.camera(), p.id);
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < gallery_ids.size(); ++j) {
            const double d = distance(space.metric, q, gallery_rows.row(j));
            if (d < best_d || (d == best_d && gallery_ids[j] < gallery_ids[best])) {
                best_d = d;
                best = j;
            }
        }
        rank1_correct.emplace(p.id, gallery_ids[best] == *p.true_match);
    }

    std::vector<RhoSweepPoint> out;
    out.reserve(grid.size());
    for (double rho : grid) {
        const auto keys = select_key_persons(table, rho);
        std::size_t correct = 0;
        for (const auto& key : keys) correct += rank1_correct.find(key.id)->second ? 1 : 0;
        RhoSweepPoint point;
        point.rho = rho;
        point.n_keys = keys.size();
        point.sigma = keys.empty() ? 1.0 : static_cast<double>(correct) / static_cast<double>(keys.size());
        out.push_back(point);
    }
    return out;
}

}  // namespace keyreid
