// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "keyreid/rerank.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "keyreid/distance.hpp"
#include "keyreid/error.hpp"
#include "keyreid/flow.hpp"

namespace keyreid {

namespace {

const FeatureSpace& baseline_space(const FeatureBank& bank, const PipelineConfig& config) {
    return bank.space(config.baseline_feature.empty() ? bank.baseline : config.baseline_feature);
}

double combine_weights(double current, double next, WeightCombine combine) {
    switch (combine) {
        case WeightCombine::min: return std::min(current, next);
        case WeightCombine::max: return std::max(current, next);
        case WeightCombine::product: return current * next;
    }
    return std::min(current, next);
}

}  // namespace

std::vector<KeyEntry> nearest_key_persons(std::string_view query, const FlowSet& flow, const KeySet& keys,
                                          std::size_t count) {
    const PedestrianRecord& q = flow.at(query);
    const auto query_subset = flow.subset_of(query);

    struct Eligible {
        std::int64_t gap;
        std::int64_t frame;
        const KeyEntry* key;
    };
    std::vector<Eligible> eligible;
    for (const auto& key : keys.keys) {
        const PedestrianRecord& k = flow.at(key.id);
        if (query_subset && flow.subset_of(key.id) != query_subset) continue;
        eligible.push_back({std::abs(q.entering_frame - k.entering_frame), k.entering_frame, &key});
    }
    std::sort(eligible.begin(), eligible.end(), [](const Eligible& a, const Eligible& b) {
        if (a.gap != b.gap) return a.gap < b.gap;
        if (a.frame != b.frame) return a.frame < b.frame;
        return a.key->id < b.key->id;
    });

    std::vector<KeyEntry> out;
    for (std::size_t i = 0; i < eligible.size() && i < count; ++i) out.push_back(*eligible[i].key);
    return out;
}

KeyAnchor match_key_person(std::string_view key, std::string_view feature, std::string_view key_camera,
                           const FlowSet& gallery, const FeatureBank& bank,
                           std::span<const std::string> candidates) {
    if (candidates.empty()) throw ParameterError("key matching needs at least one gallery candidate");
    const FeatureSpace& space = bank.space(feature);
    const Embedding& k = space.embedding(key_camera, key);

    std::vector<double> row(candidates.size());
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        row[j] = distance(space.metric, k, space.embedding(gallery.camera(), candidates[j]));
    }
    std::size_t top = 0;
    for (std::size_t j = 1; j < row.size(); ++j) {
        if (row[j] < row[top] || (row[j] == row[top] && candidates[j] < candidates[top])) top = j;
    }
    const double row_max = *std::max_element(row.begin(), row.end());

    KeyAnchor anchor;
    anchor.key_id = std::string(key);
    anchor.feature = std::string(feature);
    anchor.top_match_id = candidates[top];
    anchor.top_match_time = gallery.at(candidates[top]).entering_frame;
    anchor.d_key = row_max > 0.0 ? std::max(row[top] / row_max, kMinKeyWeight) : 1.0;
    return anchor;
}

KeyAnchor match_key_person(std::string_view key, std::string_view feature, std::string_view key_camera,
                           const FlowSet& gallery, const FeatureBank& bank) {
    const auto ids = gallery.ids();
    return match_key_person(key, feature, key_camera, gallery, bank, ids);
}

CandidateWindow candidate_window(const KeyAnchor& anchor, const FlowSet& gallery, double tau,
                                 std::span<const std::string> candidates) {
    if (!(tau >= 0.0)) throw ParameterError("tau must be >= 0");
    const double t = static_cast<double>(anchor.top_match_time);
    const double dt = static_cast<double>(anchor.delta_t);
    double lo = t + (1.0 - tau) * dt;
    double hi = t + (1.0 + tau) * dt;
    if (lo > hi) std::swap(lo, hi);

    CandidateWindow window;
    window.anchor = anchor;
    window.lo = lo;
    window.hi = hi;
    for (const auto& id : candidates) {
        const double frame = static_cast<double>(gallery.at(id).entering_frame);
        if (frame >= lo && frame <= hi) window.member_ids.push_back(id);
    }
    return window;
}

CandidateWindow candidate_window(const KeyAnchor& anchor, const FlowSet& gallery, double tau) {
    const auto ids = gallery.ids();
    return candidate_window(anchor, gallery, tau, ids);
}

std::vector<double> compute_weights(std::span<const CandidateWindow> windows,
                                    std::span<const std::string> gallery_ids, WeightCombine combine) {
    std::map<std::string_view, std::size_t> index;
    for (std::size_t j = 0; j < gallery_ids.size(); ++j) index.emplace(gallery_ids[j], j);

    std::vector<double> weights(gallery_ids.size(), 1.0);
    std::vector<bool> covered(gallery_ids.size(), false);
    for (const auto& window : windows) {
        for (const auto& id : window.member_ids) {
            auto it = index.find(id);
            if (it == index.end()) continue;
            const std::size_t j = it->second;
            weights[j] = covered[j] ? combine_weights(weights[j], window.anchor.d_key, combine)
                                    : window.anchor.d_key;
            covered[j] = true;
        }
    }
    return weights;
}

std::vector<double> rerank_scores(std::span<const double> base_row, std::span<const double> weights) {
    if (base_row.size() != weights.size()) {
        throw ParameterError(fmt::format("baseline row has {} entries but there are {} weights", base_row.size(),
                                         weights.size()));
    }
    std::vector<double> out(base_row.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = weights[j] * base_row[j];
    return out;
}

std::vector<RankedCandidate> rank_by_score(std::span<const std::string> ids, std::span<const double> scores) {
    if (ids.size() != scores.size()) throw ParameterError("rank_by_score: ids and scores differ in length");
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return ids[a] < ids[b];
    });
    std::vector<RankedCandidate> out;
    out.reserve(order.size());
    for (std::size_t j : order) out.push_back({ids[j], scores[j]});
    return out;
}

std::vector<double> baseline_row(std::string_view query, const FlowSet& probe, const FlowSet& gallery,
                                 const FeatureBank& bank, const PipelineConfig& config) {
    probe.position(query);
    std::vector<double> row(gallery.size());
    if (bank.baseline_matrix) {
        for (std::size_t j = 0; j < gallery.size(); ++j) {
            row[j] = bank.baseline_matrix->at(query, gallery.members()[j].id);
        }
        return row;
    }
    const FeatureSpace& space = baseline_space(bank, config);
    const Embedding& q = space.embedding(probe.camera(), query);
    for (std::size_t j = 0; j < gallery.size(); ++j) {
        row[j] = distance(space.metric, q, space.embedding(gallery.camera(), gallery.members()[j].id));
    }
    return row;
}

std::vector<RankedCandidate> baseline_ranking(std::string_view query, const FlowSet& probe,
                                              const FlowSet& gallery, const FeatureBank& bank,
                                              const PipelineConfig& config) {
    const auto row = baseline_row(query, probe, gallery, bank, config);
    const auto ids = gallery.ids();
    return rank_by_score(ids, row);
}

std::vector<std::string> gallery_scope(std::string_view query, const FlowSet& probe, const FlowSet& gallery,
                                       const PipelineConfig& config) {
    const auto subset = probe.subset_of(query);
    if (!subset || !gallery.has_subsets()) return gallery.ids();
    const auto pairs = correspond_subsets(probe, gallery, config.direction_map);
    const auto& counterpart = pairs[*subset].gallery_subset;
    if (!counterpart) return gallery.ids();
    return gallery.subsets()[*counterpart].member_ids;
}

RerankOutcome rerank_query_explained(std::string_view query, const FlowSet& probe, const FlowSet& gallery,
                                     const FeatureBank& bank, const KeySet& keys,
                                     const PipelineConfig& config) {
    const PedestrianRecord& q = probe.at(query);
    const auto scope = gallery_scope(query, probe, gallery, config);

    RerankOutcome out;
    for (const auto& key : nearest_key_persons(query, probe, keys, config.num_keys)) {
        KeyAnchor anchor = match_key_person(key.id, key.feature, probe.camera(), gallery, bank, scope);
        anchor.delta_t = q.entering_frame - probe.at(key.id).entering_frame;
        out.windows.push_back(candidate_window(anchor, gallery, config.tau, scope));
    }
    const auto ids = gallery.ids();
    out.weights = compute_weights(out.windows, ids, config.weight_combine);
    const auto scores = rerank_scores(baseline_row(query, probe, gallery, bank, config), out.weights);
    out.ranking = rank_by_score(ids, scores);
    return out;
}

std::vector<RankedCandidate> rerank_query(std::string_view query, const FlowSet& probe, const FlowSet& gallery,
                                          const FeatureBank& bank, const KeySet& keys,
                                          const PipelineConfig& config) {
    return rerank_query_explained(query, probe, gallery, bank, keys, config).ranking;
}

// ---------------------------------------------------------------------------
// Reranker

Reranker::Reranker(const FlowSet& probe, const FlowSet& gallery, const FeatureBank& bank, const KeySet& keys,
                   const PipelineConfig& config)
    : probe_(probe), gallery_(gallery), bank_(bank), keys_(keys), config_(config), gallery_ids_(gallery.ids()) {
    std::vector<std::optional<std::size_t>> counterpart;
    if (probe.has_subsets() && gallery.has_subsets()) {
        for (const auto& pair : correspond_subsets(probe, gallery, config.direction_map)) {
            counterpart.push_back(pair.gallery_subset);
        }
    }
    for (const auto& c : counterpart) {
        scope_of_subset_.push_back(scopes_.size());
        scopes_.push_back(c ? gallery.subsets()[*c].member_ids : gallery_ids_);
    }
    scopes_.push_back(gallery_ids_);

    for (const auto& key : keys.keys) {
        const std::size_t s = scope_index(key.id);
        anchors_.emplace(std::make_pair(key.id, s),
                         match_key_person(key.id, key.feature, probe.camera(), gallery, bank, scopes_[s]));
    }

    use_matrix_ = bank.baseline_matrix.has_value();
    if (!use_matrix_) {
        const FeatureSpace& space = baseline_space(bank, config);
        DenseEmbeddings dense(space, gallery.camera(), gallery_ids_);
        dim_ = dense.dim();
        gallery_base_.reserve(dense.size() * dim_);
        for (std::size_t j = 0; j < dense.size(); ++j) {
            const auto row = dense.row(j);
            gallery_base_.insert(gallery_base_.end(), row.begin(), row.end());
        }
    }
}

std::size_t Reranker::scope_index(std::string_view query) const {
    const auto subset = probe_.subset_of(query);
    if (!subset || scope_of_subset_.empty()) return scopes_.size() - 1;
    return scope_of_subset_[*subset];
}

std::vector<double> Reranker::base_row(std::string_view query) const {
    if (use_matrix_) return baseline_row(query, probe_, gallery_, bank_, config_);
    const FeatureSpace& space = baseline_space(bank_, config_);
    const Embedding& q = space.embedding(probe_.camera(), query);
    std::vector<double> row(gallery_ids_.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        row[j] = distance(space.metric, q, std::span<const double>(gallery_base_.data() + j * dim_, dim_));
    }
    return row;
}

RerankOutcome Reranker::rerank(std::string_view query) const {
    const PedestrianRecord& q = probe_.at(query);
    const std::size_t s = scope_index(query);

    RerankOutcome out;
    for (const auto& key : nearest_key_persons(query, probe_, keys_, config_.num_keys)) {
        KeyAnchor anchor = anchors_.at(std::make_pair(key.id, s));
        anchor.delta_t = q.entering_frame - probe_.at(key.id).entering_frame;
        out.windows.push_back(candidate_window(anchor, gallery_, config_.tau, scopes_[s]));
    }
    out.weights = compute_weights(out.windows, gallery_ids_, config_.weight_combine);
    out.ranking = rank_by_score(gallery_ids_, rerank_scores(base_row(query), out.weights));
    return out;
}

std::vector<RankedCandidate> Reranker::baseline(std::string_view query) const {
    return rank_by_score(gallery_ids_, base_row(query));
}

}  // namespace keyreid
