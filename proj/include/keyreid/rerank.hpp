// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "keyreid/types.hpp"

namespace keyreid {

/// Lower bound on d_key. A key whose top match sits at distance 0 would
/// otherwise zero every score in its window and erase their relative order.
inline constexpr double kMinKeyWeight = 1e-6;

/// A key person of the probe view tied to its top match in the gallery view.
/// `delta_t` is T(query) - T(key) and is filled in per query.
struct KeyAnchor {
    std::string key_id;
    std::string feature;
    std::int64_t delta_t = 0;
    std::string top_match_id;
    std::int64_t top_match_time = 0;
    double d_key = 1.0;  // in (0, 1]
};

/// Gallery members whose entering frame falls in the interval predicted by
/// an anchor.
struct CandidateWindow {
    KeyAnchor anchor;
    std::vector<std::string> member_ids;
    double lo = 0.0;
    double hi = 0.0;
};

struct RankedCandidate {
    std::string id;
    double score = 0.0;

    friend bool operator==(const RankedCandidate&, const RankedCandidate&) = default;
};

/// Up to `count` key persons temporally closest to `query`, by |dT| then
/// earlier frame then id. When the flow is split, only keys from the
/// query's velocity subset are eligible. The query itself is eligible.
std::vector<KeyEntry> nearest_key_persons(std::string_view query, const FlowSet& flow, const KeySet& keys,
                                          std::size_t count);

/// Finds the top gallery match of a key person among `candidates` under the
/// feature's metric. Distances are divided by the row maximum, so d_key is
/// the top match's share of the largest distance (1 when every distance is 0).
KeyAnchor match_key_person(std::string_view key, std::string_view feature, std::string_view key_camera,
                           const FlowSet& gallery, const FeatureBank& bank,
                           std::span<const std::string> candidates);
KeyAnchor match_key_person(std::string_view key, std::string_view feature, std::string_view key_camera,
                           const FlowSet& gallery, const FeatureBank& bank);

/// Window [T_top + (1-tau) dT, T_top + (1+tau) dT] with the endpoints put in
/// order, so a negative dT works the same way in reverse time.
CandidateWindow candidate_window(const KeyAnchor& anchor, const FlowSet& gallery, double tau,
                                 std::span<const std::string> candidates);
CandidateWindow candidate_window(const KeyAnchor& anchor, const FlowSet& gallery, double tau);

/// Weight per gallery id: the combination of the d_key values of every
/// window holding it, 1 when no window does.
std::vector<double> compute_weights(std::span<const CandidateWindow> windows,
                                    std::span<const std::string> gallery_ids, WeightCombine combine);

/// Elementwise weight * baseline dissimilarity.
std::vector<double> rerank_scores(std::span<const double> base_row, std::span<const double> weights);

/// Sorts ascending by score, ties by id.
std::vector<RankedCandidate> rank_by_score(std::span<const std::string> ids, std::span<const double> scores);

/// Baseline dissimilarities from `query` to every gallery member, in gallery
/// flow order. Uses the bank's precomputed matrix when it has one, otherwise
/// the baseline feature space (config.baseline_feature overrides the bank).
std::vector<double> baseline_row(std::string_view query, const FlowSet& probe, const FlowSet& gallery,
                                 const FeatureBank& bank, const PipelineConfig& config);

std::vector<RankedCandidate> baseline_ranking(std::string_view query, const FlowSet& probe,
                                              const FlowSet& gallery, const FeatureBank& bank,
                                              const PipelineConfig& config);

/// Gallery ids a query may be matched within: the gallery subset paired
/// with the query's probe subset, or the whole gallery when either flow is
/// unsplit or the subset has no counterpart.
std::vector<std::string> gallery_scope(std::string_view query, const FlowSet& probe, const FlowSet& gallery,
                                       const PipelineConfig& config);

struct RerankOutcome {
    std::vector<RankedCandidate> ranking;
    std::vector<CandidateWindow> windows;
    std::vector<double> weights;  // gallery flow order
};

RerankOutcome rerank_query_explained(std::string_view query, const FlowSet& probe, const FlowSet& gallery,
                                     const FeatureBank& bank, const KeySet& keys,
                                     const PipelineConfig& config);

/// The full key-person-aided ranking of the gallery for one probe query.
/// With no usable key persons it is the baseline ranking.
std::vector<RankedCandidate> rerank_query(std::string_view query, const FlowSet& probe, const FlowSet& gallery,
                                          const FeatureBank& bank, const KeySet& keys,
                                          const PipelineConfig& config);

/// Batch form of rerank_query: subset pairing, key matches and the gallery
/// embeddings are computed once up front. Holds references to its inputs,
/// which must outlive it. All const members are safe to call concurrently
/// and return exactly what rerank_query / baseline_ranking would.
class Reranker {
public:
    Reranker(const FlowSet& probe, const FlowSet& gallery, const FeatureBank& bank, const KeySet& keys,
             const PipelineConfig& config);

    RerankOutcome rerank(std::string_view query) const;
    std::vector<RankedCandidate> baseline(std::string_view query) const;

private:
    std::vector<double> base_row(std::string_view query) const;
    std::size_t scope_index(std::string_view query) const;

    const FlowSet& probe_;
    const FlowSet& gallery_;
    const FeatureBank& bank_;
    const KeySet& keys_;
    const PipelineConfig& config_;
    std::vector<std::string> gallery_ids_;
    std::vector<std::vector<std::string>> scopes_;        // per probe subset, last = whole gallery
    std::vector<std::size_t> scope_of_subset_;
    std::map<std::pair<std::string, std::size_t>, KeyAnchor> anchors_;  // (key, scope) -> match
    std::vector<double> gallery_base_;                   // dense baseline embeddings
    std::size_t dim_ = 0;
    bool use_matrix_ = false;
};

}  // namespace keyreid
