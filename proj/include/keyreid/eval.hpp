// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "keyreid/rerank.hpp"
#include "keyreid/types.hpp"

namespace keyreid {

/// Cumulative matching characteristic: accuracy[r - 1] is the fraction of
/// queries whose true match is ranked r or better.
struct CMCCurve {
    std::vector<double> accuracy;
    std::size_t num_queries = 0;

    /// Accuracy at 1-based rank r; ranks past the gallery size read the last value.
    double at(std::size_t rank) const;

    friend bool operator==(const CMCCurve&, const CMCCurve&) = default;
};

struct NamedCurve {
    std::string name;
    CMCCurve curve;
};

std::size_t rank_of_true_match(std::span<const RankedCandidate> ranking, std::string_view true_id);
std::size_t rank_of_true_match(std::span<const std::string> ranking, std::string_view true_id);

CMCCurve cmc_curve(std::span<const std::size_t> ranks, std::size_t gallery_size);

/// Pointwise mean of curves over the same gallery size.
CMCCurve average_curves(std::span<const CMCCurve> curves);

struct Dataset {
    FlowSet probe;
    FlowSet gallery;
};

/// One full pipeline run (split, saliency, keys, rerank) over a test set.
struct TrialOutcome {
    std::uint64_t seed = 0;
    std::size_t test_size = 0;
    std::size_t n_keys = 0;
    CMCCurve baseline;
    CMCCurve key_aided;
};

struct TrialOptions {
    std::size_t num_trials = 10;
    double split = 0.5;  // fraction of identities used for testing, in (0, 1]
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
};

struct TrialSummary {
    CMCCurve baseline;
    CMCCurve key_aided;
    std::vector<TrialOutcome> trials;
};

/// Evaluates probe -> gallery with both the baseline and the key-aided
/// ranking. Every probe needs a true match present in the gallery.
TrialOutcome evaluate(const FlowSet& probe, const FlowSet& gallery, const FeatureBank& bank,
                      const PipelineConfig& config, std::size_t jobs = 1);

/// Random-split protocol: each trial draws `split` of the identities (probes
/// with a true match in the gallery) as its test set, seeded from the master
/// seed by trial index, and the curves are averaged across trials.
TrialSummary run_trials(const Dataset& dataset, const FeatureBank& bank, const PipelineConfig& config,
                        const TrialOptions& options);

/// Identity subset used by trial `trial`, as probe ids in flow order.
std::vector<std::string> trial_split(const FlowSet& probe, const FlowSet& gallery, double split,
                                     std::uint64_t trial_seed);

/// Text table of accuracies x100 with one decimal, one row per curve:
///   method r1 r5 ...
///   name 81.4 96.2 ...
std::string compare_table(std::span<const NamedCurve> curves, std::span<const std::size_t> ranks);

}  // namespace keyreid
