// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "keyreid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "keyreid/error.hpp"
#include "keyreid/flow.hpp"
#include "keyreid/parallel.hpp"
#include "keyreid/random.hpp"
#include "keyreid/saliency.hpp"

namespace keyreid {

double CMCCurve::at(std::size_t rank) const {
    if (accuracy.empty() || rank == 0) return 0.0;
    return accuracy[std::min(rank, accuracy.size()) - 1];
}

std::size_t rank_of_true_match(std::span<const RankedCandidate> ranking, std::string_view true_id) {
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (ranking[i].id == true_id) return i + 1;
    }
    throw EvaluationError(fmt::format("true match '{}' is not in the ranked gallery", true_id));
}

std::size_t rank_of_true_match(std::span<const std::string> ranking, std::string_view true_id) {
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (ranking[i] == true_id) return i + 1;
    }
    throw EvaluationError(fmt::format("true match '{}' is not in the ranked gallery", true_id));
}

CMCCurve cmc_curve(std::span<const std::size_t> ranks, std::size_t gallery_size) {
    if (ranks.empty()) throw ParameterError("CMC needs at least one query rank");
    std::vector<std::size_t> hits(gallery_size + 1, 0);
    for (std::size_t r : ranks) {
        if (r < 1 || r > gallery_size) {
            throw ParameterError(fmt::format("rank {} outside [1, {}]", r, gallery_size));
        }
        ++hits[r];
    }
    CMCCurve curve;
    curve.num_queries = ranks.size();
    curve.accuracy.resize(gallery_size);
    std::size_t cumulative = 0;
    for (std::size_t r = 1; r <= gallery_size; ++r) {
        cumulative += hits[r];
        curve.accuracy[r - 1] = static_cast<double>(cumulative) / static_cast<double>(ranks.size());
    }
    return curve;
}

CMCCurve average_curves(std::span<const CMCCurve> curves) {
    if (curves.empty()) throw ParameterError("nothing to average");
    CMCCurve out;
    out.accuracy.assign(curves.front().accuracy.size(), 0.0);
    for (const auto& c : curves) {
        if (c.accuracy.size() != out.accuracy.size()) {
            throw ParameterError("cannot average CMC curves over different gallery sizes");
        }
        for (std::size_t r = 0; r < c.accuracy.size(); ++r) out.accuracy[r] += c.accuracy[r];
        out.num_queries += c.num_queries;
    }
    for (double& a : out.accuracy) a /= static_cast<double>(curves.size());
    return out;
}

TrialOutcome evaluate(const FlowSet& probe, const FlowSet& gallery, const FeatureBank& bank,
                      const PipelineConfig& config, std::size_t jobs) {
    for (const auto& p : probe.members()) {
        if (!p.true_match || !gallery.contains(*p.true_match)) {
            throw EvaluationError(fmt::format("probe '{}' has no true match in the gallery", p.id));
        }
    }
    FlowSet p = probe;
    FlowSet g = gallery;
    if (config.split_velocity) {
        p = split_by_velocity(probe, config.angle_threshold, config.speed_tolerance);
        g = split_by_velocity(gallery, config.angle_threshold, config.speed_tolerance);
    }
    const KeySet keys = union_key_sets(bank, p, config);
    const Reranker reranker(p, g, bank, keys, config);

    const auto members = p.members();
    std::vector<std::size_t> base_ranks(members.size());
    std::vector<std::size_t> key_ranks(members.size());
    parallel_for(members.size(), jobs, [&](std::size_t i) {
        const auto& q = members[i];
        base_ranks[i] = rank_of_true_match(reranker.baseline(q.id), *q.true_match);
        key_ranks[i] = rank_of_true_match(reranker.rerank(q.id).ranking, *q.true_match);
    });

    TrialOutcome out;
    out.test_size = members.size();
    out.n_keys = keys.keys.size();
    out.baseline = cmc_curve(base_ranks, g.size());
    out.key_aided = cmc_curve(key_ranks, g.size());
    return out;
}

std::vector<std::string> trial_split(const FlowSet& probe, const FlowSet& gallery, double split,
                                     std::uint64_t trial_seed) {
    if (!(split > 0.0 && split <= 1.0)) {
        throw ParameterError(fmt::format("split must lie in (0, 1], got {}", split));
    }
    std::vector<std::string> identities;
    for (const auto& p : probe.members()) {
        if (p.true_match && gallery.contains(*p.true_match)) identities.push_back(p.id);
    }
    if (identities.empty()) throw EvaluationError("no probe has a true match in the gallery");

    const auto wanted = static_cast<std::size_t>(std::llround(split * static_cast<double>(identities.size())));
    const std::size_t count = std::clamp<std::size_t>(wanted, 1, identities.size());
    std::vector<std::size_t> order(identities.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(trial_seed);
    rng.shuffle(order);
    order.resize(count);
    std::sort(order.begin(), order.end());

    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i : order) out.push_back(identities[i]);
    return out;
}

TrialSummary run_trials(const Dataset& dataset, const FeatureBank& bank, const PipelineConfig& config,
                        const TrialOptions& options) {
    if (options.num_trials < 1) throw ParameterError("at least one trial is required");
    if (!(options.split > 0.0 && options.split <= 1.0)) {
        throw ParameterError(fmt::format("split must lie in (0, 1], got {}", options.split));
    }

    TrialSummary summary;
    summary.trials.resize(options.num_trials);
    // Trials are spread over the workers; a single trial spreads its queries instead.
    const std::size_t trial_jobs = options.num_trials > 1 ? options.jobs : 1;
    const std::size_t query_jobs = options.num_trials > 1 ? 1 : options.jobs;
    parallel_for(options.num_trials, trial_jobs, [&](std::size_t t) {
        const std::uint64_t seed = derive_seed(options.seed, t);
        const auto probe_ids = trial_split(dataset.probe, dataset.gallery, options.split, seed);
        std::vector<std::string> gallery_ids;
        gallery_ids.reserve(probe_ids.size());
        for (const auto& id : probe_ids) gallery_ids.push_back(*dataset.probe.at(id).true_match);

        const FlowSet probe = dataset.probe.restricted_to(probe_ids);
        const FlowSet gallery = dataset.gallery.restricted_to(gallery_ids);
        TrialOutcome outcome = evaluate(probe, gallery, bank, config, query_jobs);
        outcome.seed = seed;
        summary.trials[t] = std::move(outcome);
    });

    std::vector<CMCCurve> base;
    std::vector<CMCCurve> keyed;
    for (const auto& t : summary.trials) {
        base.push_back(t.baseline);
        keyed.push_back(t.key_aided);
    }
    summary.baseline = average_curves(base);
    summary.key_aided = average_curves(keyed);
    return summary;
}

std::string compare_table(std::span<const NamedCurve> curves, std::span<const std::size_t> ranks) {
    std::string out = "method";
    for (std::size_t r : ranks) out += fmt::format(" r{}", r);
    out += '\n';
    if (ranks.empty()) return out;
    for (const auto& named : curves) {
        out += named.name;
        for (std::size_t r : ranks) out += fmt::format(" {:.1f}", 100.0 * named.curve.at(r));
        out += '\n';
    }
    return out;
}

}  // namespace keyreid
