// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "keyreid/validate.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

namespace keyreid {

std::string_view issue_kind_name(ValidationIssue::Kind kind) {
    using K = ValidationIssue::Kind;
    switch (kind) {
        case K::missing_embedding: return "missing-embedding";
        case K::dimension_mismatch: return "dimension-mismatch";
        case K::non_finite: return "non-finite";
        case K::duplicate_id: return "duplicate-id";
        case K::duplicate_feature: return "duplicate-feature";
        case K::bad_baseline: return "bad-baseline";
        case K::rho_out_of_range: return "rho-out-of-range";
        case K::unknown_true_match: return "unknown-true-match";
        case K::missing_baseline_score: return "missing-baseline-score";
        case K::orphan_embedding: return "orphan-embedding";
    }
    return "issue";
}

namespace {

using Kind = ValidationIssue::Kind;

void check_records(std::span<const PedestrianRecord> records, const FeatureBank& bank,
                   std::vector<ValidationIssue>& issues) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : records) {
        if (!seen.emplace(r.camera, r.id).second) {
            issues.push_back({Kind::duplicate_id, "", r.camera, r.id,
                              fmt::format("duplicate id '{}' in camera '{}'", r.id, r.camera)});
        }
    }
    for (const auto& space : bank.spaces) {
        for (const auto& r : records) {
            auto table = space.embeddings.find(r.camera);
            if (table == space.embeddings.end() || !table->second.contains(r.id)) {
                issues.push_back({Kind::missing_embedding, space.name, r.camera, r.id,
                                  fmt::format("'{}' (camera '{}') has no embedding in feature '{}'", r.id,
                                              r.camera, space.name)});
            }
        }
    }
}

}  // namespace

ValidationReport validate_inputs(const FeatureBank& bank, std::span<const PedestrianRecord> probe,
                                 std::span<const PedestrianRecord> gallery) {
    ValidationReport report;
    auto& issues = report.issues;

    std::set<std::string> names;
    for (const auto& space : bank.spaces) {
        if (!names.insert(space.name).second) {
            issues.push_back({Kind::duplicate_feature, space.name, "", "",
                              fmt::format("feature name '{}' appears twice in the bank", space.name)});
        }
        if (!(space.rho >= 0.0) || !std::isfinite(space.rho)) {
            issues.push_back({Kind::rho_out_of_range, space.name, "", "",
                              fmt::format("rho of feature '{}' is {}, not a finite value >= 0", space.name, space.rho)});
        }
        for (const auto& [camera, table] : space.embeddings) {
            for (const auto& [id, vec] : table) {
                if (vec.size() != space.dim) {
                    issues.push_back({Kind::dimension_mismatch, space.name, camera, id,
                                      fmt::format("'{}' (camera '{}') has length {} in feature '{}' of dim {}",
                                                  id, camera, vec.size(), space.name, space.dim)});
                }
                for (double v : vec) {
                    if (!std::isfinite(v)) {
                        issues.push_back({Kind::non_finite, space.name, camera, id,
                                          fmt::format("'{}' (camera '{}') has a non-finite entry in feature '{}'",
                                                      id, camera, space.name)});
                        break;
                    }
                }
            }
        }
    }
    if (bank.spaces.empty() || !bank.index_of(bank.baseline)) {
        issues.push_back({Kind::bad_baseline, bank.baseline, "", "",
                          fmt::format("baseline '{}' does not name a feature in the bank", bank.baseline)});
    }

    check_records(probe, bank, issues);
    check_records(gallery, bank, issues);

    // Every embedding of a camera in use must belong to a metadata record.
    std::set<std::pair<std::string, std::string>> known;
    for (const auto& r : probe) known.emplace(r.camera, r.id);
    for (const auto& r : gallery) known.emplace(r.camera, r.id);
    std::set<std::string> cameras;
    for (const auto& [camera, id] : known) cameras.insert(camera);
    for (const auto& space : bank.spaces) {
        for (const auto& [camera, table] : space.embeddings) {
            if (!cameras.contains(camera)) continue;
            for (const auto& [id, vec] : table) {
                if (!known.contains({camera, id})) {
                    issues.push_back({Kind::orphan_embedding, space.name, camera, id,
                                      fmt::format("embedding '{}' (camera '{}', feature '{}') has no metadata record",
                                                  id, camera, space.name)});
                }
            }
        }
    }

    std::set<std::string> gallery_ids;
    for (const auto& g : gallery) gallery_ids.insert(g.id);
    for (const auto& p : probe) {
        if (p.true_match && !gallery_ids.contains(*p.true_match)) {
            issues.push_back({Kind::unknown_true_match, "", p.camera, p.id,
                              fmt::format("true match '{}' of '{}' is not in the gallery", *p.true_match, p.id)});
        }
    }

    if (bank.baseline_matrix) {
        const auto& m = *bank.baseline_matrix;
        std::set<std::string> rows(m.probe_ids().begin(), m.probe_ids().end());
        std::set<std::string> cols(m.gallery_ids().begin(), m.gallery_ids().end());
        for (const auto& p : probe) {
            if (!rows.contains(p.id)) {
                issues.push_back({Kind::missing_baseline_score, "", p.camera, p.id,
                                  fmt::format("probe '{}' has no row in the baseline matrix", p.id)});
            }
        }
        for (const auto& g : gallery) {
            if (!cols.contains(g.id)) {
                issues.push_back({Kind::missing_baseline_score, "", g.camera, g.id,
                                  fmt::format("gallery '{}' has no column in the baseline matrix", g.id)});
            }
        }
    }
    return report;
}

ValidationReport validate_inputs(const FeatureBank& bank, const FlowSet& probe, const FlowSet& gallery) {
    return validate_inputs(bank, probe.members(), gallery.members());
}

}  // namespace keyreid
