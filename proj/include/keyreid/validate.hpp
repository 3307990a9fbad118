// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "keyreid/types.hpp"

namespace keyreid {

struct ValidationIssue {
    enum class Kind {
        missing_embedding,
        dimension_mismatch,
        non_finite,
        duplicate_id,
        duplicate_feature,
        bad_baseline,
        rho_out_of_range,
        unknown_true_match,
        missing_baseline_score,
        orphan_embedding,
    };
    Kind kind;
    std::string feature;  // empty when not feature specific
    std::string camera;
    std::string id;
    std::string message;
};

std::string_view issue_kind_name(ValidationIssue::Kind kind);

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool passed() const { return issues.empty(); }
};

/// Lists every defect of the bank relative to the two record sets. Never
/// throws; an empty report means the inputs can be fed to the pipeline.
ValidationReport validate_inputs(const FeatureBank& bank, std::span<const PedestrianRecord> probe,
                                 std::span<const PedestrianRecord> gallery);

ValidationReport validate_inputs(const FeatureBank& bank, const FlowSet& probe, const FlowSet& gallery);

}  // namespace keyreid
