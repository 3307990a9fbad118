// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "keyreid/error.hpp"
#include "keyreid/types.hpp"

namespace keyreid {

std::string_view category_name(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::parameter: return "parameter";
        case ErrorCategory::not_found: return "not-found";
        case ErrorCategory::validation: return "validation";
        case ErrorCategory::input: return "input";
        case ErrorCategory::config: return "config";
        case ErrorCategory::io: return "io";
        case ErrorCategory::evaluation: return "evaluation";
    }
    return "error";
}

std::string_view metric_name(Metric metric) {
    return metric == Metric::cosine ? "cosine" : "euclidean";
}

Metric parse_metric(std::string_view text) {
    if (text == "euclidean") return Metric::euclidean;
    if (text == "cosine") return Metric::cosine;
    throw ConfigError(fmt::format("unknown metric '{}' (expected euclidean or cosine)", text));
}

std::string_view combine_name(WeightCombine combine) {
    switch (combine) {
        case WeightCombine::min: return "min";
        case WeightCombine::max: return "max";
        case WeightCombine::product: return "product";
    }
    return "min";
}

std::string_view scope_name(SaliencyScope scope) {
    return scope == SaliencyScope::subset ? "subset" : "global";
}

// ---------------------------------------------------------------------------
// FeatureSpace / FeatureBank

bool FeatureSpace::has_embedding(std::string_view camera, std::string_view id) const {
    auto table = embeddings.find(camera);
    return table != embeddings.end() && table->second.find(id) != table->second.end();
}

const Embedding& FeatureSpace::embedding(std::string_view camera, std::string_view id) const {
    auto table = embeddings.find(camera);
    if (table == embeddings.end()) {
        throw ValidationError(
            fmt::format("feature '{}' has no embedding table for camera '{}'", name, camera));
    }
    auto it = table->second.find(id);
    if (it == table->second.end()) {
        throw ValidationError(
            fmt::format("missing embedding for '{}' (camera '{}') in feature '{}'", id, camera, name));
    }
    if (it->second.size() != dim) {
        throw ValidationError(fmt::format("embedding for '{}' in feature '{}' has length {}, expected {}",
                                          id, name, it->second.size(), dim));
    }
    return it->second;
}

std::optional<std::size_t> FeatureBank::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < spaces.size(); ++i) {
        if (spaces[i].name == name) return i;
    }
    return std::nullopt;
}

const FeatureSpace& FeatureBank::space(std::string_view name) const {
    auto idx = index_of(name);
    if (!idx) throw NotFoundError(fmt::format("feature space '{}' is not in the bank", name));
    return spaces[*idx];
}

// ---------------------------------------------------------------------------
// ScoreMatrix

ScoreMatrix::ScoreMatrix(std::vector<std::string> probe_ids, std::vector<std::string> gallery_ids,
                         std::vector<double> values)
    : probe_ids_(std::move(probe_ids)),
      gallery_ids_(std::move(gallery_ids)),
      values_(std::move(values)) {
    if (values_.size() != probe_ids_.size() * gallery_ids_.size()) {
        throw ParameterError(fmt::format("score matrix holds {} values, expected {}x{}", values_.size(),
                                         probe_ids_.size(), gallery_ids_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
            throw ValidationError(fmt::format("score matrix entry ({}, {}) = {} is not a finite non-negative value",
                                              probe_ids_[i / gallery_ids_.size()],
                                              gallery_ids_[i % gallery_ids_.size()], values_[i]));
        }
    }
    for (std::size_t i = 0; i < probe_ids_.size(); ++i) {
        if (!probe_index_.emplace(probe_ids_[i], i).second) {
            throw InputError(fmt::format("duplicate probe id '{}' in score matrix", probe_ids_[i]));
        }
    }
    for (std::size_t j = 0; j < gallery_ids_.size(); ++j) {
        if (!gallery_index_.emplace(gallery_ids_[j], j).second) {
            throw InputError(fmt::format("duplicate gallery id '{}' in score matrix", gallery_ids_[j]));
        }
    }
}

double ScoreMatrix::at(std::string_view probe_id, std::string_view gallery_id) const {
    auto r = probe_index_.find(probe_id);
    if (r == probe_index_.end()) throw NotFoundError(fmt::format("probe '{}' not in score matrix", probe_id));
    auto c = gallery_index_.find(gallery_id);
    if (c == gallery_index_.end()) {
        throw NotFoundError(fmt::format("gallery '{}' not in score matrix", gallery_id));
    }
    return at(r->second, c->second);
}

// ---------------------------------------------------------------------------
// FlowSet

FlowSet::FlowSet(std::string camera, std::vector<PedestrianRecord> records)
    : camera_(std::move(camera)), members_(std::move(records)) {
    for (const auto& r : members_) {
        if (r.camera != camera_) {
            throw InputError(
                fmt::format("record '{}' belongs to camera '{}', not '{}'", r.id, r.camera, camera_));
        }
    }
    std::stable_sort(members_.begin(), members_.end(), [](const auto& a, const auto& b) {
        return a.entering_frame < b.entering_frame;
    });
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (!index_.emplace(members_[i].id, i).second) {
            throw InputError(fmt::format("duplicate id '{}' in camera '{}'", members_[i].id, camera_));
        }
    }
}

std::vector<std::string> FlowSet::ids() const {
    std::vector<std::string> out;
    out.reserve(members_.size());
    for (const auto& m : members_) out.push_back(m.id);
    return out;
}

bool FlowSet::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

std::size_t FlowSet::position(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw NotFoundError(fmt::format("'{}' is not in the flow of camera '{}'", id, camera_));
    }
    return it->second;
}

const PedestrianRecord& FlowSet::at(std::string_view id) const { return members_[position(id)]; }

std::optional<std::size_t> FlowSet::subset_of(std::string_view id) const {
    std::size_t pos = position(id);
    if (subsets_.empty()) return std::nullopt;
    return subset_of_member_[pos];
}

FlowSet FlowSet::with_subsets(std::vector<VelocitySubset> subsets) const {
    FlowSet out = *this;
    out.subsets_.clear();
    out.subset_of_member_.assign(members_.size(), subsets.size());
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        std::size_t last = 0;
        bool first = true;
        for (const auto& id : subsets[s].member_ids) {
            std::size_t pos = position(id);
            if (out.subset_of_member_[pos] != subsets.size()) {
                throw ParameterError(fmt::format("'{}' appears in more than one velocity subset", id));
            }
            if (!first && pos < last) {
                throw ParameterError(
                    fmt::format("velocity subset '{}' is not in flow order", subsets[s].label));
            }
            out.subset_of_member_[pos] = s;
            last = pos;
            first = false;
        }
    }
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (out.subset_of_member_[i] == subsets.size()) {
            throw ParameterError(fmt::format("'{}' is not covered by any velocity subset", members_[i].id));
        }
    }
    out.subsets_ = std::move(subsets);
    if (out.subsets_.empty()) out.subset_of_member_.clear();
    return out;
}

FlowSet FlowSet::restricted_to(std::span<const std::string> ids) const {
    std::vector<std::size_t> positions;
    positions.reserve(ids.size());
    for (const auto& id : ids) positions.push_back(position(id));
    std::sort(positions.begin(), positions.end());
    std::vector<PedestrianRecord> records;
    records.reserve(positions.size());
    for (std::size_t p : positions) records.push_back(members_[p]);
    return FlowSet(camera_, std::move(records));
}

// ---------------------------------------------------------------------------
// KeySet / PipelineConfig

const KeyEntry* KeySet::find(std::string_view id) const {
    for (const auto& k : keys) {
        if (k.id == id) return &k;
    }
    return nullptr;
}

void PipelineConfig::validate() const {
    if (k_nn < 1) throw ConfigError("k_nn must be at least 1");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be a finite value >= 0");
    if (num_keys < 1) throw ConfigError("num_keys must be at least 1");
    if (!(angle_threshold >= 0.0 && angle_threshold <= 180.0)) {
        throw ConfigError("angle_threshold must lie in [0, 180] degrees");
    }
    if (!(speed_tolerance >= 0.0)) throw ConfigError("speed_tolerance must be >= 0");
    for (const auto& [name, rho] : rho_per_feature) {
        // rho above 1 is accepted and selects no key persons.
        if (!(rho >= 0.0) || !std::isfinite(rho)) {
            throw ConfigError(fmt::format("rho.{} = {} is out of range", name, rho));
        }
    }
}

double PipelineConfig::rho_for(const FeatureSpace& space) const {
    auto it = rho_per_feature.find(space.name);
    return it != rho_per_feature.end() ? it->second : space.rho;
}

}  // namespace keyreid
