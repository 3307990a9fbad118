// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace keyreid {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double norm() const { return std::hypot(x, y); }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    Vec2 operator-() const { return {-x, -y}; }
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// One pedestrian as seen by one camera. `entering_frame` is the frame index
/// at which the person first appears; `velocity` is a single representative
/// vector for the whole track.
struct PedestrianRecord {
    std::string id;
    std::string camera;
    std::int64_t entering_frame = 0;
    Vec2 velocity;
    std::optional<std::string> true_match;

    friend bool operator==(const PedestrianRecord&, const PedestrianRecord&) = default;
};

enum class Metric { euclidean, cosine };

std::string_view metric_name(Metric metric);
Metric parse_metric(std::string_view text);

using Embedding = std::vector<double>;
using EmbeddingTable = std::map<std::string, Embedding, std::less<>>;

/// A named embedding space with one table per camera. The invariants (vector
/// length equals `dim`, finite entries, finite rho >= 0) are checked by
/// validate_inputs rather than enforced on construction, so that a defective
/// bank can still be loaded and reported on.
struct FeatureSpace {
    std::string name;
    std::size_t dim = 0;
    Metric metric = Metric::euclidean;
    double rho = 0.9;
    std::map<std::string, EmbeddingTable, std::less<>> embeddings;  // camera -> table

    bool has_embedding(std::string_view camera, std::string_view id) const;
    /// Throws ValidationError when the embedding is absent or has the wrong length.
    const Embedding& embedding(std::string_view camera, std::string_view id) const;

    friend bool operator==(const FeatureSpace&, const FeatureSpace&) = default;
};

/// Probe x gallery dissimilarities, row-major. Lower means more similar.
class ScoreMatrix {
public:
    ScoreMatrix() = default;
    ScoreMatrix(std::vector<std::string> probe_ids, std::vector<std::string> gallery_ids,
                std::vector<double> values);

    const std::vector<std::string>& probe_ids() const { return probe_ids_; }
    const std::vector<std::string>& gallery_ids() const { return gallery_ids_; }
    std::size_t rows() const { return probe_ids_.size(); }
    std::size_t cols() const { return gallery_ids_.size(); }

    double at(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }
    double at(std::string_view probe_id, std::string_view gallery_id) const;
    std::span<const double> row(std::size_t r) const {
        return {values_.data() + r * cols(), cols()};
    }
    const std::vector<double>& values() const { return values_; }

    friend bool operator==(const ScoreMatrix& a, const ScoreMatrix& b) {
        return a.probe_ids_ == b.probe_ids_ && a.gallery_ids_ == b.gallery_ids_ &&
               a.values_ == b.values_;
    }

private:
    std::vector<std::string> probe_ids_;
    std::vector<std::string> gallery_ids_;
    std::vector<double> values_;
    std::map<std::string, std::size_t, std::less<>> probe_index_;
    std::map<std::string, std::size_t, std::less<>> gallery_index_;
};

struct FeatureBank {
    std::vector<FeatureSpace> spaces;
    std::string baseline;
    /// When set, baseline dissimilarities come from this matrix instead of the
    /// baseline space's metric (e.g. a learned metric computed elsewhere).
    std::optional<ScoreMatrix> baseline_matrix;

    std::optional<std::size_t> index_of(std::string_view name) const;
    const FeatureSpace& space(std::string_view name) const;
    const FeatureSpace& baseline_space() const { return space(baseline); }

    friend bool operator==(const FeatureBank&, const FeatureBank&) = default;
};

struct VelocitySubset {
    std::string label;
    Vec2 main_velocity;
    std::vector<std::string> member_ids;  // in parent flow order
    bool stationary = false;

    friend bool operator==(const VelocitySubset&, const VelocitySubset&) = default;
};

/// A camera's pedestrians ordered by entering frame (ties keep input order),
/// optionally partitioned into velocity subsets.
class FlowSet {
public:
    FlowSet() = default;
    /// Stable-sorts by entering frame. Throws InputError on duplicate ids or
    /// records from another camera.
    FlowSet(std::string camera, std::vector<PedestrianRecord> records);

    const std::string& camera() const { return camera_; }
    std::span<const PedestrianRecord> members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    std::vector<std::string> ids() const;

    bool contains(std::string_view id) const;
    std::size_t position(std::string_view id) const;
    const PedestrianRecord& at(std::string_view id) const;

    bool has_subsets() const { return !subsets_.empty(); }
    const std::vector<VelocitySubset>& subsets() const { return subsets_; }
    /// Index of the subset holding `id`; nullopt when the flow is unsplit.
    std::optional<std::size_t> subset_of(std::string_view id) const;

    /// Copy of this flow carrying `subsets`, which must partition the members.
    FlowSet with_subsets(std::vector<VelocitySubset> subsets) const;
    /// Flow restricted to `ids` (unsplit), preserving relative order.
    FlowSet restricted_to(std::span<const std::string> ids) const;

    friend bool operator==(const FlowSet& a, const FlowSet& b) {
        return a.camera_ == b.camera_ && a.members_ == b.members_ && a.subsets_ == b.subsets_;
    }

private:
    std::string camera_;
    std::vector<PedestrianRecord> members_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<VelocitySubset> subsets_;
    std::vector<std::size_t> subset_of_member_;
};

struct ScoredId {
    std::string id;
    double score = 0.0;

    friend bool operator==(const ScoredId&, const ScoredId&) = default;
};

struct KeyEntry {
    std::string id;
    std::string feature;  // feature with the highest saliency for this person
    double score = 0.0;

    friend bool operator==(const KeyEntry&, const KeyEntry&) = default;
};

struct KeySet {
    std::vector<std::pair<std::string, std::vector<ScoredId>>> per_feature;  // bank order
    std::vector<KeyEntry> keys;  // union, descending score then ascending id

    bool empty() const { return keys.empty(); }
    const KeyEntry* find(std::string_view id) const;
};

enum class WeightCombine { min, max, product };
enum class SaliencyScope { global, subset };

std::string_view combine_name(WeightCombine combine);
std::string_view scope_name(SaliencyScope scope);

/// How probe-side velocity subsets are paired with gallery-side ones.
/// `identity` pairs by maximal cosine similarity of main velocities, `negate`
/// does the same against the negated gallery velocities, `table` maps subset
/// labels explicitly.
struct DirectionMap {
    enum class Mode { identity, negate, table };
    Mode mode = Mode::identity;
    std::vector<std::pair<std::string, std::string>> table;

    friend bool operator==(const DirectionMap&, const DirectionMap&) = default;
};

struct PipelineConfig {
    std::size_t k_nn = 5;
    std::map<std::string, double, std::less<>> rho_per_feature;
    double tau = 0.3;
    std::size_t num_keys = 4;
    double angle_threshold = 45.0;  // degrees
    double speed_tolerance = 1.0;   // units / frame
    DirectionMap direction_map;
    WeightCombine weight_combine = WeightCombine::min;
    std::string baseline_feature;  // empty: the bank's own baseline
    bool split_velocity = true;
    SaliencyScope saliency_scope = SaliencyScope::global;
    std::uint64_t seed = 1;

    /// Throws ConfigError naming the first out-of-range field.
    void validate() const;
    double rho_for(const FeatureSpace& space) const;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

}  // namespace keyreid
