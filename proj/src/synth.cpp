// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "keyreid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "keyreid/error.hpp"
#include "keyreid/random.hpp"

namespace keyreid {

namespace {

// Seed streams, kept apart so each part of the generator is reproducible on its own.
constexpr std::uint64_t kArrivalStream = 1;
constexpr std::uint64_t kTransitStream = 2;
constexpr std::uint64_t kVelocityStream = 3;
constexpr std::uint64_t kGalleryIdStream = 4;
constexpr std::uint64_t kBaseStream = 100;   // + feature index
constexpr std::uint64_t kNoiseStream = 200;  // + feature index

constexpr double kOutlierMinRadius = 10.0;  // x cluster_spread
constexpr double kOutlierRadiusRange = 10.0;
constexpr double kHeadingNoiseDeg = 10.0;
constexpr double kMinSpeed = 0.05;

bool is_fraction(double v) { return v >= 0.0 && v <= 1.0; }

std::vector<double> gaussian_vector(Rng& rng, std::size_t dim, double scale) {
    std::vector<double> v(dim);
    for (double& x : v) x = scale * rng.normal();
    return v;
}

}  // namespace

void SynthParams::validate() const {
    if (num_identities < 4) throw ParameterError("num_identities must be at least 4");
    if (num_features < 1) throw ParameterError("num_features must be at least 1");
    if (dims.empty() || (dims.size() != 1 && dims.size() != num_features)) {
        throw ParameterError("dims needs one entry per feature or a single shared entry");
    }
    for (std::size_t d : dims) {
        if (d < 1) throw ParameterError("every feature dimension must be at least 1");
    }
    if (!feature_names.empty() && feature_names.size() != num_features) {
        throw ParameterError("feature_names needs one entry per feature");
    }
    if (!is_fraction(salient_fraction)) throw ParameterError("salient_fraction must lie in [0, 1]");
    if (!is_fraction(direction_split)) throw ParameterError("direction_split must lie in [0, 1]");
    if (!(cluster_spread > 0.0)) throw ParameterError("cluster_spread must be > 0");
    if (!(cross_view_noise >= 0.0)) throw ParameterError("cross_view_noise must be >= 0");
    if (!(arrival_rate > 0.0)) throw ParameterError("arrival_rate must be > 0");
    if (!(transit_mean >= 0.0)) throw ParameterError("transit_mean must be >= 0");
    if (!(transit_jitter >= 0.0)) throw ParameterError("transit_jitter must be >= 0");
    if (!(speed_spread >= 0.0)) throw ParameterError("speed_spread must be >= 0");
    if (require_salient &&
        std::llround(salient_fraction * static_cast<double>(num_identities)) < 1) {
        throw ParameterError(fmt::format("salient_fraction {} plants no outlier among {} identities",
                                         salient_fraction, num_identities));
    }
}

std::size_t SynthParams::dim_of(std::size_t feature) const {
    return dims.size() == 1 ? dims.front() : dims.at(feature);
}

std::string SynthParams::name_of(std::size_t feature) const {
    if (!feature_names.empty()) return feature_names.at(feature);
    static const char* const defaults[] = {"GOG", "DNS", "SDALF"};
    return feature < 3 ? defaults[feature] : fmt::format("F{}", feature + 1);
}

SyntheticFlow generate_flow(const SynthParams& params) {
    params.validate();
    const std::size_t n = params.num_identities;

    std::vector<std::string> probe_ids(n);
    for (std::size_t i = 0; i < n; ++i) probe_ids[i] = fmt::format("p{:04d}", i);

    std::vector<std::size_t> gallery_number(n);
    for (std::size_t i = 0; i < n; ++i) gallery_number[i] = i;
    Rng id_rng(derive_seed(params.seed, kGalleryIdStream));
    id_rng.shuffle(gallery_number);
    std::vector<std::string> gallery_ids(n);
    for (std::size_t i = 0; i < n; ++i) gallery_ids[i] = fmt::format("g{:04d}", gallery_number[i]);

    // Entering frames: cumulative arrivals in A, A + transit in B.
    Rng arrival_rng(derive_seed(params.seed, kArrivalStream));
    Rng transit_rng(derive_seed(params.seed, kTransitStream));
    std::vector<std::int64_t> frame_a(n);
    std::vector<std::int64_t> frame_b(n);
    double clock = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        clock += arrival_rng.exponential(params.arrival_rate);
        frame_a[i] = std::llround(clock);
        const double transit = std::max(0.0, params.transit_mean + params.transit_jitter * transit_rng.normal());
        frame_b[i] = frame_a[i] + std::llround(transit);
    }

    Rng velocity_rng(derive_seed(params.seed, kVelocityStream));
    std::vector<Vec2> velocity(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool forward = velocity_rng.uniform() < params.direction_split;
        const double heading = (forward ? 0.0 : std::numbers::pi) +
                               kHeadingNoiseDeg * std::numbers::pi / 180.0 * velocity_rng.normal();
        const double speed = std::max(kMinSpeed, 1.0 + params.speed_spread * velocity_rng.normal());
        velocity[i] = {speed * std::cos(heading), speed * std::sin(heading)};
    }

    SyntheticFlow out;
    out.bank.baseline = params.name_of(0);
    const auto n_outliers = static_cast<std::size_t>(
        std::llround(params.salient_fraction * static_cast<double>(n)));
    for (std::size_t m = 0; m < params.num_features; ++m) {
        const std::size_t dim = params.dim_of(m);
        const double coord_scale = 1.0 / std::sqrt(static_cast<double>(dim));
        Rng base_rng(derive_seed(params.seed, kBaseStream + m));
        Rng noise_rng(derive_seed(params.seed, kNoiseStream + m));

        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        base_rng.shuffle(order);
        std::vector<bool> outlier(n, false);
        for (std::size_t i = 0; i < n_outliers; ++i) outlier[order[i]] = true;

        FeatureSpace space;
        space.name = params.name_of(m);
        space.dim = dim;
        space.metric = Metric::euclidean;
        space.rho = 0.5;
        auto& table_a = space.embeddings["A"];
        auto& table_b = space.embeddings["B"];
        std::vector<std::string> planted;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> base;
            if (outlier[i]) {
                base = gaussian_vector(base_rng, dim, 1.0);
                double norm = 0.0;
                for (double x : base) norm += x * x;
                norm = std::sqrt(norm);
                const double radius =
                    params.cluster_spread * (kOutlierMinRadius + kOutlierRadiusRange * base_rng.uniform());
                for (double& x : base) x *= radius / norm;
                planted.push_back(probe_ids[i]);
            } else {
                base = gaussian_vector(base_rng, dim, params.cluster_spread * coord_scale);
            }
            std::vector<double> view_a = base;
            std::vector<double> view_b = base;
            for (double& x : view_a) x += params.cross_view_noise * coord_scale * noise_rng.normal();
            for (double& x : view_b) x += params.cross_view_noise * coord_scale * noise_rng.normal();
            table_a.emplace(probe_ids[i], std::move(view_a));
            table_b.emplace(gallery_ids[i], std::move(view_b));
        }
        std::sort(planted.begin(), planted.end());
        out.outliers.push_back(std::move(planted));
        out.bank.spaces.push_back(std::move(space));
    }

    std::vector<PedestrianRecord> probe_records;
    std::vector<PedestrianRecord> gallery_records;
    for (std::size_t i = 0; i < n; ++i) {
        probe_records.push_back({probe_ids[i], "A", frame_a[i], velocity[i], gallery_ids[i]});
        gallery_records.push_back({gallery_ids[i], "B", frame_b[i], velocity[i], probe_ids[i]});
        out.truth.emplace(probe_ids[i], gallery_ids[i]);
    }
    out.probe = FlowSet("A", std::move(probe_records));
    out.gallery = FlowSet("B", std::move(gallery_records));
    return out;
}

double order_inversion_rate(const FlowSet& probe, const FlowSet& gallery, const GroundTruth& truth) {
    struct Pair {
        std::int64_t a;
        std::int64_t b;
        std::size_t group;
    };
    std::vector<Pair> known;
    for (const auto& p : probe.members()) {
        auto it = truth.find(p.id);
        if (it == truth.end() || !gallery.contains(it->second)) continue;
        const auto subset = probe.subset_of(p.id);
        known.push_back({p.entering_frame, gallery.at(it->second).entering_frame, subset.value_or(0)});
    }
    auto sign = [](std::int64_t v) { return (v > 0) - (v < 0); };
    std::size_t pairs = 0;
    std::size_t inverted = 0;
    for (std::size_t i = 0; i < known.size(); ++i) {
        for (std::size_t j = i + 1; j < known.size(); ++j) {
            if (known[i].group != known[j].group) continue;
            ++pairs;
            if (sign(known[i].a - known[j].a) != sign(known[i].b - known[j].b)) ++inverted;
        }
    }
    return pairs == 0 ? 0.0 : static_cast<double>(inverted) / static_cast<double>(pairs);
}

}  // namespace keyreid
