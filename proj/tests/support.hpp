// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

// Fixture builders and brute-force reference computations shared by the tests.
// The reference functions deliberately avoid the library's distance, sorting
// and normalization code so that agreement is evidence, not tautology.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "keyreid/types.hpp"

namespace keyreid::test {

inline double ref_distance(Metric metric, const std::vector<double>& a, const std::vector<double>& b) {
    if (metric == Metric::euclidean) {
        long double s = 0.0L;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const long double d = static_cast<long double>(a[i]) - b[i];
            s += d * d;
        }
        return static_cast<double>(std::sqrt(s));
    }
    long double dot = 0.0L, na = 0.0L, nb = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<long double>(a[i]) * b[i];
        na += static_cast<long double>(a[i]) * a[i];
        nb += static_cast<long double>(b[i]) * b[i];
    }
    if (na == 0.0L || nb == 0.0L) return 1.0;
    const long double d = 1.0L - dot / (std::sqrt(na) * std::sqrt(nb));
    return static_cast<double>(std::clamp(d, 0.0L, 2.0L));
}

/// Mean distance to the k nearest other members: full sort of every distance.
inline double ref_knn_mean(const FeatureSpace& space, const std::string& camera,
                           const std::vector<std::string>& ids, const std::string& person, std::size_t k) {
    const auto& table = space.embeddings.at(camera);
    std::vector<double> d;
    for (const auto& other : ids) {
        if (other == person) continue;
        d.push_back(ref_distance(space.metric, table.at(person), table.at(other)));
    }
    std::sort(d.begin(), d.end());
    long double sum = 0.0L;
    for (std::size_t i = 0; i < k; ++i) sum += d[i];
    return static_cast<double>(sum / static_cast<long double>(k));
}

inline std::map<std::string, double> ref_saliency(const FeatureSpace& space, const std::string& camera,
                                                  const std::vector<std::string>& ids, std::size_t k) {
    std::map<std::string, double> raw;
    for (const auto& id : ids) raw[id] = ref_knn_mean(space, camera, ids, id, k);
    double lo = raw.begin()->second, hi = lo;
    for (const auto& [id, v] : raw) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::map<std::string, double> out;
    for (const auto& [id, v] : raw) out[id] = hi - lo <= 1e-12 * std::max(1.0, std::abs(hi)) ? 0.0 : (v - lo) / (hi - lo);
    return out;
}

/// accuracy[r-1] = |{rank <= r}| / |ranks|, counted directly for every r.
inline std::vector<double> ref_cmc(const std::vector<std::size_t>& ranks, std::size_t gallery) {
    std::vector<double> out;
    for (std::size_t r = 1; r <= gallery; ++r) {
        std::size_t hits = 0;
        for (std::size_t x : ranks) hits += x <= r ? 1 : 0;
        out.push_back(static_cast<double>(hits) / static_cast<double>(ranks.size()));
    }
    return out;
}

inline std::string id_of(char prefix, std::size_t i) {
    std::string s(1, prefix);
    s += std::to_string(1000 + i).substr(1);
    return s;
}

/// One-dimensional euclidean space holding `values` under camera "A", ids a000...
inline FeatureSpace line_space(const std::vector<double>& values, const std::string& name = "F") {
    FeatureSpace space;
    space.name = name;
    space.dim = 1;
    for (std::size_t i = 0; i < values.size(); ++i) space.embeddings["A"][id_of('a', i)] = {values[i]};
    return space;
}

inline FlowSet line_flow(std::size_t n) {
    std::vector<PedestrianRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
        records.push_back({id_of('a', i), "A", static_cast<std::int64_t>(10 * i), {1.0, 0.0}, std::nullopt});
    }
    return FlowSet("A", std::move(records));
}

/// Random cross-camera instance: probe "A" (a000...), gallery "B" (b000...),
/// identity i in A matches identity i in B.
struct RandomInstance {
    FlowSet probe;
    FlowSet gallery;
    FeatureBank bank;
};

struct InstanceShape {
    std::size_t n = 20;
    std::size_t features = 2;
    std::size_t dim = 4;
    bool two_directions = false;
    bool with_matrix = false;
    bool mixed_metrics = true;
    double noise = 0.3;
    std::int64_t max_gap = 40;
};

inline RandomInstance random_instance(std::mt19937_64& gen, const InstanceShape& shape) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<std::int64_t> gap(0, shape.max_gap);
    std::uniform_int_distribution<std::int64_t> transit(50, 150);
    std::bernoulli_distribution coin(0.5);

    RandomInstance out;
    std::vector<PedestrianRecord> a, b;
    std::int64_t t = 0;
    for (std::size_t i = 0; i < shape.n; ++i) {
        t += gap(gen);
        const double dir = shape.two_directions && coin(gen) ? -1.0 : 1.0;
        const Vec2 v{dir * (1.0 + 0.1 * normal(gen)), 0.1 * normal(gen)};
        a.push_back({id_of('a', i), "A", t, v, id_of('b', i)});
        b.push_back({id_of('b', i), "B", t + transit(gen), v, id_of('a', i)});
    }
    for (std::size_t m = 0; m < shape.features; ++m) {
        FeatureSpace space;
        space.name = "F" + std::to_string(m);
        space.dim = shape.dim;
        space.metric = shape.mixed_metrics && coin(gen) ? Metric::cosine : Metric::euclidean;
        space.rho = 0.7;
        for (std::size_t i = 0; i < shape.n; ++i) {
            std::vector<double> base(shape.dim), va(shape.dim), vb(shape.dim);
            for (auto& x : base) x = normal(gen);
            for (std::size_t c = 0; c < shape.dim; ++c) {
                va[c] = base[c] + shape.noise * normal(gen);
                vb[c] = base[c] + shape.noise * normal(gen);
            }
            space.embeddings["A"][id_of('a', i)] = va;
            space.embeddings["B"][id_of('b', i)] = vb;
        }
        out.bank.spaces.push_back(std::move(space));
    }
    out.bank.baseline = out.bank.spaces.front().name;
    if (shape.with_matrix) {
        std::uniform_real_distribution<double> u(0.0, 10.0);
        std::vector<std::string> pids, gids;
        for (const auto& r : a) pids.push_back(r.id);
        for (const auto& r : b) gids.push_back(r.id);
        std::vector<double> values(pids.size() * gids.size());
        for (auto& v : values) v = u(gen);
        out.bank.baseline_matrix = ScoreMatrix(pids, gids, values);
    }
    out.probe = FlowSet("A", std::move(a));
    out.gallery = FlowSet("B", std::move(b));
    return out;
}

}  // namespace keyreid::test
