// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#include "keyreid/distance.hpp"

#include <algorithm>
#include <cmath>

#include "keyreid/error.hpp"

namespace keyreid {

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 1.0;
    return std::clamp(1.0 - dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 2.0);
}

double distance(Metric metric, std::span<const double> a, std::span<const double> b) {
    return metric == Metric::cosine ? cosine_distance(a, b) : euclidean_distance(a, b);
}

DenseEmbeddings::DenseEmbeddings(const FeatureSpace& space, std::string_view camera,
                                 std::span<const std::string> ids)
    : count_(ids.size()), dim_(space.dim) {
    data_.reserve(count_ * dim_);
    for (const auto& id : ids) {
        const Embedding& e = space.embedding(camera, id);
        data_.insert(data_.end(), e.begin(), e.end());
    }
}

}  // namespace keyreid
