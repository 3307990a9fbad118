// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "keyreid/types.hpp"

namespace keyreid {

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// 1 - cos(a, b), clamped to [0, 2]. A zero-norm operand has distance 1.
double cosine_distance(std::span<const double> a, std::span<const double> b);

double distance(Metric metric, std::span<const double> a, std::span<const double> b);

/// Row-major copy of the embeddings of `ids` from one camera table, so that
/// inner loops run over contiguous memory.
class DenseEmbeddings {
public:
    DenseEmbeddings(const FeatureSpace& space, std::string_view camera,
                    std::span<const std::string> ids);

    std::size_t size() const { return count_; }
    std::size_t dim() const { return dim_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

private:
    std::size_t count_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

}  // namespace keyreid
