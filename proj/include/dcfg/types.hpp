// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace dcfg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Discrete attribute values, one entry per attribute in graph order.
using AttributeVector = std::vector<int>;

/// Exogenous attribute noise, one entry per attribute (0 for roots).
using ExogenousVector = std::vector<int>;

/// SplitMix64 finalizer; used to derive independent per-item seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Vec standard_normal(Rng& rng, int dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec z(dim);
    for (int i = 0; i < dim; ++i) z[i] = n(rng);
    return z;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

} // namespace dcfg
