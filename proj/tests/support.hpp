// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/causal.hpp"
#include "dcfg/world.hpp"

#include <cmath>

namespace dcfg::test {

// a1 -> a2 (copy) -> a3 (copy), a1 ~ Bernoulli(0.5).
inline CausalGraph chain3() {
    return CausalGraph({{"a1", 2}, {"a2", 2}, {"a3", 2}}, {{"a1", "a2"}, {"a2", "a3"}}, {{"a1", {0.5, 0.5}}},
                       {{"a2", {1, {0, 1}}}, {"a3", {1, {0, 1}}}});
}

inline CausalGraph chain2() {
    return CausalGraph({{"a1", 2}, {"a2", 2}}, {{"a1", "a2"}}, {{"a1", {0.5, 0.5}}}, {{"a2", {1, {0, 1}}}});
}

inline double rel_err(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(b.norm(), 1e-12); }

} // namespace dcfg::test
