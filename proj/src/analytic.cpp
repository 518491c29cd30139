// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/denoiser.hpp"
#include "dcfg/errors.hpp"

#include <cmath>
#include <limits>

namespace dcfg {

namespace {

bool consistent(const AttributeVector& pa, const ConditionSlots& s) {
    for (int i = 0; i < s.size(); ++i)
        if (!s.is_null(i) && *s[i] != pa[static_cast<size_t>(i)]) return false;
    return true;
}

} // namespace

Vec analytic_epsilon(const GMMWorld& world, const NoiseSchedule& sched, const Vec& x_t, int t,
                     const ConditionSlots& s) {
    require(t >= 1 && t <= sched.steps(), "analytic_epsilon: t out of range");
    require(s.size() == world.attributes(), "analytic_epsilon: slot count mismatch");
    require(x_t.size() == world.dim(), "analytic_epsilon: dimension mismatch");

    const double ab = sched.alpha_bar(t);
    const double sab = sched.sqrt_alpha_bar(t);
    const double var = ab * world.sigma0() * world.sigma0() + (1.0 - ab);
    const auto& comps = world.components();

    // Log-sum-exp responsibilities over the consistent components.
    thread_local std::vector<double> logw;
    thread_local std::vector<int> idx;
    logw.clear();
    idx.clear();
    double top = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < comps.size(); ++j) {
        if (!consistent(comps[j].pa, s)) continue;
        double lw = std::log(comps[j].prior) - (x_t - sab * comps[j].mean).squaredNorm() / (2.0 * var);
        logw.push_back(lw);
        idx.push_back(static_cast<int>(j));
        top = std::max(top, lw);
    }
    if (idx.empty()) throw ConfigError("analytic_epsilon: condition " + s.to_string() + " has zero probability");

    Vec acc = Vec::Zero(x_t.size());
    double total = 0.0;
    for (size_t k = 0; k < idx.size(); ++k) {
        double r = std::exp(logw[k] - top);
        total += r;
        acc += r * (x_t - sab * comps[static_cast<size_t>(idx[k])].mean);
    }
    return (sched.sqrt_one_minus_alpha_bar(t) / (var * total)) * acc;
}

} // namespace dcfg
