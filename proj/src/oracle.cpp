// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/oracle.hpp"

#include "dcfg/errors.hpp"

#include <cmath>
#include <numbers>

namespace dcfg::oracle {

double linear_alpha_bar(int steps, int t, double beta_min, double beta_max) {
    double prod = 1.0;
    for (int k = 1; k <= t; ++k) {
        const double beta = steps == 1 ? beta_min : beta_min + (beta_max - beta_min) * (k - 1) / (steps - 1);
        prod *= 1.0 - beta;
    }
    return prod;
}

double log_density(const GMMWorld& world, double alpha_bar, const Vec& x, const ConditionSlots& s) {
    const double var = alpha_bar * world.sigma0() * world.sigma0() + 1.0 - alpha_bar;
    const double sa = std::sqrt(alpha_bar);
    const double d = static_cast<double>(x.size());
    std::vector<double> terms;
    double norm = 0.0;
    for (const auto& c : world.components()) {
        bool ok = true;
        for (int i = 0; i < s.size(); ++i)
            if (s[i] && *s[i] != c.pa[static_cast<size_t>(i)]) ok = false;
        if (!ok || c.prior <= 0.0) continue;
        norm += c.prior;
        const double r2 = (x - sa * c.mean).squaredNorm();
        terms.push_back(std::log(c.prior) - 0.5 * r2 / var);
    }
    if (terms.empty()) throw ConfigError("condition has zero probability");
    double top = terms.front();
    for (double v : terms) top = std::max(top, v);
    double acc = 0.0;
    for (double v : terms) acc += std::exp(v - top);
    return top + std::log(acc) - std::log(norm) - 0.5 * d * std::log(2.0 * std::numbers::pi * var);
}

namespace {

template <typename F>
Vec central_difference(const Vec& x, double h, F&& f) {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

} // namespace

Vec score_fd(const GMMWorld& world, double alpha_bar, const Vec& x, const ConditionSlots& s, double h) {
    return central_difference(x, h, [&](const Vec& y) { return log_density(world, alpha_bar, y, s); });
}

Vec epsilon_fd(const GMMWorld& world, double alpha_bar, const Vec& x, const ConditionSlots& s, double h) {
    return -std::sqrt(1.0 - alpha_bar) * score_fd(world, alpha_bar, x, s, h);
}

double log_posterior(const GMMWorld& world, double alpha_bar, const Vec& x, const ConditionSlots& s) {
    const ConditionSlots null = ConditionSlots::null(s.size());
    double mass = 0.0;
    for (const auto& c : world.components()) {
        bool ok = true;
        for (int i = 0; i < s.size(); ++i)
            if (s[i] && *s[i] != c.pa[static_cast<size_t>(i)]) ok = false;
        if (ok) mass += c.prior;
    }
    return log_density(world, alpha_bar, x, s) + std::log(mass) - log_density(world, alpha_bar, x, null);
}

double sharpened_log_density(const GMMWorld& world, double alpha_bar, const Vec& x, const ConditionSlots& s,
                             const GuidanceSpec& spec) {
    double v = log_density(world, alpha_bar, x, ConditionSlots::null(s.size()));
    for (const auto& g : spec.groups()) v += g.weight * log_posterior(world, alpha_bar, x, mask(s, g.attributes));
    return v;
}

Vec guided_epsilon_fd(const GMMWorld& world, double alpha_bar, const Vec& x, const ConditionSlots& s,
                      const GuidanceSpec& spec, double h) {
    auto f = [&](const Vec& y) { return sharpened_log_density(world, alpha_bar, y, s, spec); };
    return -std::sqrt(1.0 - alpha_bar) * central_difference(x, h, f);
}

} // namespace dcfg::oracle
