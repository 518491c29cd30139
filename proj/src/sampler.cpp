// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/sampler.hpp"

#include "dcfg/errors.hpp"

#include <cmath>

namespace dcfg {

namespace {

void check_finite(const Vec& x, int t, const char* what) {
    if (!x.allFinite())
        throw NumericalError(std::string(what) + ": non-finite value at t = " + std::to_string(t));
}

} // namespace

Vec predict_x0(const NoiseSchedule& sched, const Vec& eps, const Vec& x_t, int t) {
    require(t >= 0 && t <= sched.steps(), "predict_x0: t out of range");
    return (x_t - sched.sqrt_one_minus_alpha_bar(t) * eps) / sched.sqrt_alpha_bar(t);
}

Vec ddim_step(const NoiseSchedule& sched, const Vec& x_t, const Vec& eps, int t_from, int t_to) {
    Vec x0 = predict_x0(sched, eps, x_t, t_from);
    return sched.sqrt_alpha_bar(t_to) * x0 + sched.sqrt_one_minus_alpha_bar(t_to) * eps;
}

Vec ddim_step_stochastic(const NoiseSchedule& sched, const Vec& x_t, const Vec& eps, int t_from, int t_to,
                         double sigma, const Vec& noise) {
    const double rest = 1.0 - sched.alpha_bar(t_to) - sigma * sigma;
    require(sigma >= 0.0 && rest >= 0.0, "ddim_step_stochastic: sigma too large for target step");
    Vec x0 = predict_x0(sched, eps, x_t, t_from);
    return sched.sqrt_alpha_bar(t_to) * x0 + std::sqrt(rest) * eps + sigma * noise;
}

Trajectory invert(const Denoiser& model, const Guidance& guidance, const Vec& x0, const ConditionSlots& s,
                  const TimestepGrid& grid) {
    require(grid.steps() == model.schedule().steps(), "invert: grid does not match schedule");
    check_finite(x0, 0, "invert");
    const auto& sched = model.schedule();
    Trajectory tr;
    tr.direction = Direction::Invert;
    tr.guidance = describe(guidance);
    tr.states.reserve(grid.size() + 1);
    tr.states.push_back({0, x0});
    Vec x = x0;
    int prev = 0;
    for (int t : grid.indices()) {
        Vec eps = guided_epsilon(model, guidance, x, t, s);
        check_finite(eps, t, "invert: noise prediction");
        x = ddim_step(sched, x, eps, prev, t);
        check_finite(x, t, "invert");
        tr.states.push_back({t, x});
        prev = t;
    }
    return tr;
}

Trajectory generate(const Denoiser& model, const Guidance& guidance, const Vec& x_T, const ConditionSlots& s,
                    const TimestepGrid& grid) {
    require(grid.steps() == model.schedule().steps(), "generate: grid does not match schedule");
    const auto& sched = model.schedule();
    const auto& idx = grid.indices();
    check_finite(x_T, idx.back(), "generate");
    Trajectory tr;
    tr.direction = Direction::Generate;
    tr.guidance = describe(guidance);
    tr.states.reserve(idx.size() + 1);
    tr.states.push_back({idx.back(), x_T});
    Vec x = x_T;
    for (size_t k = idx.size(); k-- > 0;) {
        const int t = idx[k];
        const int next = k == 0 ? 0 : idx[k - 1];
        Vec eps = guided_epsilon(model, guidance, x, t, s);
        check_finite(eps, t, "generate: noise prediction");
        x = ddim_step(sched, x, eps, t, next);
        check_finite(x, next, "generate");
        tr.states.push_back({next, x});
    }
    return tr;
}

} // namespace dcfg
