// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/guidance.hpp"
#include "dcfg/schedule.hpp"

#include <string>
#include <utility>
#include <vector>

namespace dcfg {

enum class Direction { Invert, Generate };

struct TrajectoryState {
    int t;
    Vec x;
};

/// Visited states of one DDIM pass, in the order they were produced.
struct Trajectory {
    Direction direction = Direction::Generate;
    std::string guidance;
    std::vector<TrajectoryState> states;

    const Vec& final_state() const { return states.back().x; }
};

/// Clean-sample estimate (x_t − √(1−ᾱ_t) ε) / √ᾱ_t.
Vec predict_x0(const NoiseSchedule& sched, const Vec& eps, const Vec& x_t, int t);

/// Deterministic DDIM move from t_from to t_to (either direction):
/// √ᾱ_to · x̂_0 + √(1−ᾱ_to) · ε.
Vec ddim_step(const NoiseSchedule& sched, const Vec& x_t, const Vec& eps, int t_from, int t_to);

/// Reverse step with σ > 0: predict x̂_0, then re-noise with fresh Gaussian noise.
/// Requires sigma² ≤ 1 − ᾱ_to. Not used by counterfactual runs.
Vec ddim_step_stochastic(const NoiseSchedule& sched, const Vec& x_t, const Vec& eps, int t_from, int t_to,
                         double sigma, const Vec& noise);

/// Abduction: integrates x_0 → x_T over 0, grid[0], ..., grid[n-1]. Each step
/// s → t evaluates the guided ε at (x_s, t), mirroring the generation step that
/// undoes it. Throws NumericalError naming t on a non-finite state.
Trajectory invert(const Denoiser& model, const Guidance& guidance, const Vec& x0, const ConditionSlots& s,
                  const TimestepGrid& grid);

/// Prediction: integrates x_T → x_0 over grid[n-1], ..., grid[0], 0 with σ = 0.
Trajectory generate(const Denoiser& model, const Guidance& guidance, const Vec& x_T, const ConditionSlots& s,
                    const TimestepGrid& grid);

} // namespace dcfg
