// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Slow reference computations used to cross-check the fast paths.

#include "dcfg/condition.hpp"
#include "dcfg/guidance.hpp"
#include "dcfg/world.hpp"

namespace dcfg::oracle {

/// ᾱ_t for the linear schedule as a plain running product.
double linear_alpha_bar(int steps, int t, double beta_min, double beta_max);

/// log p_t(x | s) of the noised mixture, in closed form.
double log_density(const GMMWorld& world, double alpha_bar, const Vec& x, const ConditionSlots& s);

/// Central-difference gradient of log_density.
Vec score_fd(const GMMWorld& world, double alpha_bar, const Vec& x, const ConditionSlots& s, double h = 1e-5);

/// ε = −√(1−ᾱ) ∇ log p_t(x | s).
Vec epsilon_fd(const GMMWorld& world, double alpha_bar, const Vec& x, const ConditionSlots& s, double h = 1e-5);

/// log P(slots | x) at noise level ᾱ, by Bayes' rule over the mixture.
double log_posterior(const GMMWorld& world, double alpha_bar, const Vec& x, const ConditionSlots& s);

/// log[p(x) Π_m P(s restricted to group m | x)^{ω_m}].
double sharpened_log_density(const GMMWorld& world, double alpha_bar, const Vec& x, const ConditionSlots& s,
                             const GuidanceSpec& spec);

/// −√(1−ᾱ) times the finite-difference gradient of sharpened_log_density.
Vec guided_epsilon_fd(const GMMWorld& world, double alpha_bar, const Vec& x, const ConditionSlots& s,
                      const GuidanceSpec& spec, double h = 1e-5);

} // namespace dcfg::oracle
