// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/condition.hpp"
#include "dcfg/schedule.hpp"
#include "dcfg/types.hpp"
#include "dcfg/world.hpp"

namespace dcfg {

/// ε(x_t, t, condition). Implementations are immutable and safe to call concurrently.
class Denoiser {
public:
    virtual ~Denoiser() = default;

    virtual Vec epsilon(const Vec& x_t, int t, const ConditionSlots& s) const = 0;
    virtual const NoiseSchedule& schedule() const = 0;
    virtual int dim() const = 0;
    virtual int attributes() const = 0;
};

/// Exact noise prediction of the Gaussian-mixture world:
///   ε* = −√(1−ᾱ_t) ∇ log p(x_t | s)
/// where p(x_t | s) mixes N(√ᾱ_t μ_j, (ᾱ_t σ0² + 1 − ᾱ_t) I) over the
/// components consistent with the Value slots of s.
Vec analytic_epsilon(const GMMWorld& world, const NoiseSchedule& sched, const Vec& x_t, int t,
                     const ConditionSlots& s);

class AnalyticDenoiser final : public Denoiser {
public:
    AnalyticDenoiser(GMMWorld world, NoiseSchedule sched)
        : world_(std::move(world)), sched_(std::move(sched)) {}

    Vec epsilon(const Vec& x_t, int t, const ConditionSlots& s) const override {
        return analytic_epsilon(world_, sched_, x_t, t, s);
    }
    const NoiseSchedule& schedule() const override { return sched_; }
    int dim() const override { return world_.dim(); }
    int attributes() const override { return world_.attributes(); }
    const GMMWorld& world() const { return world_; }

private:
    GMMWorld world_;
    NoiseSchedule sched_;
};

} // namespace dcfg
