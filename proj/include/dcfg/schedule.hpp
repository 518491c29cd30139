// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace dcfg {

enum class ScheduleKind { Linear, Cosine };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

/// Cumulative signal-retention sequence ᾱ_0..ᾱ_T of the forward process.
///
/// Indexed from 0 with ᾱ_0 = 1, so the clean sample sits at t = 0 and the
/// most-noised latent at t = T. Immutable once built.
class NoiseSchedule {
public:
    static constexpr double kDefaultBetaMin = 1e-4;
    static constexpr double kDefaultBetaMax = 0.02;
    static constexpr double kCosineOffset = 0.008;
    static constexpr double kCosineMinRatio = 0.001;

    /// Throws ConfigError on bad arguments, NumericalError when the result is
    /// not strictly decreasing inside (0, 1].
    static NoiseSchedule build(ScheduleKind kind, int steps,
                               double beta_min = kDefaultBetaMin,
                               double beta_max = kDefaultBetaMax);

    int steps() const { return static_cast<int>(alpha_bar_.size()) - 1; }
    ScheduleKind kind() const { return kind_; }
    double beta_min() const { return beta_min_; }
    double beta_max() const { return beta_max_; }

    double alpha_bar(int t) const { return alpha_bar_.at(static_cast<size_t>(t)); }
    double sqrt_alpha_bar(int t) const { return sqrt_ab_.at(static_cast<size_t>(t)); }
    double sqrt_one_minus_alpha_bar(int t) const { return sqrt_1m_ab_.at(static_cast<size_t>(t)); }
    const std::vector<double>& alpha_bars() const { return alpha_bar_; }

private:
    NoiseSchedule(ScheduleKind kind, double beta_min, double beta_max, std::vector<double> alpha_bar);

    ScheduleKind kind_;
    double beta_min_;
    double beta_max_;
    std::vector<double> alpha_bar_;
    std::vector<double> sqrt_ab_;
    std::vector<double> sqrt_1m_ab_;
};

/// Increasing subsequence of 1..T visited by a sub-sampled DDIM trajectory.
/// The implicit endpoint t = 0 is not stored.
class TimestepGrid {
public:
    explicit TimestepGrid(std::vector<int> indices, int steps);

    const std::vector<int>& indices() const { return indices_; }
    int steps() const { return steps_; }
    size_t size() const { return indices_.size(); }

private:
    std::vector<int> indices_;
    int steps_;
};

/// {T, T-stride, ...} in increasing order; stride 1 gives 1..T.
TimestepGrid make_grid(int steps, int stride);

} // namespace dcfg
