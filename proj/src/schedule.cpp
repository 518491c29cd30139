// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/schedule.hpp"

#include "dcfg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dcfg {

std::string to_string(ScheduleKind kind) {
    return kind == ScheduleKind::Linear ? "linear" : "cosine";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
    if (name == "linear") return ScheduleKind::Linear;
    if (name == "cosine") return ScheduleKind::Cosine;
    throw ConfigError("unknown schedule kind '" + name + "' (expected linear|cosine)");
}

namespace {

std::vector<double> linear_alpha_bar(int steps, double beta_min, double beta_max) {
    std::vector<double> ab(static_cast<size_t>(steps) + 1);
    ab[0] = 1.0;
    // Accumulate in log space; log1p keeps the small-β factors exact.
    double log_ab = 0.0;
    for (int t = 1; t <= steps; ++t) {
        double frac = steps == 1 ? 0.0 : static_cast<double>(t - 1) / (steps - 1);
        double beta = beta_min + (beta_max - beta_min) * frac;
        log_ab += std::log1p(-beta);
        ab[static_cast<size_t>(t)] = std::exp(log_ab);
    }
    return ab;
}

std::vector<double> cosine_alpha_bar(int steps) {
    const double s = NoiseSchedule::kCosineOffset;
    auto f = [&](double t) {
        double c = std::cos((t / steps + s) / (1.0 + s) * std::numbers::pi / 2.0);
        return c * c;
    };
    const double f0 = f(0.0);
    std::vector<double> ab(static_cast<size_t>(steps) + 1);
    ab[0] = 1.0;
    for (int t = 1; t <= steps; ++t) {
        double raw = f(t) / f0;
        double floor = ab[static_cast<size_t>(t) - 1] * NoiseSchedule::kCosineMinRatio;
        ab[static_cast<size_t>(t)] = std::max(raw, floor);
    }
    return ab;
}

void validate(const std::vector<double>& ab) {
    if (ab.front() != 1.0) throw NumericalError("schedule: alpha_bar_0 must be exactly 1");
    for (size_t t = 1; t < ab.size(); ++t) {
        if (!std::isfinite(ab[t]) || ab[t] <= 0.0 || ab[t] > 1.0) {
            std::ostringstream os;
            os << "schedule: alpha_bar_" << t << " = " << ab[t] << " outside (0, 1]";
            throw NumericalError(os.str());
        }
        if (!(ab[t] < ab[t - 1])) {
            std::ostringstream os;
            os << "schedule: alpha_bar not strictly decreasing at t = " << t;
            throw NumericalError(os.str());
        }
    }
}

} // namespace

NoiseSchedule::NoiseSchedule(ScheduleKind kind, double beta_min, double beta_max,
                             std::vector<double> alpha_bar)
    : kind_(kind), beta_min_(beta_min), beta_max_(beta_max), alpha_bar_(std::move(alpha_bar)) {
    sqrt_ab_.reserve(alpha_bar_.size());
    sqrt_1m_ab_.reserve(alpha_bar_.size());
    for (double a : alpha_bar_) {
        sqrt_ab_.push_back(std::sqrt(a));
        sqrt_1m_ab_.push_back(std::sqrt(1.0 - a));
    }
}

NoiseSchedule NoiseSchedule::build(ScheduleKind kind, int steps, double beta_min, double beta_max) {
    require(steps >= 1, "schedule: T must be >= 1");
    std::vector<double> ab;
    if (kind == ScheduleKind::Linear) {
        require(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0,
                "schedule: need 0 < beta_min <= beta_max < 1");
        ab = linear_alpha_bar(steps, beta_min, beta_max);
    } else {
        ab = cosine_alpha_bar(steps);
    }
    validate(ab);
    return NoiseSchedule(kind, beta_min, beta_max, std::move(ab));
}

TimestepGrid::TimestepGrid(std::vector<int> indices, int steps)
    : indices_(std::move(indices)), steps_(steps) {
    require(!indices_.empty(), "grid: empty");
    require(indices_.front() >= 1, "grid: first index must be >= 1");
    require(indices_.back() == steps_, "grid: last index must equal T");
    for (size_t i = 1; i < indices_.size(); ++i)
        require(indices_[i] > indices_[i - 1], "grid: indices must be strictly increasing");
}

TimestepGrid make_grid(int steps, int stride) {
    require(steps >= 1, "grid: T must be >= 1");
    require(stride >= 1 && stride <= steps, "grid: stride must satisfy 1 <= stride <= T");
    std::vector<int> idx;
    for (int t = steps; t >= 1; t -= stride) idx.push_back(t);
    std::reverse(idx.begin(), idx.end());
    return TimestepGrid(std::move(idx), steps);
}

} // namespace dcfg
