// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/counterfactual.hpp"
#include "dcfg/world.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dcfg {

/// Mann-Whitney AUROC with average ranks for ties. Labels are 0/1.
/// Throws ConfigError when only one class is present.
double auroc(std::span<const double> scores, std::span<const int> labels);
double auroc(const std::vector<std::pair<double, int>>& scored);

/// Midranks (1-based) of the values; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Per-item evaluation inputs, either computed from records or read back from a batch CSV.
struct BatchTable {
    std::vector<std::string> attribute_names;
    std::vector<int> cardinalities;
    std::vector<AttributeVector> pa;
    std::vector<AttributeVector> cf_pa;
    /// posterior[item][attribute][value] = P(a = value | x̃).
    std::vector<std::vector<std::vector<double>>> posterior;
    std::vector<Vec> x0;
    std::vector<Vec> x_cf;
    std::vector<Vec> x_rev;  // empty when the batch has no reverse pass

    size_t size() const { return pa.size(); }
};

BatchTable tabulate(const GMMWorld& world, const std::vector<CounterfactualRecord>& records);

/// AUROC of the Bayes posterior on x̃ against the counterfactual label, per
/// attribute. Binary attributes score P(a = 1 | x̃); wider attributes use the
/// macro one-vs-rest average. nullopt when the labels are single-class.
std::vector<std::optional<double>> effectiveness(const BatchTable& batch);
std::vector<std::optional<double>> effectiveness(const std::vector<CounterfactualRecord>& records,
                                                 const GMMWorld& world);

struct Reversibility {
    double mae = 0.0;
    double mse = 0.0;
};

/// Mean over items of the per-coordinate absolute and squared deviation x_rev − x0.
Reversibility reversibility(const BatchTable& batch);
Reversibility reversibility(const std::vector<CounterfactualRecord>& records);

/// Per-item mean absolute deviation between two aligned point sets.
std::vector<double> per_item_mae(const std::vector<Vec>& a, const std::vector<Vec>& b);

/// d(x0, F(x0, pa, pa)) without guidance, as mean absolute error per coordinate.
double composition(const Denoiser& model, const Vec& x0, const AttributeVector& pa, int stride);

struct EvalReport {
    std::string label;
    bool baseline = false;
    std::vector<std::string> attribute_names;
    std::vector<std::optional<double>> auroc;
    std::vector<std::optional<double>> delta;  // AUROC percentage points vs the baseline
    std::optional<double> rev_mae;
    std::optional<double> rev_mse;
    std::optional<double> comp_mae;
    size_t samples = 0;
    std::string world_fingerprint;
    std::string config_hash;
};

/// Fills delta for every report from the (single) report flagged baseline.
/// Throws MissingBaselineError when no report is flagged.
void compute_deltas(std::vector<EvalReport>& reports);

/// One-sided exact sign test: P(X ≥ wins) for X ~ Binomial(wins + losses, 1/2).
double sign_test_p(int wins, int losses);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

} // namespace dcfg
