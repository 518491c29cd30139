// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/causal.hpp"
#include "dcfg/data.hpp"
#include "dcfg/guidance.hpp"
#include "dcfg/sampler.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dcfg {

/// How guidance is chosen for the prediction step of a counterfactual.
struct CounterfactualGuidance {
    enum class Kind { None, Cfg, DcfgPartition, DcfgGroups };

    Kind kind = Kind::None;
    double omega = 1.0;      // Cfg
    double omega_aff = 1.0;  // DcfgPartition
    double omega_inv = 1.0;  // DcfgPartition
    std::set<int> pinned;    // DcfgPartition: own group at weight 1
    GuidanceSpec groups;     // DcfgGroups

    static CounterfactualGuidance none() { return {}; }
    static CounterfactualGuidance cfg(double omega);
    static CounterfactualGuidance dcfg(double omega_aff, double omega_inv, std::set<int> pinned = {});
    static CounterfactualGuidance explicit_groups(GuidanceSpec spec);

    /// Materializes the sampler guidance for a given affected/invariant split.
    /// DcfgPartition yields groups {affected, ω_aff}, {invariant \ pinned, ω_inv}
    /// and {invariant ∩ pinned, 1}; empty groups are dropped.
    Guidance resolve(const Partition& part, int attributes) const;

    /// No guidance, or CFG at ω = 1: the reference configuration for Δ.
    bool is_baseline() const;

    std::string label() const;
};

struct CounterfactualOptions {
    int stride = 1;
    bool guided_inversion = false;  // abduct with the prediction guidance
    bool null_abduction = false;    // abduct under the null condition
};

struct CounterfactualRecord {
    Vec x0;
    AttributeVector pa;
    AttributeVector cf_pa;
    ExogenousVector u_attr;
    Intervention intervention;
    Partition partition;
    Vec u_img;
    Vec x_cf;
    std::optional<Vec> x_rev;
    std::string guidance;
};

/// Abduction (invert under the factual condition), action (attribute-level
/// counterfactual with u held fixed), prediction (generate under the
/// counterfactual condition with the chosen guidance).
CounterfactualRecord counterfactual(const Denoiser& model, const CausalGraph& graph, const Intervention& iv,
                                    const Vec& x0, const AttributeVector& pa, const ExogenousVector& u_attr,
                                    const CounterfactualGuidance& mode, const CounterfactualOptions& opts = {});

/// Undoes the recorded intervention: re-abducts from x̃ under p̃a and predicts
/// with do(targets := factual values). Returns the reversed sample.
Vec reverse(const Denoiser& model, const CausalGraph& graph, const CounterfactualRecord& rec,
            const CounterfactualGuidance& mode, const CounterfactualOptions& opts = {});

struct BatchSpec {
    InterventionSpec intervention;
    CounterfactualGuidance mode;
    std::optional<CounterfactualGuidance> reverse_mode;  // defaults to mode
    CounterfactualOptions options;
    bool with_reverse = true;
    int jobs = 1;
};

/// Runs counterfactual (and optionally reverse) for every dataset item.
/// Items are independent; output order and values do not depend on jobs.
std::vector<CounterfactualRecord> run_batch(const Denoiser& model, const CausalGraph& graph, const Dataset& data,
                                            const BatchSpec& spec);

} // namespace dcfg
