// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/denoiser.hpp"

#include <set>
#include <string>
#include <variant>
#include <vector>

namespace dcfg {

struct GuidanceGroup {
    std::set<int> attributes;
    double weight = 1.0;
};

/// Disjoint attribute groups, each with its own guidance weight ω_m ≥ 0.
/// Attributes in no group are nulled in every masked evaluation.
class GuidanceSpec {
public:
    GuidanceSpec() = default;
    /// Throws ConfigError for overlapping groups, negative or non-finite weights,
    /// or indices outside 0..attributes-1.
    GuidanceSpec(std::vector<GuidanceGroup> groups, int attributes);

    const std::vector<GuidanceGroup>& groups() const { return groups_; }
    int attributes() const { return attributes_; }

    /// True when some attribute appears in no group.
    bool has_ungrouped() const;

private:
    std::vector<GuidanceGroup> groups_;
    int attributes_ = 0;
};

/// ε(∅) + ω (ε(s) − ε(∅)).
Vec epsilon_cfg(const Denoiser& model, const Vec& x_t, int t, const ConditionSlots& s, double omega);

/// ε(∅) + Σ_m ω_m (ε(mask(s, group_m)) − ε(∅)).
Vec epsilon_dcfg(const Denoiser& model, const Vec& x_t, int t, const ConditionSlots& s,
                 const GuidanceSpec& spec);

/// The pieces of a DCFG evaluation: ε(∅) and each group's weighted correction
/// ω_m (ε(mask(s, group_m)) − ε(∅)), in group order.
struct DcfgTerms {
    Vec null_epsilon;
    std::vector<Vec> corrections;

    Vec total() const;
};

DcfgTerms dcfg_terms(const Denoiser& model, const Vec& x_t, int t, const ConditionSlots& s,
                     const GuidanceSpec& spec);

struct NoGuidance {};
struct CfgGuidance {
    double omega = 1.0;
};
struct DcfgGuidance {
    GuidanceSpec spec;
};

/// Resolved guidance for one sampler trajectory.
using Guidance = std::variant<NoGuidance, CfgGuidance, DcfgGuidance>;

/// Noise prediction under the given guidance; NoGuidance is the plain conditional ε(s).
Vec guided_epsilon(const Denoiser& model, const Guidance& g, const Vec& x_t, int t, const ConditionSlots& s);

std::string describe(const Guidance& g);

} // namespace dcfg
