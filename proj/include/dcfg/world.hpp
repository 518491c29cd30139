// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/causal.hpp"
#include "dcfg/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dcfg {

/// One mixture component: an attribute assignment with nonzero prior.
struct Component {
    AttributeVector pa;
    double prior = 0.0;
    Vec mean;
};

enum class MeansPolicy { Axis, Projection, Explicit };

std::string to_string(MeansPolicy p);
MeansPolicy means_policy_from_string(const std::string& name);

/// Attribute-conditioned Gaussian mixture: x0 | pa ~ N(μ(pa), σ0² I).
class GMMWorld {
public:
    static constexpr double kDefaultScale = 1.0;
    static constexpr double kDefaultSigma0 = 1.0;
    static constexpr int kDefaultDim = 2;

    /// Explicit means for every supported assignment.
    GMMWorld(CausalGraph graph, int dim, std::map<AttributeVector, Vec> means, double sigma0);

    /// μ(pa) = scale · M · code(pa) with code_i = 2·pa_i/(card_i−1) − 1. Axis uses
    /// M = [I | 0]; Projection uses the first D rows of a seeded orthogonal K×K matrix.
    static GMMWorld with_policy(CausalGraph graph, int dim, MeansPolicy policy, double scale,
                                double sigma0, std::uint64_t projection_seed = 0);

    const CausalGraph& graph() const { return graph_; }
    int dim() const { return dim_; }
    int attributes() const { return graph_.size(); }
    double sigma0() const { return sigma0_; }
    const std::vector<Component>& components() const { return components_; }
    const Vec& mean(const AttributeVector& pa) const;

    /// Stable 64-bit hash of the graph, means, σ0 and D.
    std::uint64_t fingerprint() const;
    std::string fingerprint_hex() const;

private:
    CausalGraph graph_;
    int dim_;
    double sigma0_;
    std::vector<Component> components_;
};

/// P(a_i = v | x0) for every v of attribute i under the world's exact model.
std::vector<double> bayes_posterior(const GMMWorld& world, const Vec& x0, int attribute);

/// P(a_i = 1 | x0) for binary attributes; for wider ones the posterior of the
/// top value.
double bayes_score(const GMMWorld& world, const Vec& x0, int attribute);

namespace builtin {

/// Named worlds shipped with the CLI: "independent2", "independent3", "age_finding".
GMMWorld world(const std::string& name, int dim = GMMWorld::kDefaultDim,
               double scale = GMMWorld::kDefaultScale, double sigma0 = GMMWorld::kDefaultSigma0,
               std::uint64_t projection_seed = 0);

std::vector<std::string> world_names();

} // namespace builtin

std::string hex64(std::uint64_t v);
std::uint64_t fnv1a64(const std::string& s);

} // namespace dcfg
