// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/types.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dcfg {

struct AttributeSpec {
    std::string name;
    int cardinality = 2;
};

/// Deterministic mechanism a_k = table[(parent values..., u_k)].
///
/// The table is row-major over the parents (in node-index order) followed by
/// the exogenous value u_k, which is uniform over exogenous_cardinality.
struct Mechanism {
    int exogenous_cardinality = 2;
    std::vector<int> table;
};

/// Discrete structural causal model over K attributes.
class CausalGraph {
public:
    /// Validates acyclicity, mechanism totality, and prior normalization.
    /// Errors are ConfigError; a cycle error names the nodes on the cycle.
    CausalGraph(std::vector<AttributeSpec> nodes,
                std::vector<std::pair<std::string, std::string>> edges,
                std::map<std::string, std::vector<double>> root_priors,
                std::map<std::string, Mechanism> mechanisms);

    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<AttributeSpec>& nodes() const { return nodes_; }
    const AttributeSpec& node(int i) const { return nodes_.at(static_cast<size_t>(i)); }
    const std::vector<std::pair<std::string, std::string>>& edges() const { return edges_; }
    const std::vector<int>& parents(int i) const { return parents_.at(static_cast<size_t>(i)); }
    const std::vector<int>& topological_order() const { return topo_; }
    bool is_root(int i) const { return parents(i).empty(); }
    const std::vector<double>& prior(int i) const;
    const Mechanism& mechanism(int i) const;
    const std::map<std::string, std::vector<double>>& root_priors() const { return priors_; }
    const std::map<std::string, Mechanism>& mechanisms() const { return mechanisms_; }

    /// Throws ConfigError for unknown names.
    int index_of(const std::string& name) const;

    /// Mechanism output for node i given the full attribute vector and u_i.
    int evaluate(int i, const AttributeVector& pa, int u) const;

    /// P(a_i = value | parents as in pa), marginalizing the uniform u_i.
    double conditional_probability(int i, const AttributeVector& pa, int value) const;

    /// Joint prior π(pa) by the chain rule over the DAG.
    double joint_probability(const AttributeVector& pa) const;

    /// Every assignment with nonzero prior, in lexicographic order.
    std::vector<std::pair<AttributeVector, double>> support() const;

    /// Transitive descendants of the given nodes, excluding the nodes themselves
    /// unless reachable through an edge.
    std::set<int> descendants(const std::set<int>& from) const;

private:
    std::vector<AttributeSpec> nodes_;
    std::vector<std::pair<std::string, std::string>> edges_;
    std::map<std::string, std::vector<double>> priors_;
    std::map<std::string, Mechanism> mechanisms_;
    std::vector<std::vector<int>> parents_;
    std::vector<std::vector<int>> children_;
    std::vector<int> topo_;
};

/// A resolved do-intervention: forced values by attribute index.
struct Intervention {
    std::map<int, int> assignments;

    bool empty() const { return assignments.empty(); }
    std::set<int> targets() const;
};

/// Builds an Intervention from name → value pairs, validating both.
Intervention make_intervention(const CausalGraph& graph, const std::map<std::string, int>& assignments);

/// One configured intervention entry; Flip resolves per item to (v+1) mod cardinality.
struct InterventionTarget {
    std::string attribute;
    std::optional<int> value;  // nullopt means flip
};

/// Intervention template that resolves against each item's factual attributes.
class InterventionSpec {
public:
    InterventionSpec() = default;
    InterventionSpec(const CausalGraph& graph, std::vector<InterventionTarget> targets);

    Intervention resolve(const AttributeVector& pa) const;
    const std::vector<InterventionTarget>& targets() const { return targets_; }
    std::set<int> target_indices() const;
    bool empty() const { return targets_.empty(); }
    std::string label() const;

private:
    std::vector<InterventionTarget> targets_;
    std::vector<int> indices_;
    std::vector<int> cardinalities_;
};

struct AttributeSample {
    AttributeVector pa;
    ExogenousVector u;
};

/// Ancestral sampling: roots from priors, others through their mechanism
/// with a fresh uniform exogenous value. The exogenous values are returned.
AttributeSample sample_attributes(const CausalGraph& graph, Rng& rng);

/// Abduction-action-prediction at the attribute level: u held fixed,
/// intervened nodes clamped, mechanisms re-evaluated in topological order.
AttributeVector counterfactual_attributes(const CausalGraph& graph, const AttributeVector& pa,
                                          const ExogenousVector& u, const Intervention& iv);

struct Partition {
    std::set<int> affected;
    std::set<int> invariant;
};

/// affected = intervened nodes and their descendants; invariant = the rest.
Partition partition(const CausalGraph& graph, const Intervention& iv);
Partition partition(const CausalGraph& graph, const std::set<int>& targets);

namespace builtin {

/// K independent Bernoulli(p) roots named a1..aK.
CausalGraph independent_binary(int count, double p_one = 0.5);

/// Independent Bernoulli(0.5) roots with the given names.
CausalGraph independent_binary(const std::vector<std::string>& names);

/// Four-node graph age → finding with independent race and sex.
CausalGraph age_finding();

} // namespace builtin

} // namespace dcfg
