// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/causal.hpp"

#include "dcfg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace dcfg {

namespace {

std::string describe_cycle(const std::vector<AttributeSpec>& nodes,
                           const std::vector<std::vector<int>>& children) {
    const size_t n = nodes.size();
    std::vector<int> state(n, 0);  // 0 unvisited, 1 on stack, 2 done
    std::vector<int> stack;
    std::string found;
    std::function<bool(int)> dfs = [&](int v) {
        state[static_cast<size_t>(v)] = 1;
        stack.push_back(v);
        for (int c : children[static_cast<size_t>(v)]) {
            if (state[static_cast<size_t>(c)] == 1) {
                auto it = std::find(stack.begin(), stack.end(), c);
                std::ostringstream os;
                for (; it != stack.end(); ++it) os << nodes[static_cast<size_t>(*it)].name << " -> ";
                os << nodes[static_cast<size_t>(c)].name;
                found = os.str();
                return true;
            }
            if (state[static_cast<size_t>(c)] == 0 && dfs(c)) return true;
        }
        stack.pop_back();
        state[static_cast<size_t>(v)] = 2;
        return false;
    };
    for (size_t v = 0; v < n; ++v)
        if (state[v] == 0 && dfs(static_cast<int>(v))) break;
    return found;
}

} // namespace

CausalGraph::CausalGraph(std::vector<AttributeSpec> nodes,
                         std::vector<std::pair<std::string, std::string>> edges,
                         std::map<std::string, std::vector<double>> root_priors,
                         std::map<std::string, Mechanism> mechanisms)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), priors_(std::move(root_priors)),
      mechanisms_(std::move(mechanisms)) {
    require(!nodes_.empty(), "graph: no attributes");
    std::set<std::string> seen;
    for (const auto& n : nodes_) {
        require(!n.name.empty(), "graph: empty attribute name");
        require(seen.insert(n.name).second, "graph: duplicate attribute name '" + n.name + "'");
        require(n.cardinality >= 2, "graph: attribute '" + n.name + "' needs cardinality >= 2");
    }
    const size_t k = nodes_.size();
    parents_.assign(k, {});
    children_.assign(k, {});
    for (const auto& [from, to] : edges_) {
        int a = index_of(from);
        int b = index_of(to);
        require(a != b, "graph: self-loop on '" + from + "'");
        auto& ps = parents_[static_cast<size_t>(b)];
        require(std::find(ps.begin(), ps.end(), a) == ps.end(),
                "graph: duplicate edge " + from + " -> " + to);
        ps.push_back(a);
        children_[static_cast<size_t>(a)].push_back(b);
    }
    for (auto& ps : parents_) std::sort(ps.begin(), ps.end());

    // Kahn's algorithm; leftovers mean a cycle.
    std::vector<int> indegree(k);
    for (size_t i = 0; i < k; ++i) indegree[i] = static_cast<int>(parents_[i].size());
    std::vector<int> ready;
    for (size_t i = 0; i < k; ++i)
        if (indegree[i] == 0) ready.push_back(static_cast<int>(i));
    while (!ready.empty()) {
        auto it = std::min_element(ready.begin(), ready.end());
        int v = *it;
        ready.erase(it);
        topo_.push_back(v);
        for (int c : children_[static_cast<size_t>(v)])
            if (--indegree[static_cast<size_t>(c)] == 0) ready.push_back(c);
    }
    if (topo_.size() != k)
        throw ConfigError("graph: cycle detected: " + describe_cycle(nodes_, children_));

    for (const auto& [name, _] : priors_) {
        int i = index_of(name);
        require(is_root(i), "graph: prior given for non-root '" + name + "'");
    }
    for (const auto& [name, _] : mechanisms_) {
        int i = index_of(name);
        require(!is_root(i), "graph: mechanism given for root '" + name + "'");
    }
    for (size_t i = 0; i < k; ++i) {
        const auto& spec = nodes_[i];
        if (parents_[i].empty()) {
            auto it = priors_.find(spec.name);
            require(it != priors_.end(), "graph: root '" + spec.name + "' has no prior");
            const auto& p = it->second;
            require(static_cast<int>(p.size()) == spec.cardinality,
                    "graph: prior of '" + spec.name + "' has wrong length");
            double sum = 0.0;
            for (double q : p) {
                require(std::isfinite(q) && q >= 0.0, "graph: prior of '" + spec.name + "' has invalid entry");
                sum += q;
            }
            require(std::abs(sum - 1.0) <= 1e-9, "graph: prior of '" + spec.name + "' does not sum to 1");
        } else {
            auto it = mechanisms_.find(spec.name);
            require(it != mechanisms_.end(), "graph: non-root '" + spec.name + "' has no mechanism");
            const auto& m = it->second;
            require(m.exogenous_cardinality >= 1,
                    "graph: mechanism of '" + spec.name + "' needs exogenous cardinality >= 1");
            size_t rows = 1;
            for (int p : parents_[i]) rows *= static_cast<size_t>(nodes_[static_cast<size_t>(p)].cardinality);
            require(m.table.size() == rows * static_cast<size_t>(m.exogenous_cardinality),
                    "graph: mechanism table of '" + spec.name + "' is not total over its domain");
            for (int v : m.table)
                require(v >= 0 && v < spec.cardinality,
                        "graph: mechanism of '" + spec.name + "' produces out-of-range value");
        }
    }
}

int CausalGraph::index_of(const std::string& name) const {
    for (size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].name == name) return static_cast<int>(i);
    throw ConfigError("unknown attribute '" + name + "'");
}

const std::vector<double>& CausalGraph::prior(int i) const {
    return priors_.at(node(i).name);
}

const Mechanism& CausalGraph::mechanism(int i) const {
    return mechanisms_.at(node(i).name);
}

int CausalGraph::evaluate(int i, const AttributeVector& pa, int u) const {
    const Mechanism& m = mechanism(i);
    size_t row = 0;
    for (int p : parents(i))
        row = row * static_cast<size_t>(node(p).cardinality) + static_cast<size_t>(pa[static_cast<size_t>(p)]);
    return m.table[row * static_cast<size_t>(m.exogenous_cardinality) + static_cast<size_t>(u)];
}

double CausalGraph::conditional_probability(int i, const AttributeVector& pa, int value) const {
    if (is_root(i)) return prior(i)[static_cast<size_t>(value)];
    const Mechanism& m = mechanism(i);
    int hits = 0;
    for (int u = 0; u < m.exogenous_cardinality; ++u)
        if (evaluate(i, pa, u) == value) ++hits;
    return static_cast<double>(hits) / m.exogenous_cardinality;
}

double CausalGraph::joint_probability(const AttributeVector& pa) const {
    double p = 1.0;
    for (int i = 0; i < size(); ++i) p *= conditional_probability(i, pa, pa[static_cast<size_t>(i)]);
    return p;
}

std::vector<std::pair<AttributeVector, double>> CausalGraph::support() const {
    std::vector<std::pair<AttributeVector, double>> out;
    AttributeVector pa(nodes_.size(), 0);
    while (true) {
        double p = joint_probability(pa);
        if (p > 0.0) out.emplace_back(pa, p);
        int i = size() - 1;
        while (i >= 0) {
            if (++pa[static_cast<size_t>(i)] < node(i).cardinality) break;
            pa[static_cast<size_t>(i)] = 0;
            --i;
        }
        if (i < 0) break;
    }
    return out;
}

std::set<int> CausalGraph::descendants(const std::set<int>& from) const {
    std::set<int> out;
    std::vector<int> frontier(from.begin(), from.end());
    while (!frontier.empty()) {
        int v = frontier.back();
        frontier.pop_back();
        for (int c : children_[static_cast<size_t>(v)])
            if (out.insert(c).second) frontier.push_back(c);
    }
    return out;
}

std::set<int> Intervention::targets() const {
    std::set<int> out;
    for (const auto& [i, _] : assignments) out.insert(i);
    return out;
}

Intervention make_intervention(const CausalGraph& graph, const std::map<std::string, int>& assignments) {
    Intervention iv;
    for (const auto& [name, value] : assignments) {
        int i = graph.index_of(name);
        require(value >= 0 && value < graph.node(i).cardinality,
                "intervention: value " + std::to_string(value) + " out of range for '" + name + "'");
        iv.assignments[i] = value;
    }
    return iv;
}

InterventionSpec::InterventionSpec(const CausalGraph& graph, std::vector<InterventionTarget> targets)
    : targets_(std::move(targets)) {
    std::set<int> seen;
    for (const auto& t : targets_) {
        int i = graph.index_of(t.attribute);
        require(seen.insert(i).second, "intervention: attribute '" + t.attribute + "' listed twice");
        int card = graph.node(i).cardinality;
        if (t.value)
            require(*t.value >= 0 && *t.value < card,
                    "intervention: value out of range for '" + t.attribute + "'");
        indices_.push_back(i);
        cardinalities_.push_back(card);
    }
}

Intervention InterventionSpec::resolve(const AttributeVector& pa) const {
    Intervention iv;
    for (size_t j = 0; j < targets_.size(); ++j) {
        int i = indices_[j];
        int v = targets_[j].value ? *targets_[j].value
                                  : (pa[static_cast<size_t>(i)] + 1) % cardinalities_[j];
        iv.assignments[i] = v;
    }
    return iv;
}

std::set<int> InterventionSpec::target_indices() const {
    return {indices_.begin(), indices_.end()};
}

std::string InterventionSpec::label() const {
    if (targets_.empty()) return "do()";
    std::string s = "do(";
    for (size_t j = 0; j < targets_.size(); ++j) {
        if (j) s += ",";
        s += targets_[j].attribute;
        s += targets_[j].value ? ":=" + std::to_string(*targets_[j].value) : ":=flip";
    }
    return s + ")";
}

AttributeSample sample_attributes(const CausalGraph& graph, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    AttributeSample s;
    s.pa.assign(static_cast<size_t>(graph.size()), 0);
    s.u.assign(static_cast<size_t>(graph.size()), 0);
    for (int i : graph.topological_order()) {
        if (graph.is_root(i)) {
            const auto& p = graph.prior(i);
            double r = unif(rng);
            double acc = 0.0;
            int v = static_cast<int>(p.size()) - 1;
            for (size_t j = 0; j < p.size(); ++j) {
                acc += p[j];
                if (r < acc) {
                    v = static_cast<int>(j);
                    break;
                }
            }
            // Guard against rounding landing on a zero-probability tail value.
            while (p[static_cast<size_t>(v)] == 0.0 && v > 0) --v;
            s.pa[static_cast<size_t>(i)] = v;
        } else {
            std::uniform_int_distribution<int> ud(0, graph.mechanism(i).exogenous_cardinality - 1);
            int u = ud(rng);
            s.u[static_cast<size_t>(i)] = u;
            s.pa[static_cast<size_t>(i)] = graph.evaluate(i, s.pa, u);
        }
    }
    return s;
}

AttributeVector counterfactual_attributes(const CausalGraph& graph, const AttributeVector& pa,
                                          const ExogenousVector& u, const Intervention& iv) {
    require(static_cast<int>(pa.size()) == graph.size() && static_cast<int>(u.size()) == graph.size(),
            "counterfactual_attributes: vector length mismatch");
    for (const auto& [i, v] : iv.assignments)
        require(i >= 0 && i < graph.size() && v >= 0 && v < graph.node(i).cardinality,
                "counterfactual_attributes: invalid intervention");
    AttributeVector out = pa;
    for (int i : graph.topological_order()) {
        auto it = iv.assignments.find(i);
        if (it != iv.assignments.end()) {
            out[static_cast<size_t>(i)] = it->second;
        } else if (!graph.is_root(i)) {
            out[static_cast<size_t>(i)] = graph.evaluate(i, out, u[static_cast<size_t>(i)]);
        }
    }
    return out;
}

Partition partition(const CausalGraph& graph, const std::set<int>& targets) {
    Partition p;
    p.affected = targets;
    for (int d : graph.descendants(targets)) p.affected.insert(d);
    for (int i = 0; i < graph.size(); ++i)
        if (!p.affected.count(i)) p.invariant.insert(i);
    return p;
}

Partition partition(const CausalGraph& graph, const Intervention& iv) {
    return partition(graph, iv.targets());
}

namespace builtin {

CausalGraph independent_binary(const std::vector<std::string>& names) {
    std::vector<AttributeSpec> nodes;
    std::map<std::string, std::vector<double>> priors;
    for (const auto& n : names) {
        nodes.push_back({n, 2});
        priors[n] = {0.5, 0.5};
    }
    return CausalGraph(std::move(nodes), {}, std::move(priors), {});
}

CausalGraph independent_binary(int count, double p_one) {
    std::vector<AttributeSpec> nodes;
    std::map<std::string, std::vector<double>> priors;
    for (int i = 1; i <= count; ++i) {
        std::string n = "a" + std::to_string(i);
        nodes.push_back({n, 2});
        priors[n] = {1.0 - p_one, p_one};
    }
    return CausalGraph(std::move(nodes), {}, std::move(priors), {});
}

CausalGraph age_finding() {
    std::vector<AttributeSpec> nodes{{"age", 2}, {"race", 2}, {"sex", 2}, {"finding", 2}};
    std::map<std::string, std::vector<double>> priors{
        {"age", {0.5, 0.5}}, {"race", {0.5, 0.5}}, {"sex", {0.5, 0.5}}};
    // u uniform on 0..3: P(finding = 1 | age = 0) = 1/4, P(finding = 1 | age = 1) = 3/4.
    Mechanism finding{4, {1, 0, 0, 0, 1, 1, 1, 0}};
    return CausalGraph(std::move(nodes), {{"age", "finding"}}, std::move(priors),
                       {{"finding", finding}});
}

} // namespace builtin

} // namespace dcfg
