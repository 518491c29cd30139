// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/guidance.hpp"

#include "dcfg/errors.hpp"

#include <cmath>
#include <sstream>

namespace dcfg {

GuidanceSpec::GuidanceSpec(std::vector<GuidanceGroup> groups, int attributes)
    : groups_(std::move(groups)), attributes_(attributes) {
    std::set<int> seen;
    for (size_t m = 0; m < groups_.size(); ++m) {
        const auto& g = groups_[m];
        require(std::isfinite(g.weight) && g.weight >= 0.0,
                "guidance: group " + std::to_string(m) + " weight must be finite and >= 0");
        for (int i : g.attributes) {
            require(i >= 0 && i < attributes_, "guidance: attribute index " + std::to_string(i) + " out of range");
            require(seen.insert(i).second, "guidance: groups overlap on attribute " + std::to_string(i));
        }
    }
}

bool GuidanceSpec::has_ungrouped() const {
    std::set<int> seen;
    for (const auto& g : groups_) seen.insert(g.attributes.begin(), g.attributes.end());
    return static_cast<int>(seen.size()) < attributes_;
}

Vec epsilon_cfg(const Denoiser& model, const Vec& x_t, int t, const ConditionSlots& s, double omega) {
    require(std::isfinite(omega) && omega >= 0.0, "cfg: weight must be finite and >= 0");
    Vec e_null = model.epsilon(x_t, t, ConditionSlots::null(s.size()));
    Vec e_cond = model.epsilon(x_t, t, s);
    return e_null + omega * (e_cond - e_null);
}

Vec DcfgTerms::total() const {
    Vec out = null_epsilon;
    for (const auto& c : corrections) out += c;
    return out;
}

DcfgTerms dcfg_terms(const Denoiser& model, const Vec& x_t, int t, const ConditionSlots& s,
                     const GuidanceSpec& spec) {
    require(spec.attributes() == s.size(), "dcfg: guidance spec does not match slot count");
    DcfgTerms terms;
    terms.null_epsilon = model.epsilon(x_t, t, ConditionSlots::null(s.size()));
    terms.corrections.reserve(spec.groups().size());
    for (const auto& g : spec.groups()) {
        Vec e_m = model.epsilon(x_t, t, mask(s, g.attributes));
        terms.corrections.push_back(g.weight * (e_m - terms.null_epsilon));
    }
    return terms;
}

Vec epsilon_dcfg(const Denoiser& model, const Vec& x_t, int t, const ConditionSlots& s,
                 const GuidanceSpec& spec) {
    return dcfg_terms(model, x_t, t, s, spec).total();
}

Vec guided_epsilon(const Denoiser& model, const Guidance& g, const Vec& x_t, int t, const ConditionSlots& s) {
    if (std::holds_alternative<NoGuidance>(g)) return model.epsilon(x_t, t, s);
    if (const auto* c = std::get_if<CfgGuidance>(&g)) return epsilon_cfg(model, x_t, t, s, c->omega);
    return epsilon_dcfg(model, x_t, t, s, std::get<DcfgGuidance>(g).spec);
}

std::string describe(const Guidance& g) {
    std::ostringstream os;
    if (std::holds_alternative<NoGuidance>(g)) {
        os << "none";
    } else if (const auto* c = std::get_if<CfgGuidance>(&g)) {
        os << "cfg(" << c->omega << ")";
    } else {
        os << "dcfg(";
        const auto& groups = std::get<DcfgGuidance>(g).spec.groups();
        for (size_t m = 0; m < groups.size(); ++m) {
            if (m) os << ";";
            os << "{";
            bool first = true;
            for (int i : groups[m].attributes) {
                os << (first ? "" : ",") << i;
                first = false;
            }
            os << "}:" << groups[m].weight;
        }
        os << ")";
    }
    return os.str();
}

} // namespace dcfg
