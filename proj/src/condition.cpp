// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/condition.hpp"

#include "dcfg/causal.hpp"
#include "dcfg/errors.hpp"

namespace dcfg {

ConditionSlots ConditionSlots::from(const AttributeVector& pa) {
    std::vector<std::optional<int>> s;
    s.reserve(pa.size());
    for (int v : pa) s.emplace_back(v);
    return ConditionSlots(std::move(s));
}

bool ConditionSlots::all_null() const {
    for (const auto& s : slots_)
        if (s) return false;
    return true;
}

void ConditionSlots::validate(const CausalGraph& graph) const {
    require(size() == graph.size(), "condition: slot count " + std::to_string(size()) +
                                        " does not match attribute count " + std::to_string(graph.size()));
    for (int i = 0; i < size(); ++i)
        if (slots_[static_cast<size_t>(i)])
            require(*slots_[static_cast<size_t>(i)] >= 0 && *slots_[static_cast<size_t>(i)] < graph.node(i).cardinality,
                    "condition: value out of range for '" + graph.node(i).name + "'");
}

std::string ConditionSlots::to_string() const {
    std::string out = "(";
    for (size_t i = 0; i < slots_.size(); ++i) {
        if (i) out += ",";
        out += slots_[i] ? std::to_string(*slots_[i]) : "_";
    }
    return out + ")";
}

ConditionSlots mask(const ConditionSlots& s, const std::set<int>& group) {
    for (int i : group)
        require(i >= 0 && i < s.size(), "mask: index " + std::to_string(i) + " out of range");
    std::vector<std::optional<int>> out(static_cast<size_t>(s.size()));
    for (int i : group) out[static_cast<size_t>(i)] = s[i];
    return ConditionSlots(std::move(out));
}

ConditionSlots dropout(const ConditionSlots& s, double p, Rng& rng) {
    require(p >= 0.0 && p <= 1.0, "dropout: probability must lie in [0, 1]");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return unif(rng) < p ? ConditionSlots::null(s.size()) : s;
}

SplitEmbedder::SplitEmbedder(std::vector<int> cardinalities, int width)
    : cards_(std::move(cardinalities)), width_(width) {
    require(width_ >= 1, "embedder: width must be >= 1");
    for (int c : cards_) {
        require(c >= 1, "embedder: cardinality must be >= 1");
        weights_.push_back(Mat::Zero(width_, c));
        bias_.push_back(Vec::Zero(width_));
    }
}

SplitEmbedder SplitEmbedder::random(std::vector<int> cardinalities, int width, Rng& rng, double scale) {
    SplitEmbedder e(std::move(cardinalities), width);
    std::normal_distribution<double> n(0.0, scale);
    for (auto& w : e.weights_)
        for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = n(rng);
    return e;
}

Vec SplitEmbedder::embed(const ConditionSlots& s) const {
    require(s.size() == attributes(), "embed: slot count does not match embedder");
    Vec out = Vec::Zero(output_size());
    for (int i = 0; i < attributes(); ++i) {
        if (s.is_null(i)) continue;
        int v = *s[i];
        require(v >= 0 && v < cards_[static_cast<size_t>(i)], "embed: value out of range");
        out.segment(i * width_, width_) = weights_[static_cast<size_t>(i)].col(v) + bias_[static_cast<size_t>(i)];
    }
    return out;
}

} // namespace dcfg
