// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/types.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dcfg {

class CausalGraph;

/// Per-attribute condition: a value, or the null token.
class ConditionSlots {
public:
    ConditionSlots() = default;
    explicit ConditionSlots(std::vector<std::optional<int>> slots) : slots_(std::move(slots)) {}

    static ConditionSlots null(int count) { return ConditionSlots(std::vector<std::optional<int>>(static_cast<size_t>(count))); }
    static ConditionSlots from(const AttributeVector& pa);

    int size() const { return static_cast<int>(slots_.size()); }
    const std::optional<int>& operator[](int i) const { return slots_.at(static_cast<size_t>(i)); }
    bool is_null(int i) const { return !slots_.at(static_cast<size_t>(i)).has_value(); }
    bool all_null() const;

    /// Throws ConfigError if the slot count or any value is out of range.
    void validate(const CausalGraph& graph) const;

    std::string to_string() const;

    friend bool operator==(const ConditionSlots&, const ConditionSlots&) = default;

private:
    std::vector<std::optional<int>> slots_;
};

/// Keeps the slots in `group` and nulls every other slot.
ConditionSlots mask(const ConditionSlots& s, const std::set<int>& group);

/// With probability p the whole condition becomes null, otherwise it is returned
/// unchanged. Never drops individual slots.
ConditionSlots dropout(const ConditionSlots& s, double p, Rng& rng);

/// Attribute-split embedding: one affine map per attribute from the one-hot
/// value to R^d, concatenated into R^{K·d}. Null slots embed to zeros.
class SplitEmbedder {
public:
    SplitEmbedder() = default;
    SplitEmbedder(std::vector<int> cardinalities, int width);

    /// Small random initialization; each block is d x cardinality plus a bias.
    static SplitEmbedder random(std::vector<int> cardinalities, int width, Rng& rng, double scale = 0.5);

    int attributes() const { return static_cast<int>(cards_.size()); }
    int width() const { return width_; }
    int output_size() const { return attributes() * width_; }
    const std::vector<int>& cardinalities() const { return cards_; }

    Mat& weights(int i) { return weights_.at(static_cast<size_t>(i)); }
    const Mat& weights(int i) const { return weights_.at(static_cast<size_t>(i)); }
    Vec& bias(int i) { return bias_.at(static_cast<size_t>(i)); }
    const Vec& bias(int i) const { return bias_.at(static_cast<size_t>(i)); }

    Vec embed(const ConditionSlots& s) const;

private:
    std::vector<int> cards_;
    int width_ = 0;
    std::vector<Mat> weights_;
    std::vector<Vec> bias_;
};

} // namespace dcfg
