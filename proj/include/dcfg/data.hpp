// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/world.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace dcfg {

struct DatasetItem {
    Vec x0;
    AttributeVector pa;
    ExogenousVector u;
};

struct Dataset {
    std::vector<DatasetItem> items;
    std::uint64_t world_fingerprint = 0;
    std::uint64_t seed = 0;

    size_t size() const { return items.size(); }
};

/// Item i draws from its own stream mix_seed(seed, i): pa by ancestral sampling,
/// then x0 = μ(pa) + σ0 z.
Dataset sample_dataset(const GMMWorld& world, int n, std::uint64_t seed);

/// Columns: item_id, pa_<name>..., u_<name>..., x_0..x_{D-1}.
void write_dataset_csv(std::ostream& os, const GMMWorld& world, const Dataset& data);

} // namespace dcfg
