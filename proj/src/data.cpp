// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/data.hpp"

#include "dcfg/errors.hpp"
#include "dcfg/io.hpp"

#include <ostream>

namespace dcfg {

Dataset sample_dataset(const GMMWorld& world, int n, std::uint64_t seed) {
    require(n >= 1, "sample_dataset: n must be >= 1");
    Dataset ds;
    ds.world_fingerprint = world.fingerprint();
    ds.seed = seed;
    ds.items.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        AttributeSample a = sample_attributes(world.graph(), rng);
        Vec z = standard_normal(rng, world.dim());
        Vec x0 = world.mean(a.pa) + world.sigma0() * z;
        ds.items.push_back({std::move(x0), std::move(a.pa), std::move(a.u)});
    }
    return ds;
}

void write_dataset_csv(std::ostream& os, const GMMWorld& world, const Dataset& data) {
    const auto& g = world.graph();
    os << "item_id";
    for (const auto& n : g.nodes()) os << ",pa_" << n.name;
    for (const auto& n : g.nodes()) os << ",u_" << n.name;
    for (int d = 0; d < world.dim(); ++d) os << ",x_" << d;
    os << "\n";
    for (size_t i = 0; i < data.items.size(); ++i) {
        const auto& it = data.items[i];
        os << i;
        for (int v : it.pa) os << "," << v;
        for (int v : it.u) os << "," << v;
        for (Eigen::Index d = 0; d < it.x0.size(); ++d) os << "," << format_double(it.x0[d]);
        os << "\n";
    }
}

} // namespace dcfg
