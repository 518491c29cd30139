// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/world.hpp"

#include "dcfg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace dcfg {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_string(MeansPolicy p) {
    switch (p) {
    case MeansPolicy::Axis: return "axis";
    case MeansPolicy::Projection: return "projection";
    case MeansPolicy::Explicit: return "explicit";
    }
    return "?";
}

MeansPolicy means_policy_from_string(const std::string& name) {
    if (name == "axis") return MeansPolicy::Axis;
    if (name == "projection") return MeansPolicy::Projection;
    if (name == "explicit") return MeansPolicy::Explicit;
    throw ConfigError("unknown means policy '" + name + "' (expected axis|projection|explicit)");
}

GMMWorld::GMMWorld(CausalGraph graph, int dim, std::map<AttributeVector, Vec> means, double sigma0)
    : graph_(std::move(graph)), dim_(dim), sigma0_(sigma0) {
    require(dim_ >= 1, "world: dimension must be >= 1");
    require(std::isfinite(sigma0_) && sigma0_ >= 0.0, "world: sigma0 must be finite and >= 0");
    for (auto& [pa, prior] : graph_.support()) {
        auto it = means.find(pa);
        if (it == means.end()) {
            std::ostringstream os;
            os << "world: no mean for supported assignment (";
            for (size_t i = 0; i < pa.size(); ++i) os << (i ? "," : "") << pa[i];
            os << ")";
            throw ConfigError(os.str());
        }
        require(it->second.size() == dim_, "world: mean has wrong dimension");
        require(it->second.allFinite(), "world: mean is not finite");
        components_.push_back({pa, prior, it->second});
    }
}

GMMWorld GMMWorld::with_policy(CausalGraph graph, int dim, MeansPolicy policy, double scale,
                               double sigma0, std::uint64_t projection_seed) {
    require(policy != MeansPolicy::Explicit, "world: explicit means need a means table");
    const int k = graph.size();
    Mat m = Mat::Zero(dim, k);
    if (policy == MeansPolicy::Axis) {
        require(k <= dim, "world: axis means need K <= D; use the projection policy");
        for (int i = 0; i < k; ++i) m(i, i) = 1.0;
    } else {
        const int n = std::max(dim, k);
        Rng rng(projection_seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        Mat g(n, n);
        for (int c = 0; c < n; ++c)
            for (int r = 0; r < n; ++r) g(r, c) = normal(rng);
        Eigen::HouseholderQR<Mat> qr(g);
        Mat q = qr.householderQ() * Mat::Identity(n, n);
        m = q.topLeftCorner(dim, k);
    }
    std::map<AttributeVector, Vec> means;
    for (const auto& [pa, _] : graph.support()) {
        Vec code(k);
        for (int i = 0; i < k; ++i)
            code[i] = 2.0 * pa[static_cast<size_t>(i)] / (graph.node(i).cardinality - 1) - 1.0;
        means[pa] = scale * (m * code);
    }
    return GMMWorld(std::move(graph), dim, std::move(means), sigma0);
}

const Vec& GMMWorld::mean(const AttributeVector& pa) const {
    for (const auto& c : components_)
        if (c.pa == pa) return c.mean;
    throw ConfigError("world: assignment has zero prior probability");
}

std::uint64_t GMMWorld::fingerprint() const {
    std::ostringstream os;
    os.precision(17);
    os << "D=" << dim_ << ";sigma0=" << sigma0_ << ";nodes=";
    for (const auto& n : graph_.nodes()) os << n.name << ":" << n.cardinality << ",";
    os << ";edges=";
    for (const auto& [a, b] : graph_.edges()) os << a << ">" << b << ",";
    os << ";priors=";
    for (const auto& [name, p] : graph_.root_priors()) {
        os << name << "[";
        for (double q : p) os << q << ",";
        os << "]";
    }
    os << ";mechanisms=";
    for (const auto& [name, m] : graph_.mechanisms()) {
        os << name << "/" << m.exogenous_cardinality << "[";
        for (int v : m.table) os << v << ",";
        os << "]";
    }
    os << ";means=";
    for (const auto& c : components_) {
        for (int v : c.pa) os << v;
        os << "(";
        for (Eigen::Index d = 0; d < c.mean.size(); ++d) os << c.mean[d] << ",";
        os << ")";
    }
    return fnv1a64(os.str());
}

std::string GMMWorld::fingerprint_hex() const { return hex64(fingerprint()); }

std::vector<double> bayes_posterior(const GMMWorld& world, const Vec& x0, int attribute) {
    require(attribute >= 0 && attribute < world.attributes(), "bayes_posterior: attribute out of range");
    require(x0.size() == world.dim(), "bayes_posterior: dimension mismatch");
    require(x0.allFinite(), "bayes_posterior: non-finite input");
    require(world.sigma0() > 0.0, "bayes_posterior: needs sigma0 > 0");
    const double inv2var = 1.0 / (2.0 * world.sigma0() * world.sigma0());
    const auto& comps = world.components();
    std::vector<double> logw(comps.size());
    double top = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < comps.size(); ++j) {
        logw[j] = std::log(comps[j].prior) - (x0 - comps[j].mean).squaredNorm() * inv2var;
        top = std::max(top, logw[j]);
    }
    std::vector<double> post(static_cast<size_t>(world.graph().node(attribute).cardinality), 0.0);
    double total = 0.0;
    for (size_t j = 0; j < comps.size(); ++j) {
        double w = std::exp(logw[j] - top);
        post[static_cast<size_t>(comps[j].pa[static_cast<size_t>(attribute)])] += w;
        total += w;
    }
    for (double& p : post) p /= total;
    return post;
}

double bayes_score(const GMMWorld& world, const Vec& x0, int attribute) {
    auto post = bayes_posterior(world, x0, attribute);
    return post.back();
}

namespace builtin {

std::vector<std::string> world_names() { return {"independent2", "independent3", "age_finding"}; }

GMMWorld world(const std::string& name, int dim, double scale, double sigma0, std::uint64_t projection_seed) {
    auto pick = [&](CausalGraph g) {
        MeansPolicy p = g.size() <= dim ? MeansPolicy::Axis : MeansPolicy::Projection;
        return GMMWorld::with_policy(std::move(g), dim, p, scale, sigma0, projection_seed);
    };
    if (name == "independent2") return pick(independent_binary(2));
    if (name == "independent3") return pick(independent_binary(3));
    if (name == "age_finding") return pick(age_finding());
    throw ConfigError("unknown built-in world '" + name + "'");
}

} // namespace builtin

} // namespace dcfg
