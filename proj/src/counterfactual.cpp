// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/counterfactual.hpp"

#include "dcfg/errors.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace dcfg {

CounterfactualGuidance CounterfactualGuidance::cfg(double omega) {
    CounterfactualGuidance g;
    g.kind = Kind::Cfg;
    g.omega = omega;
    return g;
}

CounterfactualGuidance CounterfactualGuidance::dcfg(double omega_aff, double omega_inv, std::set<int> pinned) {
    CounterfactualGuidance g;
    g.kind = Kind::DcfgPartition;
    g.omega_aff = omega_aff;
    g.omega_inv = omega_inv;
    g.pinned = std::move(pinned);
    return g;
}

CounterfactualGuidance CounterfactualGuidance::explicit_groups(GuidanceSpec spec) {
    CounterfactualGuidance g;
    g.kind = Kind::DcfgGroups;
    g.groups = std::move(spec);
    return g;
}

Guidance CounterfactualGuidance::resolve(const Partition& part, int attributes) const {
    switch (kind) {
    case Kind::None: return NoGuidance{};
    case Kind::Cfg: return CfgGuidance{omega};
    case Kind::DcfgGroups: return DcfgGuidance{groups};
    case Kind::DcfgPartition: break;
    }
    // Pinning applies to invariant attributes only; an intervened attribute is always affected.
    std::set<int> pinned_inv;
    std::set_intersection(pinned.begin(), pinned.end(), part.invariant.begin(), part.invariant.end(),
                          std::inserter(pinned_inv, pinned_inv.end()));
    std::set<int> free_inv;
    std::set_difference(part.invariant.begin(), part.invariant.end(), pinned_inv.begin(), pinned_inv.end(),
                        std::inserter(free_inv, free_inv.end()));
    std::vector<GuidanceGroup> out;
    if (!part.affected.empty()) out.push_back({part.affected, omega_aff});
    if (!free_inv.empty()) out.push_back({free_inv, omega_inv});
    if (!pinned_inv.empty()) out.push_back({pinned_inv, 1.0});
    return DcfgGuidance{GuidanceSpec(std::move(out), attributes)};
}

bool CounterfactualGuidance::is_baseline() const {
    return kind == Kind::None || (kind == Kind::Cfg && omega == 1.0);
}

std::string CounterfactualGuidance::label() const {
    std::ostringstream os;
    switch (kind) {
    case Kind::None: os << "none"; break;
    case Kind::Cfg: os << "cfg_w" << omega; break;
    case Kind::DcfgPartition: os << "dcfg_aff" << omega_aff << "_inv" << omega_inv; break;
    case Kind::DcfgGroups: os << describe(Guidance{DcfgGuidance{groups}}); break;
    }
    return os.str();
}

namespace {

ConditionSlots abduction_slots(const AttributeVector& pa, const CounterfactualOptions& opts) {
    return opts.null_abduction ? ConditionSlots::null(static_cast<int>(pa.size())) : ConditionSlots::from(pa);
}

Vec abduct(const Denoiser& model, const Guidance& prediction_guidance, const Vec& x0, const AttributeVector& pa,
           const TimestepGrid& grid, const CounterfactualOptions& opts) {
    Guidance g = opts.guided_inversion ? prediction_guidance : Guidance{NoGuidance{}};
    return invert(model, g, x0, abduction_slots(pa, opts), grid).final_state();
}

} // namespace

CounterfactualRecord counterfactual(const Denoiser& model, const CausalGraph& graph, const Intervention& iv,
                                    const Vec& x0, const AttributeVector& pa, const ExogenousVector& u_attr,
                                    const CounterfactualGuidance& mode, const CounterfactualOptions& opts) {
    require(static_cast<int>(pa.size()) == graph.size(), "counterfactual: attribute vector length mismatch");
    require(x0.size() == model.dim(), "counterfactual: dimension mismatch");
    const TimestepGrid grid = make_grid(model.schedule().steps(), opts.stride);

    CounterfactualRecord rec;
    rec.x0 = x0;
    rec.pa = pa;
    rec.u_attr = u_attr;
    rec.intervention = iv;
    rec.partition = partition(graph, iv);
    rec.cf_pa = counterfactual_attributes(graph, pa, u_attr, iv);

    Guidance g = mode.resolve(rec.partition, graph.size());
    rec.guidance = describe(g);
    rec.u_img = abduct(model, g, x0, pa, grid, opts);
    rec.x_cf = generate(model, g, rec.u_img, ConditionSlots::from(rec.cf_pa), grid).final_state();
    return rec;
}

Vec reverse(const Denoiser& model, const CausalGraph& graph, const CounterfactualRecord& rec,
            const CounterfactualGuidance& mode, const CounterfactualOptions& opts) {
    Intervention back;
    for (const auto& [i, _] : rec.intervention.assignments)
        back.assignments[i] = rec.pa[static_cast<size_t>(i)];
    CounterfactualRecord r = counterfactual(model, graph, back, rec.x_cf, rec.cf_pa, rec.u_attr, mode, opts);
    return r.x_cf;
}

std::vector<CounterfactualRecord> run_batch(const Denoiser& model, const CausalGraph& graph, const Dataset& data,
                                            const BatchSpec& spec) {
    const size_t n = data.items.size();
    std::vector<CounterfactualRecord> out(n);
    const CounterfactualGuidance& rev_mode = spec.reverse_mode ? *spec.reverse_mode : spec.mode;

    auto run_item = [&](size_t i) {
        const auto& item = data.items[i];
        Intervention iv = spec.intervention.resolve(item.pa);
        CounterfactualRecord rec =
            counterfactual(model, graph, iv, item.x0, item.pa, item.u, spec.mode, spec.options);
        if (spec.with_reverse) rec.x_rev = reverse(model, graph, rec, rev_mode, spec.options);
        out[i] = std::move(rec);
    };

    std::mutex err_mutex;
    std::exception_ptr first_error;
    size_t first_index = n;
    auto worker = [&](size_t begin, size_t step) {
        for (size_t i = begin; i < n; i += step) {
            try {
                run_item(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (i < first_index) {
                    first_index = i;
                    first_error = std::current_exception();
                }
                return;
            }
        }
    };

    const size_t jobs = static_cast<size_t>(std::max(1, spec.jobs));
    if (jobs == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> threads;
        for (size_t j = 0; j < jobs; ++j) threads.emplace_back(worker, j, jobs);
        for (auto& t : threads) t.join();
    }

    if (first_error) {
        const std::string where = "item " + std::to_string(first_index) + ": ";
        try {
            std::rethrow_exception(first_error);
        } catch (const NumericalError& e) {
            throw NumericalError(where + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return out;
}

} // namespace dcfg
