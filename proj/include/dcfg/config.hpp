// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/counterfactual.hpp"
#include "dcfg/mlp.hpp"
#include "dcfg/world.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dcfg {

inline constexpr int kConfigSchemaVersion = 1;

/// A guidance setting as written in the config, before attribute names are resolved.
struct GuidanceConfig {
    std::string mode = "none";  // none | cfg | dcfg | dcfg_groups
    double omega = 1.0;
    double omega_aff = 1.0;
    double omega_inv = 1.0;
    std::optional<std::vector<std::string>> pinned;
    std::vector<std::pair<std::vector<std::string>, double>> groups;
};

struct SweepConfig {
    std::vector<double> cfg_weights{1.0, 1.2, 1.5, 1.7, 2.0, 2.5, 3.0};
    std::vector<std::pair<double, double>> dcfg_pairs{{1.2, 1.0}, {1.5, 1.2}, {1.7, 1.2},
                                                      {2.0, 1.2}, {2.5, 1.2}, {3.0, 1.2}};
};

/// Fully validated run configuration.
struct RunConfig {
    nlohmann::json world_json;
    std::string world_builtin;  // empty for an explicit graph
    ScheduleKind schedule_kind = ScheduleKind::Linear;
    int steps = 200;
    double beta_min = NoiseSchedule::kDefaultBetaMin;
    double beta_max = NoiseSchedule::kDefaultBetaMax;
    std::string backend = "analytic";
    std::string checkpoint;
    std::vector<InterventionTarget> intervention;
    GuidanceConfig guidance;
    std::optional<GuidanceConfig> reverse_guidance;
    CounterfactualOptions sampler;
    SweepConfig sweep;
    TrainingConfig training;
    int samples = 500;
    std::uint64_t seed = 0;
    int jobs = 1;
    bool trajectories = false;
    std::string output_dir = "out";
    std::vector<std::string> warnings;

    /// Normalized JSON of every setting (defaults filled in).
    nlohmann::json to_json() const;
    std::string hash() const;
};

/// Parses and validates; every problem is a ConfigError naming the offending key.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

GMMWorld build_world(const RunConfig& cfg);
NoiseSchedule build_schedule(const RunConfig& cfg);

/// Analytic oracle or a checkpoint-backed MLP; the checkpoint must match the
/// world fingerprint and schedule.
std::unique_ptr<Denoiser> build_backend(const RunConfig& cfg, const GMMWorld& world, const NoiseSchedule& sched);

CounterfactualGuidance resolve_guidance(const GuidanceConfig& g, const CausalGraph& graph,
                                        std::vector<std::string>* warnings = nullptr);

/// Graph description <-> JSON (nodes, edges, priors, mechanisms as flat tables).
CausalGraph graph_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const CausalGraph& g);

} // namespace dcfg
