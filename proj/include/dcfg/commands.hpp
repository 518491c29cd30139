// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/config.hpp"
#include "dcfg/metrics.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dcfg {

/// Command-line flags that take precedence over the config file.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> jobs;
    std::optional<std::string> backend;
    std::optional<std::string> checkpoint;
};

void apply_overrides(RunConfig& cfg, const CliOverrides& o);

/// Trains the MLP backend; writes the checkpoint and loss_trace.csv.
void cmd_train(const RunConfig& cfg, std::ostream& log);

/// One counterfactual batch under cfg.guidance into out_dir:
/// batch.csv, manifest.json and optionally trajectories.csv.
void cmd_counterfactual(const RunConfig& cfg, std::ostream& log);

/// Reads batches (directories holding batch.csv + manifest.json, or batch.csv
/// paths) and writes report.csv, plot.csv and delta.svg into out_dir.
std::vector<EvalReport> cmd_evaluate(const std::vector<std::string>& batches, const std::string& out_dir,
                                     std::ostream& log);

/// cf over the CFG weight grid and DCFG pairs, one directory per setting, then evaluate.
std::vector<EvalReport> cmd_sweep(const RunConfig& cfg, std::ostream& log);

/// Quick invariant checks; returns true when all pass.
bool cmd_selftest(std::ostream& log);

} // namespace dcfg
