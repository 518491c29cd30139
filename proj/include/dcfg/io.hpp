// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/counterfactual.hpp"
#include "dcfg/metrics.hpp"
#include "dcfg/sampler.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dcfg {

/// Shortest text that round-trips the double exactly ("%.17g").
std::string format_double(double v);

/// Batch CSV column order:
///   item_id, pa_<attr>..., cf_pa_<attr>..., x0_<d>..., xcf_<d>..., [xrev_<d>...],
///   post_<attr>_<value>...   (posterior of every value of every attribute on x̃)
void write_batch_csv(std::ostream& os, const BatchTable& batch);
BatchTable read_batch_csv(const std::string& path);

/// One row per state: item_id, phase, t, x_<d>...
void write_trajectory_csv(std::ostream& os, const std::vector<std::pair<size_t, Trajectory>>& items, int dim);

/// Report CSV: config, baseline, samples, world_fingerprint, config_hash,
/// auroc_<attr>, delta_<attr> (per attribute), rev_mae, mse_lpips_standin, comp_mae.
void write_report_csv(std::ostream& os, const std::vector<EvalReport>& reports);

/// Long-format rows (configuration, attribute, delta) for grouped bar charts.
void write_plot_csv(std::ostream& os, const std::vector<EvalReport>& reports);

/// Static grouped bar chart of Δ per attribute per configuration.
void write_delta_svg(std::ostream& os, const std::vector<EvalReport>& reports);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace dcfg
