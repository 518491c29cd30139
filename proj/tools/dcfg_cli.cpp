// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

// dcfg: train, cf, eval, sweep, selftest.

#include "dcfg/commands.hpp"
#include "dcfg/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    int jobs = 0;
    std::string backend;
    std::string checkpoint;
};

void add_common(CLI::App* cmd, Flags& f, bool needs_config) {
    auto* c = cmd->add_option("--config", f.config, "Run configuration (JSON)");
    if (needs_config) c->required();
    cmd->add_option("--seed", f.seed, "Seed for dataset sampling");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--backend", f.backend, "Denoiser backend")->check(CLI::IsMember({"analytic", "trained"}));
    cmd->add_option("--checkpoint", f.checkpoint, "Trained checkpoint path");
}

dcfg::RunConfig load(const Flags& f, CLI::App* cmd) {
    dcfg::RunConfig cfg = dcfg::load_config(f.config);
    dcfg::CliOverrides o;
    if (cmd->count("--seed")) o.seed = f.seed;
    if (cmd->count("--out")) o.out = f.out;
    if (cmd->count("--jobs")) o.jobs = f.jobs;
    if (cmd->count("--backend")) o.backend = f.backend;
    if (cmd->count("--checkpoint")) o.checkpoint = f.checkpoint;
    dcfg::apply_overrides(cfg, o);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decoupled classifier-free guidance on synthetic Gaussian-mixture worlds"};
    app.require_subcommand(1);

    Flags f;
    auto* train = app.add_subcommand("train", "Train the MLP denoiser");
    add_common(train, f, true);
    auto* cf = app.add_subcommand("cf", "Run one counterfactual batch");
    add_common(cf, f, true);
    auto* sweep = app.add_subcommand("sweep", "cf over the guidance grid, then eval");
    add_common(sweep, f, true);
    auto* eval = app.add_subcommand("eval", "Score batches against the omega = 1 baseline");
    std::vector<std::string> batches;
    std::string eval_out = "out";
    eval->add_option("batches", batches, "Batch directories or batch.csv files")->required();
    eval->add_option("--out", eval_out, "Output directory");
    auto* selftest = app.add_subcommand("selftest", "Run the quick invariant checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            dcfg::cmd_train(load(f, train), std::cout);
        } else if (cf->parsed()) {
            dcfg::cmd_counterfactual(load(f, cf), std::cout);
        } else if (sweep->parsed()) {
            dcfg::cmd_sweep(load(f, sweep), std::cout);
        } else if (eval->parsed()) {
            dcfg::cmd_evaluate(batches, eval_out, std::cout);
        } else if (selftest->parsed()) {
            return dcfg::cmd_selftest(std::cout) ? 0 : 3;
        }
    } catch (const dcfg::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const dcfg::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const dcfg::MissingBaselineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
