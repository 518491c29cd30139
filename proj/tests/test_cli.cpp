// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dcfg/commands.hpp"
#include "dcfg/errors.hpp"
#include "dcfg/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace dcfg;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("dcfg_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json base_config() {
    return json::parse(read_file(std::string(DCFG_CONFIG_DIR) + "/default.json"));
}

std::string write_config(const fs::path& dir, const json& j) {
    const auto path = (dir / "config.json").string();
    write_file(path, j.dump(2));
    return path;
}

int run(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(DCFG_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_error(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("config defaults and normalization") {
    auto cfg = parse_config(base_config());
    CHECK(cfg.steps == 200);
    CHECK(cfg.samples == 500);
    CHECK(cfg.guidance.mode == "dcfg");
    CHECK(cfg.intervention.size() == 1);
    CHECK_FALSE(cfg.intervention[0].value.has_value());
    // Normalizing twice gives the same hash.
    auto again = parse_config(cfg.to_json());
    CHECK(again.hash() == cfg.hash());
    auto j = base_config();
    j["seed"] = 99;
    CHECK(parse_config(j).hash() != cfg.hash());
}

TEST_CASE("config validation names the key") {
    auto j = base_config();
    j["sampels"] = 3;
    CHECK(config_error(j).find("sampels") != std::string::npos);

    j = base_config();
    j["schema_version"] = 7;
    CHECK(config_error(j).find("schema_version") != std::string::npos);

    j = base_config();
    j["guidance"]["omega_aff"] = -1;
    CHECK(config_error(j).find("guidance") != std::string::npos);

    j = base_config();
    j["intervention"] = json::array({{{"attribute", "a9"}, {"value", 1}}});
    CHECK_FALSE(config_error(j).empty());

    j = base_config();
    j["training"] = {{"groupwise_dropout", true}};
    CHECK(config_error(j).find("groupwise_dropout") != std::string::npos);

    j = base_config();
    j["sampler"] = {{"stride", 0}};
    CHECK(config_error(j).find("stride") != std::string::npos);
}

TEST_CASE("cyclic graph in the config") {
    auto j = base_config();
    j["world"] = json::parse(R"({"graph": {"nodes": [{"name": "x"}, {"name": "y"}],
                                           "edges": [["x", "y"], ["y", "x"]],
                                           "mechanisms": {"x": {"exogenous_cardinality": 1, "table": [0, 1]},
                                                          "y": {"exogenous_cardinality": 1, "table": [0, 1]}}},
                                 "dim": 2})");
    j["intervention"] = json::array({{{"attribute", "x"}, {"value", 1}}});
    const auto msg = config_error(j);
    CHECK(msg.find("cycle") != std::string::npos);
    CHECK(msg.find("x -> y -> x") != std::string::npos);
}

TEST_CASE("explicit graph round trip") {
    auto g = builtin::age_finding();
    auto back = graph_from_json(graph_to_json(g));
    CHECK(back.size() == g.size());
    CHECK(back.edges() == g.edges());
    for (const auto& [pa, p] : g.support()) CHECK(back.joint_probability(pa) == p);
}

TEST_CASE("guidance resolution") {
    auto j = base_config();
    j["guidance"] = {{"mode", "dcfg_groups"}, {"groups", {{{"attributes", {"a1"}}, {"weight", 2.0}}}}};
    auto cfg = parse_config(j);
    REQUIRE(cfg.warnings.size() == 1);
    CHECK(cfg.warnings[0].find("no group") != std::string::npos);

    auto g = builtin::age_finding();
    GuidanceConfig dc;
    dc.mode = "dcfg";
    dc.omega_aff = 2.0;
    CHECK(resolve_guidance(dc, g).pinned == std::set<int>{g.index_of("age")});
    dc.pinned = std::vector<std::string>{};
    CHECK(resolve_guidance(dc, g).pinned.empty());
}

TEST_CASE("cf is byte-identical for a fixed seed") {
    auto dir = scratch("det");
    auto j = base_config();
    j["samples"] = 10;
    const auto cfg = write_config(dir, j);
    REQUIRE(run("cf --config " + cfg + " --seed 7 --out " + (dir / "a").string(), dir / "log") == 0);
    REQUIRE(run("cf --config " + cfg + " --seed 7 --out " + (dir / "b").string() + " --jobs 3", dir / "log") == 0);
    const auto a = read_file((dir / "a" / "batch.csv").string());
    CHECK(a == read_file((dir / "b" / "batch.csv").string()));
    std::istringstream is(a);
    int lines = 0;
    for (std::string l; std::getline(is, l);) ++lines;
    CHECK(lines == 11);
    auto m = json::parse(read_file((dir / "a" / "manifest.json").string()));
    CHECK(m["seed"] == 7);
    CHECK(m["config_hash"].get<std::string>().size() == 16);
    CHECK(m.contains("versions"));
}

TEST_CASE("empty intervention emits composition diagnostics") {
    auto dir = scratch("empty");
    auto j = base_config();
    j["samples"] = 10;
    j["intervention"] = json::array();
    j["guidance"] = {{"mode", "none"}};
    auto cfg = parse_config(j);
    cfg.output_dir = (dir / "cf").string();
    std::ostringstream log;
    cmd_counterfactual(cfg, log);
    auto m = json::parse(read_file((dir / "cf" / "manifest.json").string()));
    REQUIRE(m.contains("composition_mae"));
    CHECK(m["composition_mae"].get<double>() < 0.02);
    auto reports = cmd_evaluate({cfg.output_dir}, (dir / "ev").string(), log);
    REQUIRE(reports[0].comp_mae);
    CHECK(*reports[0].comp_mae < 0.02);
}

TEST_CASE("eval contracts") {
    auto dir = scratch("eval");
    auto j = base_config();
    j["samples"] = 40;
    j["guidance"] = {{"mode", "cfg"}, {"omega", 1.0}};
    const auto base_cfg = write_config(dir, j);
    REQUIRE(run("cf --config " + base_cfg + " --out " + (dir / "base").string(), dir / "log") == 0);
    REQUIRE(run("eval " + (dir / "base").string() + " --out " + (dir / "ev").string(), dir / "log") == 0);
    std::ostringstream log;
    auto reports = cmd_evaluate({(dir / "base").string()}, (dir / "ev2").string(), log);
    for (const auto& d : reports[0].delta) CHECK(*d == 0.0);
    CHECK(fs::exists(dir / "ev" / "plot.csv"));
    CHECK(read_file((dir / "ev" / "plot.csv").string()).rfind("configuration,attribute,delta\n", 0) == 0);

    j["guidance"] = {{"mode", "cfg"}, {"omega", 2.0}};
    write_config(dir, j);
    REQUIRE(run("cf --config " + (dir / "config.json").string() + " --out " + (dir / "strong").string(), dir / "log") == 0);
    CHECK(run("eval " + (dir / "strong").string() + " --out " + (dir / "ev3").string(), dir / "log") == 4);

    j["world"]["sigma0"] = 0.8;
    write_config(dir, j);
    REQUIRE(run("cf --config " + (dir / "config.json").string() + " --out " + (dir / "other").string(), dir / "log") == 0);
    CHECK(run("eval " + (dir / "base").string() + " " + (dir / "other").string() + " --out " + (dir / "ev4").string(),
              dir / "log") == 2);
    const auto msg = read_file((dir / "log").string());
    const auto fp_base = json::parse(read_file((dir / "base" / "manifest.json").string()))["world_fingerprint"].get<std::string>();
    const auto fp_other = json::parse(read_file((dir / "other" / "manifest.json").string()))["world_fingerprint"].get<std::string>();
    CHECK(fp_base != fp_other);
    CHECK(msg.find(fp_base) != std::string::npos);
    CHECK(msg.find(fp_other) != std::string::npos);
}

TEST_CASE("sweep writes one batch per setting") {
    auto dir = scratch("sweep");
    auto j = base_config();
    j["samples"] = 30;
    j["sampler"] = {{"stride", 4}};
    auto cfg = parse_config(j);
    cfg.output_dir = dir.string();
    cfg.jobs = 4;
    std::ostringstream log;
    auto reports = cmd_sweep(cfg, log);
    CHECK(reports.size() == cfg.sweep.cfg_weights.size() + cfg.sweep.dcfg_pairs.size());
    for (const auto& r : reports) CHECK(fs::exists(dir / r.label / "batch.csv"));
    CHECK(fs::exists(dir / "report.csv"));
    CHECK(fs::exists(dir / "delta.svg"));
    CHECK(fs::exists(dir / "cfg_w1"));
    CHECK(fs::exists(dir / "dcfg_aff3_inv1.2"));
}

TEST_CASE("exit codes") {
    auto dir = scratch("exit");
    CHECK(run("cf --config " + (dir / "missing.json").string(), dir / "log") == 2);
    write_file((dir / "bad.json").string(), "{ not json");
    CHECK(run("cf --config " + (dir / "bad.json").string(), dir / "log") == 2);
    auto j = base_config();
    j["training"] = {{"steps", 50}, {"learning_rate", 100.0}, {"hidden_width", 16}, {"batch_size", 16}, {"train_size", 64}};
    j["backend"] = {{"kind", "trained"}};
    const auto cfg = write_config(dir, j);
    CHECK(run("train --config " + cfg + " --out " + (dir / "t").string(), dir / "log") == 3);
    CHECK(run("cf --config " + cfg + " --backend analytic --jobs 0", dir / "log") != 0);
    CHECK(run("cf --config " + cfg + " --checkpoint " + (dir / "nothere.json").string(), dir / "log") == 2);
}

TEST_CASE("train then counterfactuals with the trained backend") {
    auto dir = scratch("train");
    auto j = base_config();
    j["backend"] = {{"kind", "trained"}, {"checkpoint", (dir / "ck.json").string()}};
    j["training"] = {{"steps", 300}, {"hidden_width", 32}, {"batch_size", 64}, {"train_size", 256}};
    j["samples"] = 5;
    j["sampler"] = {{"stride", 10}};
    const auto cfg = write_config(dir, j);
    REQUIRE(run("train --config " + cfg + " --out " + (dir / "t").string(), dir / "log") == 0);
    CHECK(fs::exists(dir / "ck.json"));
    CHECK(fs::exists(dir / "t" / "loss_trace.csv"));
    auto ck = json::parse(read_file((dir / "ck.json").string()));
    CHECK(ck["training"]["p_null"] == 0.5);
    REQUIRE(run("cf --config " + cfg + " --out " + (dir / "cf").string(), dir / "log") == 0);
    CHECK(fs::exists(dir / "cf" / "batch.csv"));

    // A checkpoint trained on another world is refused.
    j["world"]["sigma0"] = 0.9;
    write_config(dir, j);
    CHECK(run("cf --config " + cfg + " --out " + (dir / "cf2").string(), dir / "log") == 2);
    CHECK(read_file((dir / "log").string()).find("world") != std::string::npos);
}

TEST_CASE("selftest") {
    auto dir = scratch("self");
    CHECK(run("selftest", dir / "log") == 0);
}

TEST_CASE("train smoke on the shipped training config") {
    auto dir = scratch("train_default");
    const std::string cfg = std::string(DCFG_CONFIG_DIR) + "/train.json";
    REQUIRE(run("train --config " + cfg + " --out " + dir.string() + " --checkpoint " + (dir / "ck.json").string(),
                dir / "log") == 0);
    CHECK(fs::exists(dir / "ck.json"));
    std::istringstream is(read_file((dir / "loss_trace.csv").string()));
    std::string line;
    std::getline(is, line);
    std::vector<double> loss;
    while (std::getline(is, line)) loss.push_back(std::stod(line.substr(line.find(',') + 1)));
    REQUIRE(loss.size() >= 100);
    double first = 0, last = 0;
    const size_t tail = loss.size() / 10;
    for (size_t i = 0; i < 50; ++i) first += loss[i] / 50;
    for (size_t i = loss.size() - tail; i < loss.size(); ++i) last += loss[i] / static_cast<double>(tail);
    CHECK(last < 0.5 * first);
}
