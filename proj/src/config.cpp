// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/config.hpp"

#include "dcfg/errors.hpp"
#include "dcfg/io.hpp"

#include <cmath>
#include <set>

namespace dcfg {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    require(j.is_object(), where + ": expected an object");
    for (const auto& [k, _] : j.items())
        require(allowed.count(k) > 0, where + ": unknown key '" + k + "'");
}

template <typename T>
T get_or(const json& j, const std::string& key, const std::string& where, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

GuidanceConfig parse_guidance(const json& j, const std::string& where) {
    check_keys(j, where, {"mode", "omega", "omega_aff", "omega_inv", "pinned", "groups"});
    GuidanceConfig g;
    g.mode = get_or<std::string>(j, "mode", where, "none");
    require(g.mode == "none" || g.mode == "cfg" || g.mode == "dcfg" || g.mode == "dcfg_groups",
            where + ".mode: expected none|cfg|dcfg|dcfg_groups");
    g.omega = get_or<double>(j, "omega", where, 1.0);
    g.omega_aff = get_or<double>(j, "omega_aff", where, 1.0);
    g.omega_inv = get_or<double>(j, "omega_inv", where, 1.0);
    for (double w : {g.omega, g.omega_aff, g.omega_inv})
        require(std::isfinite(w) && w >= 0.0, where + ": guidance weights must be finite and >= 0");
    if (j.contains("pinned")) g.pinned = get_or<std::vector<std::string>>(j, "pinned", where, {});
    if (j.contains("groups")) {
        require(j.at("groups").is_array(), where + ".groups: expected a list");
        for (const auto& gj : j.at("groups")) {
            check_keys(gj, where + ".groups[]", {"attributes", "weight"});
            auto names = get_or<std::vector<std::string>>(gj, "attributes", where + ".groups[]", {});
            double w = get_or<double>(gj, "weight", where + ".groups[]", 1.0);
            require(std::isfinite(w) && w >= 0.0, where + ".groups[]: weight must be finite and >= 0");
            g.groups.emplace_back(std::move(names), w);
        }
    }
    require(g.mode != "dcfg_groups" || !g.groups.empty(), where + ": dcfg_groups needs a non-empty groups list");
    return g;
}

json guidance_to_json(const GuidanceConfig& g) {
    json j{{"mode", g.mode}, {"omega", g.omega}, {"omega_aff", g.omega_aff}, {"omega_inv", g.omega_inv}};
    if (g.pinned) j["pinned"] = *g.pinned;
    if (!g.groups.empty()) {
        json arr = json::array();
        for (const auto& [names, w] : g.groups) arr.push_back({{"attributes", names}, {"weight", w}});
        j["groups"] = arr;
    }
    return j;
}

json normalize_world(const json& j) {
    check_keys(j, "world", {"builtin", "graph", "dim", "scale", "sigma0", "means_policy", "projection_seed", "means"});
    require(j.contains("builtin") != j.contains("graph"), "world: give exactly one of 'builtin' or 'graph'");
    json out = j;
    out["dim"] = get_or<int>(j, "dim", "world", GMMWorld::kDefaultDim);
    out["scale"] = get_or<double>(j, "scale", "world", GMMWorld::kDefaultScale);
    out["sigma0"] = get_or<double>(j, "sigma0", "world", GMMWorld::kDefaultSigma0);
    out["projection_seed"] = get_or<std::uint64_t>(j, "projection_seed", "world", 0);
    return out;
}

} // namespace

CausalGraph graph_from_json(const json& j) {
    check_keys(j, "graph", {"nodes", "edges", "priors", "mechanisms"});
    try {
        std::vector<AttributeSpec> nodes;
        for (const auto& n : j.at("nodes")) {
            check_keys(n, "graph.nodes[]", {"name", "cardinality"});
            nodes.push_back({n.at("name").get<std::string>(), n.value("cardinality", 2)});
        }
        std::vector<std::pair<std::string, std::string>> edges;
        if (j.contains("edges"))
            for (const auto& e : j.at("edges")) {
                require(e.is_array() && e.size() == 2, "graph.edges: each edge is [parent, child]");
                edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
            }
        std::map<std::string, std::vector<double>> priors;
        if (j.contains("priors"))
            for (const auto& [name, p] : j.at("priors").items()) priors[name] = p.get<std::vector<double>>();
        std::map<std::string, Mechanism> mechs;
        if (j.contains("mechanisms"))
            for (const auto& [name, m] : j.at("mechanisms").items()) {
                check_keys(m, "graph.mechanisms." + name, {"exogenous_cardinality", "table"});
                mechs[name] = Mechanism{m.value("exogenous_cardinality", 2), m.at("table").get<std::vector<int>>()};
            }
        return CausalGraph(std::move(nodes), std::move(edges), std::move(priors), std::move(mechs));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("graph: malformed description: ") + e.what());
    }
}

json graph_to_json(const CausalGraph& g) {
    json nodes = json::array();
    for (const auto& n : g.nodes()) nodes.push_back({{"name", n.name}, {"cardinality", n.cardinality}});
    json edges = json::array();
    for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
    json priors = json::object();
    for (const auto& [n, p] : g.root_priors()) priors[n] = p;
    json mechs = json::object();
    for (const auto& [n, m] : g.mechanisms())
        mechs[n] = {{"exogenous_cardinality", m.exogenous_cardinality}, {"table", m.table}};
    return {{"nodes", nodes}, {"edges", edges}, {"priors", priors}, {"mechanisms", mechs}};
}

RunConfig parse_config(const json& j) {
    check_keys(j, "config", {"schema_version", "world", "schedule", "backend", "intervention", "guidance",
                             "reverse_guidance", "sampler", "sweep", "training", "samples", "seed", "jobs",
                             "trajectories", "output_dir"});
    require(j.contains("schema_version"), "config: missing schema_version");
    require(j.at("schema_version") == kConfigSchemaVersion,
            "config: unsupported schema_version (expected " + std::to_string(kConfigSchemaVersion) + ")");
    RunConfig c;

    c.world_json = normalize_world(j.value("world", json{{"builtin", "independent2"}}));
    if (c.world_json.contains("builtin")) c.world_builtin = c.world_json.at("builtin").get<std::string>();

    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        check_keys(s, "schedule", {"kind", "T", "beta_min", "beta_max"});
        c.schedule_kind = schedule_kind_from_string(get_or<std::string>(s, "kind", "schedule", "linear"));
        c.steps = get_or<int>(s, "T", "schedule", c.steps);
        c.beta_min = get_or<double>(s, "beta_min", "schedule", c.beta_min);
        c.beta_max = get_or<double>(s, "beta_max", "schedule", c.beta_max);
    }
    if (j.contains("backend")) {
        const auto& b = j.at("backend");
        check_keys(b, "backend", {"kind", "checkpoint"});
        c.backend = get_or<std::string>(b, "kind", "backend", "analytic");
        c.checkpoint = get_or<std::string>(b, "checkpoint", "backend", "");
    }
    require(c.backend == "analytic" || c.backend == "trained", "backend.kind: expected analytic|trained");

    if (j.contains("intervention")) {
        require(j.at("intervention").is_array(), "intervention: expected a list");
        for (const auto& e : j.at("intervention")) {
            check_keys(e, "intervention[]", {"attribute", "value"});
            InterventionTarget t;
            t.attribute = get_or<std::string>(e, "attribute", "intervention[]", "");
            require(!t.attribute.empty(), "intervention[]: missing attribute");
            const auto& v = e.value("value", json("flip"));
            if (v.is_string()) {
                require(v.get<std::string>() == "flip", "intervention[].value: expected an integer or \"flip\"");
            } else {
                require(v.is_number_integer(), "intervention[].value: expected an integer or \"flip\"");
                t.value = v.get<int>();
            }
            c.intervention.push_back(std::move(t));
        }
    }
    if (j.contains("guidance")) c.guidance = parse_guidance(j.at("guidance"), "guidance");
    if (j.contains("reverse_guidance")) c.reverse_guidance = parse_guidance(j.at("reverse_guidance"), "reverse_guidance");

    if (j.contains("sampler")) {
        const auto& s = j.at("sampler");
        check_keys(s, "sampler", {"stride", "guided_inversion", "null_abduction"});
        c.sampler.stride = get_or<int>(s, "stride", "sampler", 1);
        c.sampler.guided_inversion = get_or<bool>(s, "guided_inversion", "sampler", false);
        c.sampler.null_abduction = get_or<bool>(s, "null_abduction", "sampler", false);
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        check_keys(s, "sweep", {"cfg_weights", "dcfg_pairs"});
        c.sweep.cfg_weights = get_or<std::vector<double>>(s, "cfg_weights", "sweep", c.sweep.cfg_weights);
        if (s.contains("dcfg_pairs")) {
            c.sweep.dcfg_pairs.clear();
            for (const auto& p : s.at("dcfg_pairs")) {
                require(p.is_array() && p.size() == 2, "sweep.dcfg_pairs: each entry is [omega_aff, omega_inv]");
                c.sweep.dcfg_pairs.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
        }
        for (double w : c.sweep.cfg_weights) require(std::isfinite(w) && w >= 0.0, "sweep.cfg_weights: must be >= 0");
        for (auto [a, b] : c.sweep.dcfg_pairs)
            require(std::isfinite(a) && a >= 0.0 && std::isfinite(b) && b >= 0.0, "sweep.dcfg_pairs: must be >= 0");
    }
    if (j.contains("training")) {
        const auto& t = j.at("training");
        check_keys(t, "training", {"steps", "batch_size", "train_size", "learning_rate", "momentum", "p_null",
                                   "hidden_width", "hidden_layers", "embed_width", "time_pairs", "seed",
                                   "groupwise_dropout"});
        auto& tc = c.training;
        tc.steps = get_or<int>(t, "steps", "training", tc.steps);
        tc.batch_size = get_or<int>(t, "batch_size", "training", tc.batch_size);
        tc.train_size = get_or<int>(t, "train_size", "training", tc.train_size);
        tc.learning_rate = get_or<double>(t, "learning_rate", "training", tc.learning_rate);
        tc.momentum = get_or<double>(t, "momentum", "training", tc.momentum);
        tc.p_null = get_or<double>(t, "p_null", "training", tc.p_null);
        tc.hidden_width = get_or<int>(t, "hidden_width", "training", tc.hidden_width);
        tc.hidden_layers = get_or<int>(t, "hidden_layers", "training", tc.hidden_layers);
        tc.embed_width = get_or<int>(t, "embed_width", "training", tc.embed_width);
        tc.time_pairs = get_or<int>(t, "time_pairs", "training", tc.time_pairs);
        tc.seed = get_or<std::uint64_t>(t, "seed", "training", tc.seed);
        tc.groupwise_dropout = get_or<bool>(t, "groupwise_dropout", "training", false);
        require(!tc.groupwise_dropout, "training.groupwise_dropout: reserved, not implemented");
        require(tc.p_null >= 0.0 && tc.p_null <= 1.0, "training.p_null: must lie in [0, 1]");
        require(tc.steps >= 1 && tc.batch_size >= 1 && tc.train_size >= 1, "training: sizes must be >= 1");
    }
    c.samples = get_or<int>(j, "samples", "config", c.samples);
    c.seed = get_or<std::uint64_t>(j, "seed", "config", c.seed);
    c.jobs = get_or<int>(j, "jobs", "config", c.jobs);
    c.trajectories = get_or<bool>(j, "trajectories", "config", false);
    c.output_dir = get_or<std::string>(j, "output_dir", "config", c.output_dir);
    require(c.samples >= 1, "samples: must be >= 1");
    require(c.jobs >= 1, "jobs: must be >= 1");

    // Semantic validation against the world and schedule.
    GMMWorld world = build_world(c);
    NoiseSchedule sched = build_schedule(c);
    require(c.sampler.stride >= 1 && c.sampler.stride <= sched.steps(), "sampler.stride: must satisfy 1 <= stride <= T");
    InterventionSpec(world.graph(), c.intervention);
    resolve_guidance(c.guidance, world.graph(), &c.warnings);
    if (c.reverse_guidance) resolve_guidance(*c.reverse_guidance, world.graph(), &c.warnings);
    return c;
}

RunConfig load_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json RunConfig::to_json() const {
    json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["world"] = world_json;
    j["schedule"] = {{"kind", dcfg::to_string(schedule_kind)}, {"T", steps}, {"beta_min", beta_min}, {"beta_max", beta_max}};
    j["backend"] = {{"kind", backend}, {"checkpoint", checkpoint}};
    json iv = json::array();
    for (const auto& t : intervention) iv.push_back({{"attribute", t.attribute}, {"value", t.value ? json(*t.value) : json("flip")}});
    j["intervention"] = iv;
    j["guidance"] = guidance_to_json(guidance);
    if (reverse_guidance) j["reverse_guidance"] = guidance_to_json(*reverse_guidance);
    j["sampler"] = {{"stride", sampler.stride}, {"guided_inversion", sampler.guided_inversion},
                    {"null_abduction", sampler.null_abduction}};
    json pairs = json::array();
    for (auto [a, b] : sweep.dcfg_pairs) pairs.push_back({a, b});
    j["sweep"] = {{"cfg_weights", sweep.cfg_weights}, {"dcfg_pairs", pairs}};
    j["training"] = {{"steps", training.steps},          {"batch_size", training.batch_size},
                     {"train_size", training.train_size}, {"learning_rate", training.learning_rate},
                     {"momentum", training.momentum},     {"p_null", training.p_null},
                     {"hidden_width", training.hidden_width}, {"hidden_layers", training.hidden_layers},
                     {"embed_width", training.embed_width}, {"time_pairs", training.time_pairs},
                     {"seed", training.seed},             {"groupwise_dropout", training.groupwise_dropout}};
    j["samples"] = samples;
    j["seed"] = seed;
    j["trajectories"] = trajectories;
    return j;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(to_json().dump())); }

GMMWorld build_world(const RunConfig& cfg) {
    const json& w = cfg.world_json;
    const int dim = w.at("dim").get<int>();
    const double scale = w.at("scale").get<double>();
    const double sigma0 = w.at("sigma0").get<double>();
    const auto proj_seed = w.at("projection_seed").get<std::uint64_t>();
    require(std::isfinite(scale), "world.scale: must be finite");
    CausalGraph graph = w.contains("builtin") ? [&] {
        const auto name = w.at("builtin").get<std::string>();
        if (name == "independent2") return builtin::independent_binary(2);
        if (name == "independent3") return builtin::independent_binary(3);
        if (name == "age_finding") return builtin::age_finding();
        throw ConfigError("world.builtin: unknown world '" + name + "'");
    }()
                                              : graph_from_json(w.at("graph"));
    const std::string policy_name =
        w.value("means_policy", graph.size() <= dim ? std::string("axis") : std::string("projection"));
    const MeansPolicy policy = means_policy_from_string(policy_name);
    if (policy != MeansPolicy::Explicit)
        return GMMWorld::with_policy(std::move(graph), dim, policy, scale, sigma0, proj_seed);

    require(w.contains("means") && w.at("means").is_array(), "world.means: explicit policy needs a means list");
    std::map<AttributeVector, Vec> means;
    for (const auto& m : w.at("means")) {
        check_keys(m, "world.means[]", {"pa", "mean"});
        auto pa = m.at("pa").get<AttributeVector>();
        auto mu = m.at("mean").get<std::vector<double>>();
        means[pa] = Eigen::Map<const Vec>(mu.data(), static_cast<Eigen::Index>(mu.size()));
    }
    return GMMWorld(std::move(graph), dim, std::move(means), sigma0);
}

NoiseSchedule build_schedule(const RunConfig& cfg) {
    return NoiseSchedule::build(cfg.schedule_kind, cfg.steps, cfg.beta_min, cfg.beta_max);
}

std::unique_ptr<Denoiser> build_backend(const RunConfig& cfg, const GMMWorld& world, const NoiseSchedule& sched) {
    if (cfg.backend == "analytic") return std::make_unique<AnalyticDenoiser>(world, sched);
    require(!cfg.checkpoint.empty(), "backend.checkpoint: required for the trained backend");
    Checkpoint ck = load_checkpoint(cfg.checkpoint);
    if (ck.meta.world_fingerprint != world.fingerprint_hex())
        throw ConfigError("checkpoint '" + cfg.checkpoint + "' was trained on world " + ck.meta.world_fingerprint +
                          ", config describes world " + world.fingerprint_hex());
    require(ck.schedule_kind == sched.kind() && ck.steps == sched.steps() && ck.beta_min == sched.beta_min() &&
                ck.beta_max == sched.beta_max(),
            "checkpoint '" + cfg.checkpoint + "' was trained with a different schedule");
    require(ck.embedder.attributes() == world.attributes() && ck.params.dim == world.dim(),
            "checkpoint '" + cfg.checkpoint + "' does not match the world's shape");
    return std::make_unique<MlpDenoiser>(std::move(ck.params), std::move(ck.embedder), sched);
}

CounterfactualGuidance resolve_guidance(const GuidanceConfig& g, const CausalGraph& graph,
                                        std::vector<std::string>* warnings) {
    if (g.mode == "none") return CounterfactualGuidance::none();
    if (g.mode == "cfg") return CounterfactualGuidance::cfg(g.omega);
    if (g.mode == "dcfg") {
        std::set<int> pinned;
        if (g.pinned) {
            for (const auto& n : *g.pinned) pinned.insert(graph.index_of(n));
        } else {
            // Conditioned-on but never-intervened attributes default to weight 1.
            for (int i = 0; i < graph.size(); ++i)
                if (graph.node(i).name == "age") pinned.insert(i);
        }
        return CounterfactualGuidance::dcfg(g.omega_aff, g.omega_inv, std::move(pinned));
    }
    std::vector<GuidanceGroup> groups;
    std::set<int> covered;
    for (const auto& [names, w] : g.groups) {
        GuidanceGroup grp;
        grp.weight = w;
        for (const auto& n : names) grp.attributes.insert(graph.index_of(n));
        covered.insert(grp.attributes.begin(), grp.attributes.end());
        groups.push_back(std::move(grp));
    }
    GuidanceSpec spec(std::move(groups), graph.size());
    if (warnings && static_cast<int>(covered.size()) < graph.size())
        warnings->push_back("guidance: some attributes are in no group and will be nulled in every masked call");
    return CounterfactualGuidance::explicit_groups(std::move(spec));
}

} // namespace dcfg
