// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/commands.hpp"

#include "dcfg/data.hpp"
#include "dcfg/errors.hpp"
#include "dcfg/io.hpp"
#include "dcfg/metrics.hpp"
#include "dcfg/oracle.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace dcfg {

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

json versions() {
    return {{"dcfg", DCFG_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

BatchSpec batch_spec(const RunConfig& cfg, const CausalGraph& graph, int jobs) {
    BatchSpec spec;
    spec.intervention = InterventionSpec(graph, cfg.intervention);
    spec.mode = resolve_guidance(cfg.guidance, graph);
    if (cfg.reverse_guidance) spec.reverse_mode = resolve_guidance(*cfg.reverse_guidance, graph);
    spec.options = cfg.sampler;
    spec.with_reverse = !spec.intervention.empty();
    spec.jobs = jobs;
    return spec;
}

void write_trajectories(const RunConfig& cfg, const Denoiser& model, const CausalGraph& graph, const Dataset& data,
                        const BatchSpec& spec, const fs::path& path) {
    const size_t count = std::min<size_t>(data.size(), 8);
    const TimestepGrid grid = make_grid(model.schedule().steps(), cfg.sampler.stride);
    std::vector<std::pair<size_t, Trajectory>> items;
    for (size_t i = 0; i < count; ++i) {
        const auto& it = data.items[i];
        const Intervention iv = spec.intervention.resolve(it.pa);
        const Guidance g = spec.mode.resolve(partition(graph, iv), graph.size());
        const Guidance ab = cfg.sampler.guided_inversion ? g : Guidance{NoGuidance{}};
        const ConditionSlots fact = cfg.sampler.null_abduction ? ConditionSlots::null(graph.size())
                                                               : ConditionSlots::from(it.pa);
        Trajectory inv = invert(model, ab, it.x0, fact, grid);
        const AttributeVector cf = counterfactual_attributes(graph, it.pa, it.u, iv);
        Trajectory gen = generate(model, g, inv.final_state(), ConditionSlots::from(cf), grid);
        items.emplace_back(i, std::move(inv));
        items.emplace_back(i, std::move(gen));
    }
    std::ostringstream os;
    write_trajectory_csv(os, items, model.dim());
    write_file(path.string(), os.str());
}

std::string batch_csv_path(const std::string& p) {
    return fs::is_directory(p) ? (fs::path(p) / "batch.csv").string() : p;
}

} // namespace

void apply_overrides(RunConfig& cfg, const CliOverrides& o) {
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.output_dir = *o.out;
    if (o.jobs) {
        require(*o.jobs >= 1, "--jobs: must be >= 1");
        cfg.jobs = *o.jobs;
    }
    if (o.backend) {
        require(*o.backend == "analytic" || *o.backend == "trained", "--backend: expected analytic|trained");
        cfg.backend = *o.backend;
    }
    if (o.checkpoint) cfg.checkpoint = *o.checkpoint;
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
    require(cfg.backend == "trained", "train: select the trained backend (backend.kind or --backend trained)");
    const GMMWorld world = build_world(cfg);
    const NoiseSchedule sched = build_schedule(cfg);
    fs::create_directories(cfg.output_dir);
    const std::string ckpt =
        cfg.checkpoint.empty() ? (fs::path(cfg.output_dir) / "checkpoint.json").string() : cfg.checkpoint;
    if (fs::path(ckpt).has_parent_path()) fs::create_directories(fs::path(ckpt).parent_path());

    log << "training " << cfg.training.steps << " steps on world " << world.fingerprint_hex() << "\n";
    TrainingResult res = train(world, sched, cfg.training);

    save_checkpoint(ckpt, res.params, res.embedder, sched, {world.fingerprint_hex(), cfg.hash(), cfg.training});
    std::ostringstream os;
    os << "step,loss\n";
    for (size_t i = 0; i < res.loss_trace.size(); ++i) os << i << "," << format_double(res.loss_trace[i]) << "\n";
    write_file((fs::path(cfg.output_dir) / "loss_trace.csv").string(), os.str());

    const auto& tr = res.loss_trace;
    const size_t head = std::min<size_t>(50, tr.size());
    const size_t tail = std::max<size_t>(1, tr.size() / 10);
    double first = 0.0, last = 0.0;
    for (size_t i = 0; i < head; ++i) first += tr[i] / static_cast<double>(head);
    for (size_t i = tr.size() - tail; i < tr.size(); ++i) last += tr[i] / static_cast<double>(tail);
    log << "initial loss " << first << ", final loss " << last << " (ratio " << last / first << ")\n";
    log << "checkpoint: " << ckpt << "\n";
}

void cmd_counterfactual(const RunConfig& cfg, std::ostream& log) {
    const GMMWorld world = build_world(cfg);
    const NoiseSchedule sched = build_schedule(cfg);
    const auto model = build_backend(cfg, world, sched);
    const CausalGraph& graph = world.graph();
    const BatchSpec spec = batch_spec(cfg, graph, cfg.jobs);

    const Dataset data = sample_dataset(world, cfg.samples, cfg.seed);
    const auto records = run_batch(*model, graph, data, spec);
    const BatchTable table = tabulate(world, records);

    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    std::ostringstream csv;
    write_batch_csv(csv, table);
    write_file((dir / "batch.csv").string(), csv.str());

    json manifest{{"format", "dcfg-batch-manifest"},
                  {"config_hash", cfg.hash()},
                  {"seed", cfg.seed},
                  {"world_fingerprint", world.fingerprint_hex()},
                  {"label", spec.mode.label()},
                  {"baseline", spec.mode.is_baseline()},
                  {"samples", cfg.samples},
                  {"intervention", spec.intervention.label()},
                  {"backend", cfg.backend},
                  {"versions", versions()},
                  {"created", utc_timestamp()},
                  {"warnings", cfg.warnings},
                  {"config", cfg.to_json()}};
    if (spec.intervention.empty()) {
        // No intervention: x̃ is a plain round trip, so its error is the composition diagnostic.
        const auto mae = per_item_mae(table.x0, table.x_cf);
        double mean = 0.0;
        for (double v : mae) mean += v / static_cast<double>(mae.size());
        manifest["composition_mae"] = mean;
        log << "composition MAE " << mean << "\n";
    }
    write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    if (cfg.trajectories) write_trajectories(cfg, *model, graph, data, spec, dir / "trajectories.csv");
    for (const auto& w : cfg.warnings) log << "warning: " << w << "\n";
    log << spec.mode.label() << ": " << records.size() << " items -> " << (dir / "batch.csv").string() << "\n";
}

std::vector<EvalReport> cmd_evaluate(const std::vector<std::string>& batches, const std::string& out_dir,
                                     std::ostream& log) {
    require(!batches.empty(), "eval: no batches given");
    std::vector<EvalReport> reports;
    std::string fingerprint, fingerprint_from;
    for (const auto& b : batches) {
        const std::string csv = batch_csv_path(b);
        const fs::path manifest_path = fs::path(csv).parent_path() / "manifest.json";
        json m;
        try {
            m = json::parse(read_file(manifest_path.string()));
        } catch (const json::exception& e) {
            throw ConfigError("eval: bad manifest '" + manifest_path.string() + "': " + e.what());
        }
        const std::string fp = m.value("world_fingerprint", "");
        if (fingerprint.empty()) {
            fingerprint = fp;
            fingerprint_from = csv;
        } else if (fp != fingerprint) {
            throw ConfigError("eval: world fingerprint mismatch: " + fingerprint_from + " has " + fingerprint + ", " +
                              csv + " has " + fp);
        }
        const BatchTable table = read_batch_csv(csv);
        EvalReport r;
        r.label = m.value("label", fs::path(csv).parent_path().filename().string());
        r.baseline = m.value("baseline", false);
        r.attribute_names = table.attribute_names;
        r.auroc = effectiveness(table);
        if (!table.x_rev.empty()) {
            const Reversibility rev = reversibility(table);
            r.rev_mae = rev.mae;
            r.rev_mse = rev.mse;
        }
        if (m.contains("composition_mae")) r.comp_mae = m.at("composition_mae").get<double>();
        r.samples = table.size();
        r.world_fingerprint = fp;
        r.config_hash = m.value("config_hash", "");
        reports.push_back(std::move(r));
    }
    compute_deltas(reports);

    fs::create_directories(out_dir);
    std::ostringstream report, plot, svg;
    write_report_csv(report, reports);
    write_plot_csv(plot, reports);
    write_delta_svg(svg, reports);
    write_file((fs::path(out_dir) / "report.csv").string(), report.str());
    write_file((fs::path(out_dir) / "plot.csv").string(), plot.str());
    write_file((fs::path(out_dir) / "delta.svg").string(), svg.str());
    log << report.str();
    return reports;
}

std::vector<EvalReport> cmd_sweep(const RunConfig& cfg, std::ostream& log) {
    std::vector<RunConfig> settings;
    auto add = [&](GuidanceConfig g) {
        RunConfig c = cfg;
        c.guidance = std::move(g);
        c.jobs = 1;
        settings.push_back(std::move(c));
    };
    for (double w : cfg.sweep.cfg_weights) {
        GuidanceConfig g;
        g.mode = "cfg";
        g.omega = w;
        add(g);
    }
    if (std::find(cfg.sweep.cfg_weights.begin(), cfg.sweep.cfg_weights.end(), 1.0) == cfg.sweep.cfg_weights.end()) {
        GuidanceConfig g;
        g.mode = "cfg";
        add(g);
    }
    for (auto [aff, inv] : cfg.sweep.dcfg_pairs) {
        GuidanceConfig g;
        g.mode = "dcfg";
        g.omega_aff = aff;
        g.omega_inv = inv;
        if (cfg.guidance.mode == "dcfg") g.pinned = cfg.guidance.pinned;
        add(g);
    }

    const GMMWorld world = build_world(cfg);
    std::vector<std::string> dirs;
    for (auto& s : settings) {
        s.output_dir = (fs::path(cfg.output_dir) / resolve_guidance(s.guidance, world.graph()).label()).string();
        dirs.push_back(s.output_dir);
    }

    std::atomic<size_t> next{0};
    std::mutex mu;
    std::exception_ptr error;
    auto worker = [&] {
        for (size_t i = next++; i < settings.size(); i = next++) {
            std::ostringstream local;
            try {
                cmd_counterfactual(settings[i], local);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error) error = std::current_exception();
                return;
            }
            std::lock_guard<std::mutex> lock(mu);
            log << local.str();
        }
    };
    const size_t jobs = std::min<size_t>(static_cast<size_t>(std::max(1, cfg.jobs)), settings.size());
    std::vector<std::thread> threads;
    for (size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);

    return cmd_evaluate(dirs, cfg.output_dir, log);
}

bool cmd_selftest(std::ostream& log) {
    bool all = true;
    auto report = [&](const std::string& name, bool ok, double value) {
        log << (ok ? "PASS " : "FAIL ") << name << " (" << value << ")\n";
        all = all && ok;
    };
    Rng rng(20260);
    std::uniform_int_distribution<int> pick_t(1, 200);
    const NoiseSchedule sched = NoiseSchedule::build(ScheduleKind::Linear, 200);

    {
        const GMMWorld w = builtin::world("independent3");
        const AnalyticDenoiser model(w, sched);
        std::set<int> all_attrs{0, 1, 2};
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            const Vec x = standard_normal(rng, w.dim()) * 2.0;
            const int t = pick_t(rng);
            const ConditionSlots s = ConditionSlots::from(w.components()[static_cast<size_t>(k) % w.components().size()].pa);
            const double omega = 0.5 + 3.0 * std::uniform_real_distribution<double>(0, 1)(rng);
            const Vec a = epsilon_dcfg(model, x, t, s, GuidanceSpec({{all_attrs, omega}}, 3));
            const Vec b = epsilon_cfg(model, x, t, s, omega);
            worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
        }
        report("single-group DCFG equals CFG", worst < 1e-12, worst);
    }
    {
        double worst = 0.0;
        for (const auto& name : builtin::world_names()) {
            const GMMWorld w = builtin::world(name);
            const AnalyticDenoiser model(w, sched);
            for (int k = 0; k < 20; ++k) {
                const Vec x = standard_normal(rng, w.dim()) * 1.5;
                const int t = pick_t(rng);
                const ConditionSlots s = ConditionSlots::from(w.components()[static_cast<size_t>(k) % w.components().size()].pa);
                const Vec a = model.epsilon(x, t, s);
                const Vec b = oracle::epsilon_fd(w, sched.alpha_bar(t), x, s);
                worst = std::max(worst, (a - b).norm() / std::max(b.norm(), 1e-8));
            }
        }
        report("analytic epsilon matches density gradient", worst < 1e-4, worst);
    }
    {
        const GMMWorld w = builtin::world("independent2");
        const AnalyticDenoiser model(w, sched);
        const Dataset d = sample_dataset(w, 20, 7);
        double mae = 0.0;
        for (const auto& it : d.items) mae += composition(model, it.x0, it.pa, 1) / 20.0;
        report("DDIM round trip", mae < 0.02, mae);
    }
    {
        const GMMWorld w = builtin::world("independent2");
        Rng r(3);
        SplitEmbedder e = SplitEmbedder::random({2, 2}, 3, r);
        DenoiserParams p = init_params(w.dim(), e.output_size(), 8, 2, 2, r);
        std::vector<Vec> x0;
        std::vector<AttributeVector> pa;
        for (const auto& it : sample_dataset(w, 16, 5).items) {
            x0.push_back(it.x0);
            pa.push_back(it.pa);
        }
        const TrainingBatch batch = draw_batch(x0, pa, sched, 16, 0.5, r);
        Gradients g;
        loss_and_gradients(p, e, sched, batch, g);
        auto ptrs = parameter_pointers(p, e);
        auto gptrs = parameter_pointers(g.params, g.embedder);
        double worst = 0.0;
        for (size_t k = 0; k < ptrs.size(); k += ptrs.size() / 7) {
            const double orig = *ptrs[k], h = 1e-6;
            *ptrs[k] = orig + h;
            const double up = batch_loss(p, e, sched, batch);
            *ptrs[k] = orig - h;
            const double down = batch_loss(p, e, sched, batch);
            *ptrs[k] = orig;
            const double fd = (up - down) / (2 * h);
            worst = std::max(worst, std::abs(fd - *gptrs[k]) / std::max({std::abs(fd), std::abs(*gptrs[k]), 1e-6}));
        }
        report("backprop matches finite differences", worst < 1e-4, worst);
    }
    return all;
}

} // namespace dcfg
