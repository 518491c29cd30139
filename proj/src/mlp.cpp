// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/mlp.hpp"

#include "dcfg/data.hpp"
#include "dcfg/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace dcfg {

namespace {

Mat silu(const Mat& z) { return z.array() / (1.0 + (-z.array()).exp()); }

Mat silu_grad(const Mat& z) {
    Eigen::ArrayXXd s = 1.0 / (1.0 + (-z.array()).exp());
    return (s * (1.0 + z.array() * (1.0 - s))).matrix();
}

Mat assemble_inputs(const SplitEmbedder& e, const NoiseSchedule& sched, int pairs, const std::vector<Vec>& x_t,
                    const std::vector<int>& t, const std::vector<ConditionSlots>& slots) {
    const Eigen::Index n = static_cast<Eigen::Index>(x_t.size());
    const Eigen::Index dim = x_t.front().size();
    const Eigen::Index rows = dim + 2 * pairs + e.output_size();
    Mat in(rows, n);
    for (Eigen::Index b = 0; b < n; ++b) {
        const size_t i = static_cast<size_t>(b);
        in.col(b).head(dim) = x_t[i];
        in.col(b).segment(dim, 2 * pairs) = time_features(t[i], sched.steps(), pairs);
        in.col(b).tail(e.output_size()) = e.embed(slots[i]);
    }
    return in;
}

struct ForwardCache {
    std::vector<Mat> pre;   // pre-activation per layer
    std::vector<Mat> post;  // layer inputs: post[0] = network input
    Mat out;
};

void forward(const DenoiserParams& p, const Mat& in, ForwardCache& cache) {
    cache.pre.clear();
    cache.post.clear();
    cache.post.push_back(in);
    const size_t n_layers = p.layers.size();
    for (size_t l = 0; l < n_layers; ++l) {
        Mat z = p.layers[l].weights * cache.post.back();
        z.colwise() += p.layers[l].bias;
        if (l + 1 == n_layers) {
            cache.out = std::move(z);
        } else {
            cache.post.push_back(silu(z));
            cache.pre.push_back(std::move(z));
        }
    }
}

Mat noise_matrix(const std::vector<Vec>& noise) {
    Mat m(noise.front().size(), static_cast<Eigen::Index>(noise.size()));
    for (size_t b = 0; b < noise.size(); ++b) m.col(static_cast<Eigen::Index>(b)) = noise[b];
    return m;
}

} // namespace

size_t DenoiserParams::parameter_count() const {
    size_t n = 0;
    for (const auto& l : layers) n += static_cast<size_t>(l.weights.size() + l.bias.size());
    return n;
}

void DenoiserParams::validate(int embedding_size) const {
    require(!layers.empty(), "denoiser: no layers");
    require(input_size() == dim + 2 * time_pairs + embedding_size, "denoiser: input width does not match x/time/embedding");
    for (size_t l = 0; l < layers.size(); ++l) {
        require(layers[l].bias.size() == layers[l].weights.rows(), "denoiser: bias shape mismatch");
        if (l > 0) require(layers[l].weights.cols() == layers[l - 1].weights.rows(), "denoiser: layer shapes do not chain");
        require(layers[l].weights.allFinite() && layers[l].bias.allFinite(), "denoiser: non-finite parameters");
    }
    require(layers.back().weights.rows() == dim, "denoiser: output width must equal D");
}

DenoiserParams init_params(int dim, int embedding_size, int hidden_width, int hidden_layers, int time_pairs, Rng& rng) {
    require(dim >= 1 && hidden_width >= 1 && hidden_layers >= 1 && time_pairs >= 0, "init_params: bad shape");
    DenoiserParams p;
    p.dim = dim;
    p.time_pairs = time_pairs;
    std::normal_distribution<double> normal(0.0, 1.0);
    int fan_in = dim + 2 * time_pairs + embedding_size;
    for (int l = 0; l <= hidden_layers; ++l) {
        const bool last = l == hidden_layers;
        const int out = last ? dim : hidden_width;
        const double scale = last ? 0.1 / std::sqrt(fan_in) : std::sqrt(2.0 / fan_in);
        DenseLayer layer{Mat(out, fan_in), Vec::Zero(out)};
        for (Eigen::Index k = 0; k < layer.weights.size(); ++k) layer.weights.data()[k] = scale * normal(rng);
        // Condition columns start at zero; they only move once a non-null condition is seen.
        if (l == 0 && embedding_size > 0) layer.weights.rightCols(embedding_size).setZero();
        p.layers.push_back(std::move(layer));
        fan_in = out;
    }
    return p;
}

Vec time_features(int t, int steps, int pairs) {
    Vec f(2 * pairs);
    const double tau = static_cast<double>(t) / steps;
    for (int k = 0; k < pairs; ++k) {
        const double a = std::ldexp(1.0, k) * std::numbers::pi * tau;
        f[2 * k] = std::sin(a);
        f[2 * k + 1] = std::cos(a);
    }
    return f;
}

Vec mlp_epsilon(const DenoiserParams& p, const SplitEmbedder& e, const NoiseSchedule& sched, const Vec& x_t, int t,
                const ConditionSlots& s) {
    require(x_t.size() == p.dim, "mlp_epsilon: dimension mismatch");
    require(p.input_size() == p.dim + 2 * p.time_pairs + e.output_size(), "mlp_epsilon: shape mismatch");
    require(t >= 1 && t <= sched.steps(), "mlp_epsilon: t out of range");
    Vec h(p.input_size());
    h.head(p.dim) = x_t;
    h.segment(p.dim, 2 * p.time_pairs) = time_features(t, sched.steps(), p.time_pairs);
    h.tail(e.output_size()) = e.embed(s);
    const size_t n_layers = p.layers.size();
    for (size_t l = 0; l < n_layers; ++l) {
        Vec z = p.layers[l].weights * h + p.layers[l].bias;
        h = l + 1 == n_layers ? z : Vec(z.array() / (1.0 + (-z.array()).exp()));
    }
    return h;
}

MlpDenoiser::MlpDenoiser(DenoiserParams params, SplitEmbedder embedder, NoiseSchedule sched)
    : params_(std::move(params)), embedder_(std::move(embedder)), sched_(std::move(sched)) {
    params_.validate(embedder_.output_size());
}

double batch_loss(const DenoiserParams& p, const SplitEmbedder& e, const NoiseSchedule& sched,
                  const TrainingBatch& batch) {
    ForwardCache cache;
    forward(p, assemble_inputs(e, sched, p.time_pairs, batch.x_t, batch.t, batch.slots), cache);
    const Mat diff = cache.out - noise_matrix(batch.noise);
    return diff.squaredNorm() / static_cast<double>(diff.size());
}

double loss_and_gradients(const DenoiserParams& p, const SplitEmbedder& e, const NoiseSchedule& sched,
                          const TrainingBatch& batch, Gradients& grad) {
    require(!batch.x_t.empty(), "loss_and_gradients: empty batch");
    ForwardCache cache;
    forward(p, assemble_inputs(e, sched, p.time_pairs, batch.x_t, batch.t, batch.slots), cache);
    const Mat diff = cache.out - noise_matrix(batch.noise);
    const double loss = diff.squaredNorm() / static_cast<double>(diff.size());

    grad.params = p;
    grad.embedder = e;
    Mat delta = (2.0 / static_cast<double>(diff.size())) * diff;
    for (size_t l = p.layers.size(); l-- > 0;) {
        grad.params.layers[l].weights.noalias() = delta * cache.post[l].transpose();
        grad.params.layers[l].bias = delta.rowwise().sum();
        Mat back = p.layers[l].weights.transpose() * delta;
        if (l > 0) {
            delta = back.cwiseProduct(silu_grad(cache.pre[l - 1]));
        } else {
            delta = std::move(back);
        }
    }

    // delta now holds ∂loss/∂input; route the embedding rows to the embedder blocks.
    const int offset = p.dim + 2 * p.time_pairs;
    const int width = e.width();
    for (int i = 0; i < e.attributes(); ++i) {
        grad.embedder.weights(i).setZero();
        grad.embedder.bias(i).setZero();
    }
    for (size_t b = 0; b < batch.slots.size(); ++b) {
        const auto& s = batch.slots[b];
        for (int i = 0; i < s.size(); ++i) {
            if (s.is_null(i)) continue;
            auto g = delta.col(static_cast<Eigen::Index>(b)).segment(offset + i * width, width);
            grad.embedder.weights(i).col(*s[i]) += g;
            grad.embedder.bias(i) += g;
        }
    }
    return loss;
}

std::vector<double*> parameter_pointers(DenoiserParams& p, SplitEmbedder& e) {
    std::vector<double*> out;
    for (auto& l : p.layers) {
        for (Eigen::Index k = 0; k < l.weights.size(); ++k) out.push_back(l.weights.data() + k);
        for (Eigen::Index k = 0; k < l.bias.size(); ++k) out.push_back(l.bias.data() + k);
    }
    for (int i = 0; i < e.attributes(); ++i) {
        for (Eigen::Index k = 0; k < e.weights(i).size(); ++k) out.push_back(e.weights(i).data() + k);
        for (Eigen::Index k = 0; k < e.bias(i).size(); ++k) out.push_back(e.bias(i).data() + k);
    }
    return out;
}

TrainingBatch draw_batch(const std::vector<Vec>& x0, const std::vector<AttributeVector>& pa,
                         const NoiseSchedule& sched, int batch_size, double p_null, Rng& rng) {
    require(!x0.empty() && x0.size() == pa.size(), "draw_batch: empty or inconsistent training set");
    std::uniform_int_distribution<size_t> pick(0, x0.size() - 1);
    std::uniform_int_distribution<int> step(1, sched.steps());
    TrainingBatch b;
    for (int k = 0; k < batch_size; ++k) {
        const size_t i = pick(rng);
        const int t = step(rng);
        Vec eps = standard_normal(rng, static_cast<int>(x0[i].size()));
        b.x_t.push_back(sched.sqrt_alpha_bar(t) * x0[i] + sched.sqrt_one_minus_alpha_bar(t) * eps);
        b.t.push_back(t);
        b.slots.push_back(dropout(ConditionSlots::from(pa[i]), p_null, rng));
        b.noise.push_back(std::move(eps));
    }
    return b;
}

TrainingResult train(const GMMWorld& world, const NoiseSchedule& sched, const TrainingConfig& cfg) {
    require(!cfg.groupwise_dropout, "train: group-wise dropout is reserved and not implemented");
    require(cfg.steps >= 1 && cfg.batch_size >= 1 && cfg.train_size >= 1, "train: steps, batch size and training set size must be >= 1");
    require(cfg.p_null >= 0.0 && cfg.p_null <= 1.0, "train: p_null must lie in [0, 1]");
    require(cfg.learning_rate > 0.0 && cfg.momentum >= 0.0 && cfg.momentum < 1.0, "train: bad optimizer settings");

    Rng rng(cfg.seed);
    std::vector<int> cards;
    for (const auto& n : world.graph().nodes()) cards.push_back(n.cardinality);
    TrainingResult res;
    res.embedder = SplitEmbedder::random(cards, cfg.embed_width, rng);
    res.params = init_params(world.dim(), res.embedder.output_size(), cfg.hidden_width, cfg.hidden_layers,
                             cfg.time_pairs, rng);

    Dataset data = sample_dataset(world, cfg.train_size, mix_seed(cfg.seed, 0xDA7A));
    std::vector<Vec> x0;
    std::vector<AttributeVector> pa;
    for (auto& it : data.items) {
        x0.push_back(it.x0);
        pa.push_back(it.pa);
    }

    auto params = parameter_pointers(res.params, res.embedder);
    std::vector<double> velocity(params.size(), 0.0);
    Gradients grad;
    res.loss_trace.reserve(static_cast<size_t>(cfg.steps));
    for (int step = 0; step < cfg.steps; ++step) {
        TrainingBatch batch = draw_batch(x0, pa, sched, cfg.batch_size, cfg.p_null, rng);
        const double loss = loss_and_gradients(res.params, res.embedder, sched, batch, grad);
        if (!std::isfinite(loss) || loss > 1e6) {
            std::ostringstream os;
            os << "train: diverged at step " << step << " (loss = " << loss << ")";
            throw NumericalError(os.str());
        }
        res.loss_trace.push_back(loss);
        auto grads = parameter_pointers(grad.params, grad.embedder);
        for (size_t k = 0; k < params.size(); ++k) {
            velocity[k] = cfg.momentum * velocity[k] - cfg.learning_rate * *grads[k];
            *params[k] += velocity[k];
        }
    }
    return res;
}

namespace {

using nlohmann::json;

json matrix_to_json(const Mat& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Mat matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto flat = j.at("data").get<std::vector<double>>();
    require(static_cast<Eigen::Index>(flat.size()) == rows * cols, "checkpoint: matrix data has wrong length");
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<size_t>(r * cols + c)];
    return m;
}

Vec vector_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

} // namespace

void save_checkpoint(const std::string& path, const DenoiserParams& p, const SplitEmbedder& e,
                     const NoiseSchedule& sched, const CheckpointMeta& meta) {
    json j;
    j["format"] = "dcfg-checkpoint";
    j["version"] = 1;
    j["schedule"] = {{"kind", to_string(sched.kind())},
                     {"T", sched.steps()},
                     {"beta_min", sched.beta_min()},
                     {"beta_max", sched.beta_max()}};
    j["world_fingerprint"] = meta.world_fingerprint;
    j["config_hash"] = meta.config_hash;
    const auto& tc = meta.training;
    j["training"] = {{"steps", tc.steps},          {"batch_size", tc.batch_size},
                     {"train_size", tc.train_size}, {"learning_rate", tc.learning_rate},
                     {"momentum", tc.momentum},     {"p_null", tc.p_null},
                     {"hidden_width", tc.hidden_width}, {"hidden_layers", tc.hidden_layers},
                     {"embed_width", tc.embed_width}, {"time_pairs", tc.time_pairs},
                     {"seed", tc.seed},             {"groupwise_dropout", tc.groupwise_dropout}};
    json blocks = json::array();
    for (int i = 0; i < e.attributes(); ++i)
        blocks.push_back({{"weights", matrix_to_json(e.weights(i))}, {"bias", to_std(e.bias(i))}});
    j["embedder"] = {{"width", e.width()}, {"cardinalities", e.cardinalities()}, {"blocks", blocks}};
    json layers = json::array();
    for (const auto& l : p.layers) layers.push_back({{"weights", matrix_to_json(l.weights)}, {"bias", to_std(l.bias)}});
    j["denoiser"] = {{"dim", p.dim}, {"time_pairs", p.time_pairs}, {"layers", layers}};

    std::ofstream os(path);
    if (!os) throw ConfigError("checkpoint: cannot write '" + path + "'");
    os << j.dump(1) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("checkpoint: cannot read '" + path + "'");
    Checkpoint ck;
    try {
        json j = json::parse(is);
        require(j.at("format") == "dcfg-checkpoint", "checkpoint: not a dcfg checkpoint");
        require(j.at("version") == 1, "checkpoint: unsupported version");
        const auto& s = j.at("schedule");
        ck.schedule_kind = schedule_kind_from_string(s.at("kind").get<std::string>());
        ck.steps = s.at("T").get<int>();
        ck.beta_min = s.at("beta_min").get<double>();
        ck.beta_max = s.at("beta_max").get<double>();
        ck.meta.world_fingerprint = j.at("world_fingerprint").get<std::string>();
        ck.meta.config_hash = j.value("config_hash", "");
        const auto& tc = j.at("training");
        auto& t = ck.meta.training;
        t.steps = tc.at("steps").get<int>();
        t.batch_size = tc.at("batch_size").get<int>();
        t.train_size = tc.at("train_size").get<int>();
        t.learning_rate = tc.at("learning_rate").get<double>();
        t.momentum = tc.at("momentum").get<double>();
        t.p_null = tc.at("p_null").get<double>();
        t.hidden_width = tc.at("hidden_width").get<int>();
        t.hidden_layers = tc.at("hidden_layers").get<int>();
        t.embed_width = tc.at("embed_width").get<int>();
        t.time_pairs = tc.at("time_pairs").get<int>();
        t.seed = tc.at("seed").get<std::uint64_t>();
        t.groupwise_dropout = tc.at("groupwise_dropout").get<bool>();

        const auto& ej = j.at("embedder");
        ck.embedder = SplitEmbedder(ej.at("cardinalities").get<std::vector<int>>(), ej.at("width").get<int>());
        const auto& blocks = ej.at("blocks");
        require(static_cast<int>(blocks.size()) == ck.embedder.attributes(), "checkpoint: embedder block count mismatch");
        for (int i = 0; i < ck.embedder.attributes(); ++i) {
            Mat w = matrix_from_json(blocks[static_cast<size_t>(i)].at("weights"));
            Vec b = vector_from_json(blocks[static_cast<size_t>(i)].at("bias"));
            require(w.rows() == ck.embedder.width() && w.cols() == ck.embedder.cardinalities()[static_cast<size_t>(i)] &&
                        b.size() == ck.embedder.width(),
                    "checkpoint: embedder block shape mismatch");
            ck.embedder.weights(i) = std::move(w);
            ck.embedder.bias(i) = std::move(b);
        }
        const auto& dj = j.at("denoiser");
        ck.params.dim = dj.at("dim").get<int>();
        ck.params.time_pairs = dj.at("time_pairs").get<int>();
        for (const auto& lj : dj.at("layers"))
            ck.params.layers.push_back({matrix_from_json(lj.at("weights")), vector_from_json(lj.at("bias"))});
        ck.params.validate(ck.embedder.output_size());
    } catch (const json::exception& ex) {
        throw ConfigError("checkpoint: malformed '" + path + "': " + ex.what());
    }
    return ck;
}

} // namespace dcfg
