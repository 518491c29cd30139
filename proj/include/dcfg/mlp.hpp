// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dcfg/condition.hpp"
#include "dcfg/denoiser.hpp"
#include "dcfg/world.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dcfg {

struct DenseLayer {
    Mat weights;  // out x in
    Vec bias;     // out
};

/// Fully connected regressor ε_θ: [x_t, time features, condition embedding] → R^D.
/// Hidden layers use SiLU; the output layer is linear.
struct DenoiserParams {
    std::vector<DenseLayer> layers;
    int dim = 0;
    int time_pairs = 8;

    int input_size() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weights.cols()); }
    size_t parameter_count() const;

    /// Throws ConfigError on inconsistent shapes or non-finite entries.
    void validate(int embedding_size) const;
};

/// He-style random initialization; the output layer starts small.
DenoiserParams init_params(int dim, int embedding_size, int hidden_width, int hidden_layers, int time_pairs,
                           Rng& rng);

/// sin/cos(2^k π t/T) for k = 0..pairs-1.
Vec time_features(int t, int steps, int pairs);

Vec mlp_epsilon(const DenoiserParams& p, const SplitEmbedder& e, const NoiseSchedule& sched, const Vec& x_t, int t,
                const ConditionSlots& s);

class MlpDenoiser final : public Denoiser {
public:
    MlpDenoiser(DenoiserParams params, SplitEmbedder embedder, NoiseSchedule sched);

    Vec epsilon(const Vec& x_t, int t, const ConditionSlots& s) const override {
        return mlp_epsilon(params_, embedder_, sched_, x_t, t, s);
    }
    const NoiseSchedule& schedule() const override { return sched_; }
    int dim() const override { return params_.dim; }
    int attributes() const override { return embedder_.attributes(); }

    const DenoiserParams& params() const { return params_; }
    const SplitEmbedder& embedder() const { return embedder_; }

private:
    DenoiserParams params_;
    SplitEmbedder embedder_;
    NoiseSchedule sched_;
};

struct TrainingConfig {
    int steps = 6000;
    int batch_size = 128;
    int train_size = 4096;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    double p_null = 0.5;
    int hidden_width = 128;
    int hidden_layers = 3;
    int embed_width = 4;
    int time_pairs = 8;
    std::uint64_t seed = 0;
    bool groupwise_dropout = false;  // reserved; must stay false
};

/// One minibatch of the noise-prediction objective, fixed for gradient checks.
struct TrainingBatch {
    std::vector<Vec> x_t;
    std::vector<int> t;
    std::vector<ConditionSlots> slots;
    std::vector<Vec> noise;
};

/// Mean over the batch of ‖ε − ε_θ(x_t, t, c)‖² / D.
double batch_loss(const DenoiserParams& p, const SplitEmbedder& e, const NoiseSchedule& sched,
                  const TrainingBatch& batch);

/// Gradients laid out like the parameters they belong to.
struct Gradients {
    DenoiserParams params;
    SplitEmbedder embedder;
};

/// Reverse-mode gradient of batch_loss; returns the loss.
double loss_and_gradients(const DenoiserParams& p, const SplitEmbedder& e, const NoiseSchedule& sched,
                          const TrainingBatch& batch, Gradients& grad);

/// Flat read/write view over every scalar parameter, layers first then embedder.
std::vector<double*> parameter_pointers(DenoiserParams& p, SplitEmbedder& e);

/// Draws a minibatch: x0 from the dataset, t uniform in 1..T, Gaussian noise,
/// and joint condition dropout with probability p_null.
TrainingBatch draw_batch(const std::vector<Vec>& x0, const std::vector<AttributeVector>& pa,
                         const NoiseSchedule& sched, int batch_size, double p_null, Rng& rng);

struct TrainingResult {
    DenoiserParams params;
    SplitEmbedder embedder;
    std::vector<double> loss_trace;
};

/// Momentum SGD on the noise-prediction loss. Throws NumericalError when the
/// loss turns non-finite or exceeds 1e6.
TrainingResult train(const GMMWorld& world, const NoiseSchedule& sched, const TrainingConfig& cfg);

struct CheckpointMeta {
    std::string world_fingerprint;
    std::string config_hash;
    TrainingConfig training;
};

void save_checkpoint(const std::string& path, const DenoiserParams& p, const SplitEmbedder& e,
                     const NoiseSchedule& sched, const CheckpointMeta& meta);

struct Checkpoint {
    DenoiserParams params;
    SplitEmbedder embedder;
    ScheduleKind schedule_kind = ScheduleKind::Linear;
    int steps = 0;
    double beta_min = 0.0;
    double beta_max = 0.0;
    CheckpointMeta meta;
};

/// Throws ConfigError on an unreadable or malformed file.
Checkpoint load_checkpoint(const std::string& path);

} // namespace dcfg
