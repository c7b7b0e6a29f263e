#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arith/datagen.hpp"
#include "arith/model.hpp"

namespace arith {

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double adam_eps = 1e-8;
  double weight_decay = 0.1;  // decoupled, matrix weights only
  double grad_norm_clip = 1.0;
  int batch_size = 256;
  std::int64_t max_steps = 10'000;
  std::int64_t eval_every = 500;
  std::int64_t checkpoint_every = 0;  // 0: final checkpoint only
  LossMask loss_mask = LossMask::FullSequence;
  bool cosine_decay = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct OptState {
  ParamStore<float> m;  // first moments
  ParamStore<float> v;  // second moments
  std::uint64_t step = 0;

  static OptState shaped(const ModelConfig& cfg) {
    OptState s;
    s.m = ParamStore<float>::shaped(cfg);
    s.v = ParamStore<float>::shaped(cfg);
    return s;
  }
};

// Scale all gradients uniformly so the global L2 norm is at most
// max_norm; returns the pre-clip norm.
double clip_grad_norm(ParamStore<float>& grads, double max_norm);

// One AdamW update with bias correction and decoupled weight decay on
// decay-eligible tensors. Increments the step counter.
void adamw_step(ParamStore<float>& params, ParamStore<float>& grads,
                OptState& opt, const TrainConfig& cfg,
                std::optional<double> lr_override = std::nullopt);

struct EvalOutcome {
  std::vector<std::pair<std::string, double>> metrics;
  bool stop = false;  // early stop once targets are met
};
using EvalHook =
    std::function<EvalOutcome(ParamStore<float>& params, std::uint64_t step)>;

struct TrainResult {
  double final_loss = 0.0;
  std::uint64_t steps_done = 0;
  bool stopped_early = false;
  std::filesystem::path checkpoint_path;
};

// Full loop: sample batches from the encoded dataset, optimize, emit a
// metrics row at every eval_every, checkpoint periodically and at the
// end. Deterministic given seeds; resumable from a checkpoint.
TrainResult run_training(const ModelConfig& model_cfg,
                         const TrainConfig& train_cfg,
                         const LineLayout& layout,
                         const std::vector<ExamplePair>& train_data,
                         const std::filesystem::path& out_dir,
                         const EvalHook& eval_hook = nullptr,
                         const std::optional<std::filesystem::path>&
                             resume_from = std::nullopt);

}  // namespace arith
