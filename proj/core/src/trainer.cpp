#include "arith/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <stdexcept>

#include "arith/checkpoint.hpp"
#include "arith/rng.hpp"
#include "arith/tokenizer.hpp"

namespace arith {

void TrainConfig::validate() const {
  if (learning_rate <= 0) throw std::invalid_argument("learning_rate <= 0");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
    throw std::invalid_argument("betas must lie in [0, 1)");
  if (weight_decay < 0) throw std::invalid_argument("weight_decay < 0");
  if (grad_norm_clip <= 0) throw std::invalid_argument("grad_norm_clip <= 0");
  if (batch_size <= 0) throw std::invalid_argument("batch_size <= 0");
  if (max_steps <= 0) throw std::invalid_argument("max_steps <= 0");
  if (eval_every <= 0) throw std::invalid_argument("eval_every <= 0");
}

double clip_grad_norm(ParamStore<float>& grads, double max_norm) {
  double sq = 0;
  grads.visit([&](const std::string&, Tensor<float>& t, bool) {
    for (std::size_t i = 0; i < t.count(); ++i)
      sq += static_cast<double>(t.v[i]) * t.v[i];
  });
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const float scale = static_cast<float>(max_norm / norm);
    grads.visit([&](const std::string&, Tensor<float>& t, bool) {
      for (auto& g : t.v) g *= scale;
    });
  }
  return norm;
}

void adamw_step(ParamStore<float>& params, ParamStore<float>& grads,
                OptState& opt, const TrainConfig& cfg,
                std::optional<double> lr_override) {
  const double lr = lr_override.value_or(cfg.learning_rate);
  const std::uint64_t t = opt.step + 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));

  // visit order is identical across same-shaped stores
  std::vector<Tensor<float>*> pw, gw, mw, vw;
  std::vector<char> decays;
  params.visit([&](const std::string&, Tensor<float>& t, bool d) {
    pw.push_back(&t);
    decays.push_back(d ? 1 : 0);
  });
  grads.visit(
      [&](const std::string&, Tensor<float>& t, bool) { gw.push_back(&t); });
  opt.m.visit(
      [&](const std::string&, Tensor<float>& t, bool) { mw.push_back(&t); });
  opt.v.visit(
      [&](const std::string&, Tensor<float>& t, bool) { vw.push_back(&t); });
  for (std::size_t k = 0; k < pw.size(); ++k) {
    Tensor<float>& g = *gw[k];
    Tensor<float>& m = *mw[k];
    Tensor<float>& v = *vw[k];
    const bool decay = decays[k] != 0;
    Tensor<float>& w = *pw[k];
    for (std::size_t i = 0; i < w.count(); ++i) {
      const double gi = g.v[i];
      const double mi = cfg.beta1 * m.v[i] + (1.0 - cfg.beta1) * gi;
      const double vi = cfg.beta2 * v.v[i] + (1.0 - cfg.beta2) * gi * gi;
      m.v[i] = static_cast<float>(mi);
      v.v[i] = static_cast<float>(vi);
      double upd = lr * (mi / bc1) / (std::sqrt(vi / bc2) + cfg.adam_eps);
      if (decay && cfg.weight_decay > 0)
        upd += lr * cfg.weight_decay * static_cast<double>(w.v[i]);
      w.v[i] = static_cast<float>(w.v[i] - upd);
    }
  }
  opt.step = t;
}

namespace {

void write_metrics_row(std::ofstream& os, bool& header_written,
                       std::uint64_t step, double loss,
                       const std::vector<std::pair<std::string, double>>& m) {
  if (!os.is_open()) return;
  if (!header_written) {
    os << "step,loss";
    for (const auto& [k, _] : m) os << ',' << k;
    os << '\n';
    header_written = true;
  }
  os << step << ',' << loss;
  for (const auto& [_, v] : m) os << ',' << v;
  os << '\n';
  os.flush();
}

}  // namespace

TrainResult run_training(const ModelConfig& model_cfg,
                         const TrainConfig& train_cfg,
                         const LineLayout& layout,
                         const std::vector<ExamplePair>& train_data,
                         const std::filesystem::path& out_dir,
                         const EvalHook& eval_hook,
                         const std::optional<std::filesystem::path>&
                             resume_from) {
  model_cfg.validate();
  train_cfg.validate();
  layout.validate();
  if (train_data.empty()) throw std::invalid_argument("empty training set");

  const int T = layout.sequence_length();
  if (T > model_cfg.context_window)
    throw std::invalid_argument("layout exceeds context window");

  // encode once; rows are fixed length
  std::vector<int> rows;
  rows.reserve(train_data.size() * static_cast<std::size_t>(T));
  for (const auto& e : train_data) {
    const EncodedExample enc = encode(e, layout);
    rows.insert(rows.end(), enc.tokens.begin(), enc.tokens.end());
  }

  ParamStore<float> params;
  OptState opt;
  Rng data_rng(split_stream(train_cfg.seed, "train-data", 0));
  std::uint64_t start_step = 0;
  if (resume_from) {
    CheckpointState st = load_checkpoint(*resume_from);
    params = std::move(st.params);
    if (!st.opt) throw std::runtime_error("checkpoint lacks optimizer state");
    opt = std::move(*st.opt);
    start_step = st.step;
    if (!st.data_rng.empty()) data_rng = Rng::deserialize(st.data_rng);
  } else {
    params = init_params<float>(model_cfg);
    opt = OptState::shaped(model_cfg);
  }

  ParamStore<float> grads = ParamStore<float>::shaped(model_cfg);
  Activations<float> acts;
  const std::vector<std::uint8_t> row_mask =
      loss_row_mask(layout, train_cfg.loss_mask);

  std::ofstream metrics;
  bool header_written = false;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    metrics.open(out_dir / "metrics.csv",
                 start_step == 0 ? std::ios::trunc : std::ios::app);
    if (start_step > 0) header_written = true;
  }

  const int B = train_cfg.batch_size;
  Batch batch;
  batch.size = B;
  batch.seq_len = T;
  batch.tokens.resize(static_cast<std::size_t>(B) * T);
  batch.positions.resize(static_cast<std::size_t>(B) * T);

  auto checkpoint_now = [&](std::uint64_t step,
                            const char* name) -> std::filesystem::path {
    if (out_dir.empty()) return {};
    const auto path = out_dir / name;
    save_checkpoint(path, params, &opt, step, data_rng.serialize());
    return path;
  };

  TrainResult res;
  double loss = 0;
  for (std::uint64_t step = start_step;
       step < static_cast<std::uint64_t>(train_cfg.max_steps); ++step) {
    for (int b = 0; b < B; ++b) {
      const std::uint64_t idx = data_rng.uniform_below(train_data.size());
      std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(idx) * T, T,
                  batch.tokens.begin() + static_cast<std::ptrdiff_t>(b) * T);
      int offset = 0;
      if (model_cfg.pe_kind == PeKind::Abacus && model_cfg.abacus_max_offset > 0)
        offset = static_cast<int>(data_rng.uniform_below(
            static_cast<std::uint64_t>(model_cfg.abacus_max_offset) + 1));
      const std::vector<int> pos =
          assign_positions(layout, model_cfg.pe_kind, T, offset);
      std::copy(pos.begin(), pos.end(),
                batch.positions.begin() + static_cast<std::ptrdiff_t>(b) * T);
    }

    const std::uint64_t dropout_seed =
        stream_seed(train_cfg.seed, "dropout", step);
    grads.zero_all();
    forward(params, batch, true, dropout_seed, acts);
    loss = loss_from_logits(acts, batch.tokens, row_mask);
    if (!std::isfinite(loss)) {
      checkpoint_now(step, "checkpoint_diverged.bin");
      throw std::runtime_error("non-finite loss at step " +
                               std::to_string(step));
    }
    backward(params, batch, acts, row_mask, grads);
    clip_grad_norm(grads, train_cfg.grad_norm_clip);

    double lr = train_cfg.learning_rate;
    if (train_cfg.cosine_decay) {
      const double frac = static_cast<double>(step) /
                          static_cast<double>(train_cfg.max_steps);
      lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
    }
    adamw_step(params, grads, opt, train_cfg, lr);

    const std::uint64_t done = step + 1;
    res.steps_done = done;
    const bool eval_point =
        done % static_cast<std::uint64_t>(train_cfg.eval_every) == 0 ||
        done == static_cast<std::uint64_t>(train_cfg.max_steps);
    if (eval_point) {
      EvalOutcome out;
      if (eval_hook) out = eval_hook(params, done);
      write_metrics_row(metrics, header_written, done, loss, out.metrics);
      if (out.stop) {
        res.stopped_early = true;
        res.checkpoint_path = checkpoint_now(done, "checkpoint.bin");
        res.final_loss = loss;
        return res;
      }
    }
    if (train_cfg.checkpoint_every > 0 &&
        done % static_cast<std::uint64_t>(train_cfg.checkpoint_every) == 0)
      checkpoint_now(done, "checkpoint.bin");
  }

  res.final_loss = loss;
  res.checkpoint_path = checkpoint_now(res.steps_done, "checkpoint.bin");
  return res;
}

}  // namespace arith
