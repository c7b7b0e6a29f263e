#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "arith/rng.hpp"
#include "arith/tensor.hpp"
#include "arith/tokenizer.hpp"

namespace arith {

enum class PeKind { LearnedAbsolute, RelativeBias, Abacus };

struct ModelConfig {
  int num_layers = 3;
  int num_heads = 3;
  int embed_dim = 48;
  int vocab_size = vocab::kSize;
  int context_window = 256;
  float dropout_prob = 0.2f;
  PeKind pe_kind = PeKind::LearnedAbsolute;
  int abacus_max_offset = 100;   // Abacus only
  int rel_max_distance = 32;     // RelativeBias only
  std::uint64_t seed = 0;

  static ModelConfig nano() { return {}; }
  static ModelConfig micro() {
    ModelConfig c;
    c.num_layers = 4;
    c.num_heads = 4;
    c.embed_dim = 128;
    return c;
  }
  static ModelConfig mini() {
    ModelConfig c;
    c.num_layers = 6;
    c.num_heads = 6;
    c.embed_dim = 384;
    return c;
  }

  int head_dim() const { return embed_dim / num_heads; }
  int mlp_dim() const { return 4 * embed_dim; }

  void validate() const {
    if (embed_dim % num_heads != 0)
      throw std::invalid_argument("embed_dim must be divisible by num_heads");
    if (num_layers < 1 || num_heads < 1 || embed_dim < 1)
      throw std::invalid_argument("model dimensions must be positive");
    if (vocab_size != vocab::kSize)
      throw std::invalid_argument("vocab size is fixed at 16");
    if (!(dropout_prob >= 0.0f && dropout_prob < 1.0f))
      throw std::invalid_argument("dropout_prob must be in [0, 1)");
  }
};

template <class Real>
struct LayerParams {
  Tensor<Real> ln1_g, ln1_b;
  Tensor<Real> qkv_w, qkv_b;  // [d, 3d], [3d]
  Tensor<Real> o_w, o_b;      // [d, d], [d]
  Tensor<Real> ln2_g, ln2_b;
  Tensor<Real> fc1_w, fc1_b;  // [d, 4d], [4d]
  Tensor<Real> fc2_w, fc2_b;  // [4d, d], [d]
};

// Named parameter set. The same container doubles as a gradient store
// and as the optimizer moment store.
template <class Real>
struct ParamStore {
  ModelConfig config;
  Tensor<Real> tok_emb;   // [V, d]
  Tensor<Real> pos_emb;   // APE: [T_max, d]; Abacus: [K + T_max, d]; else empty
  Tensor<Real> rel_bias;  // RelativeBias: [heads, 2R+1]; else empty
  std::vector<LayerParams<Real>> layers;
  Tensor<Real> lnf_g, lnf_b;
  Tensor<Real> unemb;  // [d, V]

  static ParamStore shaped(const ModelConfig& cfg) {
    cfg.validate();
    ParamStore p;
    p.config = cfg;
    const int d = cfg.embed_dim;
    p.tok_emb = Tensor<Real>({cfg.vocab_size, d});
    if (cfg.pe_kind == PeKind::LearnedAbsolute)
      p.pos_emb = Tensor<Real>({cfg.context_window, d});
    else if (cfg.pe_kind == PeKind::Abacus)
      p.pos_emb = Tensor<Real>({cfg.abacus_max_offset + cfg.context_window, d});
    if (cfg.pe_kind == PeKind::RelativeBias)
      p.rel_bias = Tensor<Real>({cfg.num_heads, 2 * cfg.rel_max_distance + 1});
    p.layers.resize(cfg.num_layers);
    for (auto& l : p.layers) {
      l.ln1_g = Tensor<Real>({d});
      l.ln1_b = Tensor<Real>({d});
      l.qkv_w = Tensor<Real>({d, 3 * d});
      l.qkv_b = Tensor<Real>({3 * d});
      l.o_w = Tensor<Real>({d, d});
      l.o_b = Tensor<Real>({d});
      l.ln2_g = Tensor<Real>({d});
      l.ln2_b = Tensor<Real>({d});
      l.fc1_w = Tensor<Real>({d, cfg.mlp_dim()});
      l.fc1_b = Tensor<Real>({cfg.mlp_dim()});
      l.fc2_w = Tensor<Real>({cfg.mlp_dim(), d});
      l.fc2_b = Tensor<Real>({d});
    }
    p.lnf_g = Tensor<Real>({d});
    p.lnf_b = Tensor<Real>({d});
    p.unemb = Tensor<Real>({d, cfg.vocab_size});
    return p;
  }

  // Enumerate tensors in a fixed order. decay marks the matrix weights
  // that receive weight decay (never LN, biases, or embeddings).
  template <class Fn>
  void visit(Fn&& fn) {
    fn("tok_emb", tok_emb, false);
    if (!pos_emb.v.empty()) fn("pos_emb", pos_emb, false);
    if (!rel_bias.v.empty()) fn("rel_bias", rel_bias, false);
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const std::string pre = "layer" + std::to_string(i) + ".";
      auto& l = layers[i];
      fn(pre + "ln1_g", l.ln1_g, false);
      fn(pre + "ln1_b", l.ln1_b, false);
      fn(pre + "qkv_w", l.qkv_w, true);
      fn(pre + "qkv_b", l.qkv_b, false);
      fn(pre + "o_w", l.o_w, true);
      fn(pre + "o_b", l.o_b, false);
      fn(pre + "ln2_g", l.ln2_g, false);
      fn(pre + "ln2_b", l.ln2_b, false);
      fn(pre + "fc1_w", l.fc1_w, true);
      fn(pre + "fc1_b", l.fc1_b, false);
      fn(pre + "fc2_w", l.fc2_w, true);
      fn(pre + "fc2_b", l.fc2_b, false);
    }
    fn("lnf_g", lnf_g, false);
    fn("lnf_b", lnf_b, false);
    fn("unemb", unemb, true);
  }

  std::size_t param_count() {
    std::size_t n = 0;
    visit([&](const std::string&, Tensor<Real>& t, bool) { n += t.count(); });
    return n;
  }

  void zero_all() {
    visit([](const std::string&, Tensor<Real>& t, bool) { t.zero(); });
  }
};

// Deterministic initialization: Normal(0, 0.02) weights, residual
// output projections scaled by 1/sqrt(2L), LN gains 1, biases 0.
template <class Real>
ParamStore<Real> init_params(const ModelConfig& cfg) {
  ParamStore<Real> p = ParamStore<Real>::shaped(cfg);
  Rng rng = split_stream(cfg.seed, "init");
  const double std_base = 0.02;
  const double std_resid = std_base / std::sqrt(2.0 * cfg.num_layers);
  auto fill_normal = [&](Tensor<Real>& t, double sd) {
    for (auto& x : t.v) x = static_cast<Real>(rng.normal(0.0, sd));
  };
  auto fill_const = [](Tensor<Real>& t, Real c) {
    std::fill(t.v.begin(), t.v.end(), c);
  };
  fill_normal(p.tok_emb, std_base);
  if (!p.pos_emb.v.empty()) fill_normal(p.pos_emb, std_base);
  // rel_bias starts at zero
  for (auto& l : p.layers) {
    fill_const(l.ln1_g, Real(1));
    fill_normal(l.qkv_w, std_base);
    fill_normal(l.o_w, std_resid);
    fill_const(l.ln2_g, Real(1));
    fill_normal(l.fc1_w, std_base);
    fill_normal(l.fc2_w, std_resid);
  }
  fill_const(p.lnf_g, Real(1));
  fill_normal(p.unemb, std_base);
  return p;
}

// Per-token positional indices for one sequence of a fixed layout.
// LearnedAbsolute: 0..T-1. Abacus: digit tokens get significance within
// their field plus a shared offset, non-digits get 0. RelativeBias: all
// zero (the bias acts inside attention instead).
std::vector<int> assign_positions(const LineLayout& layout, PeKind pe_kind,
                                  int seq_len, int abacus_offset = 0);

struct Batch {
  int size = 0;        // B
  int seq_len = 0;     // T
  std::vector<int> tokens;     // [B*T]
  std::vector<int> positions;  // [B*T]
};

namespace detail {

inline bool dropout_keep(std::uint64_t seed, std::uint64_t idx, float p) {
  // Counter-based: one mix per element, independent of evaluation order.
  return (mix64(seed ^ idx) >> 40) >= static_cast<std::uint64_t>(
                                          p * 16777216.0f);
}

}  // namespace detail

// All intermediates of one forward pass, kept for the backward pass.
template <class Real>
struct Activations {
  int B = 0, T = 0;
  std::uint64_t dropout_seed = 0;
  bool train_mode = false;

  Tensor<Real> x0;  // embedded input after dropout [B*T, d]
  struct LayerActs {
    Tensor<Real> ln1_xhat, ln1_out;  // [B*T, d]
    std::vector<Real> ln1_rstd;      // [B*T]
    Tensor<Real> qkv;                // [B*T, 3d]
    Tensor<Real> att_probs;          // [B, h, T, T] post-softmax
    Tensor<Real> att_out;            // [B*T, d] heads concatenated
    Tensor<Real> resid1;             // [B*T, d]
    Tensor<Real> ln2_xhat, ln2_out;
    std::vector<Real> ln2_rstd;
    Tensor<Real> fc1_pre;            // [B*T, 4d] pre-GELU
    Tensor<Real> fc1_act;            // [B*T, 4d]
    Tensor<Real> resid2;             // [B*T, d]
  };
  std::vector<LayerActs> layer;
  Tensor<Real> lnf_xhat, lnf_out;
  std::vector<Real> lnf_rstd;
  Tensor<Real> logits;  // [B*T, V]
  Tensor<Real> probs;   // [B*T, V]
};

namespace detail {

template <class Real>
void layer_norm_forward(const Real* x, const Real* g, const Real* b, int rows,
                        int d, Real* xhat, Real* out, Real* rstd_out) {
  for (int r = 0; r < rows; ++r) {
    const Real* xr = x + static_cast<std::size_t>(r) * d;
    Real mean = 0;
    for (int i = 0; i < d; ++i) mean += xr[i];
    mean /= d;
    Real var = 0;
    for (int i = 0; i < d; ++i) {
      const Real c = xr[i] - mean;
      var += c * c;
    }
    var /= d;
    const Real rstd = Real(1) / std::sqrt(var + Real(1e-5));
    rstd_out[r] = rstd;
    Real* xh = xhat + static_cast<std::size_t>(r) * d;
    Real* o = out + static_cast<std::size_t>(r) * d;
    for (int i = 0; i < d; ++i) {
      xh[i] = (xr[i] - mean) * rstd;
      o[i] = g[i] * xh[i] + b[i];
    }
  }
}

template <class Real>
void layer_norm_backward(const Real* dout, const Real* xhat, const Real* rstd,
                         const Real* g, int rows, int d, Real* dx, Real* dg,
                         Real* db) {
  for (int r = 0; r < rows; ++r) {
    const std::size_t off = static_cast<std::size_t>(r) * d;
    const Real* do_ = dout + off;
    const Real* xh = xhat + off;
    Real* dxr = dx + off;
    Real sum_dxhat = 0, sum_dxhat_xhat = 0;
    for (int i = 0; i < d; ++i) {
      const Real dxh = do_[i] * g[i];
      sum_dxhat += dxh;
      sum_dxhat_xhat += dxh * xh[i];
      dg[i] += do_[i] * xh[i];
      db[i] += do_[i];
    }
    const Real inv_d = Real(1) / d;
    for (int i = 0; i < d; ++i) {
      const Real dxh = do_[i] * g[i];
      dxr[i] += rstd[r] * (dxh - inv_d * sum_dxhat - xh[i] * inv_d * sum_dxhat_xhat);
    }
  }
}

template <class Real>
Real gelu(Real x) {
  return Real(0.5) * x * (Real(1) + std::erf(x * Real(0.7071067811865476)));
}

template <class Real>
Real gelu_grad(Real x) {
  const Real cdf = Real(0.5) * (Real(1) + std::erf(x * Real(0.7071067811865476)));
  const Real pdf = std::exp(Real(-0.5) * x * x) * Real(0.3989422804014327);
  return cdf + x * pdf;
}

}  // namespace detail

// Forward pass; logits land in acts.logits. Dropout is active only in
// train mode and is driven by acts.dropout_seed.
template <class Real>
void forward(ParamStore<Real>& p, const Batch& batch, bool train_mode,
             std::uint64_t dropout_seed, Activations<Real>& acts) {
  const ModelConfig& cfg = p.config;
  const int B = batch.size, T = batch.seq_len, d = cfg.embed_dim;
  const int H = cfg.num_heads, hs = cfg.head_dim(), V = cfg.vocab_size;
  if (T > cfg.context_window)
    throw std::invalid_argument("sequence exceeds context window");
  const int rows = B * T;
  const float pdrop = train_mode ? cfg.dropout_prob : 0.0f;
  const Real keep_scale = Real(1) / Real(1.0f - pdrop);

  acts.B = B;
  acts.T = T;
  acts.train_mode = train_mode;
  acts.dropout_seed = dropout_seed;
  acts.x0 = Tensor<Real>({rows, d});
  acts.layer.assign(cfg.num_layers, {});
  std::uint64_t drop_site = 0;
  auto apply_dropout = [&](Tensor<Real>& t) {
    if (pdrop <= 0.0f) {
      ++drop_site;
      return;
    }
    const std::uint64_t site_seed = hash_combine(dropout_seed, drop_site++);
    for (std::size_t i = 0; i < t.v.size(); ++i)
      t.v[i] = detail::dropout_keep(site_seed, i, pdrop) ? t.v[i] * keep_scale
                                                         : Real(0);
  };

  // Embedding.
  for (int r = 0; r < rows; ++r) {
    const int tok = batch.tokens[r];
    if (tok < 0 || tok >= V) throw std::invalid_argument("token id out of range");
    const Real* te = p.tok_emb.data() + static_cast<std::size_t>(tok) * d;
    Real* x = acts.x0.data() + static_cast<std::size_t>(r) * d;
    for (int i = 0; i < d; ++i) x[i] = te[i];
    if (!p.pos_emb.v.empty()) {
      const int pos = batch.positions[r];
      if (pos < 0 || pos >= p.pos_emb.shape[0])
        throw std::invalid_argument("position index out of table");
      const Real* pe = p.pos_emb.data() + static_cast<std::size_t>(pos) * d;
      for (int i = 0; i < d; ++i) x[i] += pe[i];
    }
  }
  apply_dropout(acts.x0);

  const Real att_scale = Real(1) / std::sqrt(Real(hs));
  const int R = cfg.rel_max_distance;

  const Tensor<Real>* x_in = &acts.x0;
  for (int li = 0; li < cfg.num_layers; ++li) {
    auto& l = p.layers[li];
    auto& a = acts.layer[li];
    a.ln1_xhat = Tensor<Real>({rows, d});
    a.ln1_out = Tensor<Real>({rows, d});
    a.ln1_rstd.assign(rows, Real(0));
    detail::layer_norm_forward(x_in->data(), l.ln1_g.data(), l.ln1_b.data(),
                               rows, d, a.ln1_xhat.data(), a.ln1_out.data(),
                               a.ln1_rstd.data());

    a.qkv = Tensor<Real>({rows, 3 * d});
    for (int r = 0; r < rows; ++r)
      for (int i = 0; i < 3 * d; ++i)
        a.qkv.v[static_cast<std::size_t>(r) * 3 * d + i] = l.qkv_b.v[i];
    gemm(false, false, rows, 3 * d, d, Real(1), a.ln1_out.data(), d,
         l.qkv_w.data(), 3 * d, Real(1), a.qkv.data(), 3 * d);

    a.att_probs = Tensor<Real>({B, H, T, T});
    a.att_out = Tensor<Real>({rows, d});
    const std::uint64_t att_drop_seed = hash_combine(dropout_seed, drop_site++);
    for (int b = 0; b < B; ++b) {
      for (int h = 0; h < H; ++h) {
        const int hoff = h * hs;
        Real* probs = a.att_probs.data() +
                      ((static_cast<std::size_t>(b) * H + h) * T) * T;
        for (int i = 0; i < T; ++i) {
          const Real* qi =
              a.qkv.data() + (static_cast<std::size_t>(b) * T + i) * 3 * d +
              hoff;
          Real* prow = probs + static_cast<std::size_t>(i) * T;
          Real maxs = -1e30;
          for (int j = 0; j <= i; ++j) {
            const Real* kj = a.qkv.data() +
                             (static_cast<std::size_t>(b) * T + j) * 3 * d + d +
                             hoff;
            Real s = 0;
            for (int e = 0; e < hs; ++e) s += qi[e] * kj[e];
            s *= att_scale;
            if (!p.rel_bias.v.empty()) {
              int rel = i - j;
              if (rel > R) rel = R;
              s += p.rel_bias.v[static_cast<std::size_t>(h) * (2 * R + 1) + R +
                                rel];
            }
            prow[j] = s;
            if (s > maxs) maxs = s;
          }
          Real denom = 0;
          for (int j = 0; j <= i; ++j) {
            prow[j] = std::exp(prow[j] - maxs);
            denom += prow[j];
          }
          const Real inv = Real(1) / denom;
          for (int j = 0; j <= i; ++j) prow[j] *= inv;
          for (int j = i + 1; j < T; ++j) prow[j] = 0;

          // Attention-probability dropout and value mix.
          Real* out = a.att_out.data() +
                      (static_cast<std::size_t>(b) * T + i) * d + hoff;
          for (int e = 0; e < hs; ++e) out[e] = 0;
          for (int j = 0; j <= i; ++j) {
            Real pij = prow[j];
            if (pdrop > 0.0f) {
              const std::uint64_t idx =
                  ((static_cast<std::uint64_t>(b) * H + h) * T + i) * T + j;
              pij = detail::dropout_keep(att_drop_seed, idx, pdrop)
                        ? pij * keep_scale
                        : Real(0);
            }
            if (pij == Real(0)) continue;
            const Real* vj = a.qkv.data() +
                             (static_cast<std::size_t>(b) * T + j) * 3 * d +
                             2 * d + hoff;
            for (int e = 0; e < hs; ++e) out[e] += pij * vj[e];
          }
        }
      }
    }

    a.resid1 = Tensor<Real>({rows, d});
    // o projection into resid1, then dropout on the branch, then add x.
    for (int r = 0; r < rows; ++r)
      for (int i = 0; i < d; ++i)
        a.resid1.v[static_cast<std::size_t>(r) * d + i] = l.o_b.v[i];
    gemm(false, false, rows, d, d, Real(1), a.att_out.data(), d, l.o_w.data(),
         d, Real(1), a.resid1.data(), d);
    apply_dropout(a.resid1);
    for (std::size_t i = 0; i < a.resid1.v.size(); ++i)
      a.resid1.v[i] += x_in->v[i];

    a.ln2_xhat = Tensor<Real>({rows, d});
    a.ln2_out = Tensor<Real>({rows, d});
    a.ln2_rstd.assign(rows, Real(0));
    detail::layer_norm_forward(a.resid1.data(), l.ln2_g.data(), l.ln2_b.data(),
                               rows, d, a.ln2_xhat.data(), a.ln2_out.data(),
                               a.ln2_rstd.data());

    const int md = cfg.mlp_dim();
    a.fc1_pre = Tensor<Real>({rows, md});
    for (int r = 0; r < rows; ++r)
      for (int i = 0; i < md; ++i)
        a.fc1_pre.v[static_cast<std::size_t>(r) * md + i] = l.fc1_b.v[i];
    gemm(false, false, rows, md, d, Real(1), a.ln2_out.data(), d,
         l.fc1_w.data(), md, Real(1), a.fc1_pre.data(), md);
    a.fc1_act = Tensor<Real>({rows, md});
    for (std::size_t i = 0; i < a.fc1_act.v.size(); ++i)
      a.fc1_act.v[i] = detail::gelu(a.fc1_pre.v[i]);

    a.resid2 = Tensor<Real>({rows, d});
    for (int r = 0; r < rows; ++r)
      for (int i = 0; i < d; ++i)
        a.resid2.v[static_cast<std::size_t>(r) * d + i] = l.fc2_b.v[i];
    gemm(false, false, rows, d, md, Real(1), a.fc1_act.data(), md,
         l.fc2_w.data(), d, Real(1), a.resid2.data(), d);
    apply_dropout(a.resid2);
    for (std::size_t i = 0; i < a.resid2.v.size(); ++i)
      a.resid2.v[i] += a.resid1.v[i];

    x_in = &a.resid2;
  }

  acts.lnf_xhat = Tensor<Real>({rows, d});
  acts.lnf_out = Tensor<Real>({rows, d});
  acts.lnf_rstd.assign(rows, Real(0));
  detail::layer_norm_forward(x_in->data(), p.lnf_g.data(), p.lnf_b.data(),
                             rows, d, acts.lnf_xhat.data(),
                             acts.lnf_out.data(), acts.lnf_rstd.data());
  acts.logits = Tensor<Real>({rows, V});
  gemm(false, false, rows, V, d, Real(1), acts.lnf_out.data(), d,
       p.unemb.data(), V, Real(0), acts.logits.data(), V);
}

enum class LossMask { FullSequence, AnswerOnly };

// Rows of the next-token loss: row t predicts token t+1. FullSequence
// covers every row (everything after BOS); AnswerOnly restricts to the
// answer digits and the terminator.
std::vector<std::uint8_t> loss_row_mask(const LineLayout& layout,
                                        LossMask policy);

// Mean cross-entropy over masked rows; fills acts.probs for backward.
template <class Real>
Real loss_from_logits(Activations<Real>& acts, const std::vector<int>& tokens,
                      const std::vector<std::uint8_t>& row_mask) {
  const int B = acts.B, T = acts.T;
  const int V = acts.logits.shape[1];
  acts.probs = Tensor<Real>({B * T, V});
  Real total = 0;
  std::size_t n_masked = 0;
  for (int b = 0; b < B; ++b) {
    for (int t = 0; t < T - 1; ++t) {
      if (!row_mask[t]) continue;
      const std::size_t r = static_cast<std::size_t>(b) * T + t;
      const Real* lg = acts.logits.data() + r * V;
      Real* pr = acts.probs.data() + r * V;
      Real mx = lg[0];
      for (int k = 1; k < V; ++k) mx = std::max(mx, lg[k]);
      Real denom = 0;
      for (int k = 0; k < V; ++k) {
        pr[k] = std::exp(lg[k] - mx);
        denom += pr[k];
      }
      const Real inv = Real(1) / denom;
      for (int k = 0; k < V; ++k) pr[k] *= inv;
      const int target = tokens[r + 1];
      total += -std::log(std::max(pr[target], Real(1e-30)));
      ++n_masked;
    }
  }
  if (n_masked == 0) throw std::invalid_argument("empty loss mask");
  return total / static_cast<Real>(n_masked);
}

// Exact analytic gradients of the forward pass above. Requires a prior
// train-mode (or dropout-free) forward with the same dropout seed plus
// loss_from_logits on the same batch.
template <class Real>
void backward(ParamStore<Real>& p, const Batch& batch,
              Activations<Real>& acts,
              const std::vector<std::uint8_t>& row_mask,
              ParamStore<Real>& grads) {
  const ModelConfig& cfg = p.config;
  const int B = acts.B, T = acts.T, d = cfg.embed_dim;
  const int H = cfg.num_heads, hs = cfg.head_dim(), V = cfg.vocab_size;
  const int rows = B * T;
  const float pdrop = acts.train_mode ? cfg.dropout_prob : 0.0f;
  const Real keep_scale = Real(1) / Real(1.0f - pdrop);

  std::size_t n_masked = 0;
  for (int t = 0; t < T - 1; ++t)
    if (row_mask[t]) ++n_masked;
  n_masked *= B;
  if (n_masked == 0) throw std::invalid_argument("empty loss mask");
  const Real inv_n = Real(1) / static_cast<Real>(n_masked);

  // dlogits = (probs - onehot(target)) / n_masked on masked rows.
  Tensor<Real> dlogits({rows, V});
  for (int b = 0; b < B; ++b)
    for (int t = 0; t < T - 1; ++t) {
      if (!row_mask[t]) continue;
      const std::size_t r = static_cast<std::size_t>(b) * T + t;
      const Real* pr = acts.probs.data() + r * V;
      Real* dl = dlogits.data() + r * V;
      for (int k = 0; k < V; ++k) dl[k] = pr[k] * inv_n;
      dl[batch.tokens[r + 1]] -= inv_n;
    }

  // Unembedding and final LN.
  gemm(true, false, d, V, rows, Real(1), acts.lnf_out.data(), d,
       dlogits.data(), V, Real(1), grads.unemb.data(), V);
  Tensor<Real> dlnf_out({rows, d});
  gemm(false, true, rows, d, V, Real(1), dlogits.data(), V, p.unemb.data(), V,
       Real(0), dlnf_out.data(), d);
  Tensor<Real> dx({rows, d});
  detail::layer_norm_backward(dlnf_out.data(), acts.lnf_xhat.data(),
                              acts.lnf_rstd.data(), p.lnf_g.data(), rows, d,
                              dx.data(), grads.lnf_g.data(),
                              grads.lnf_b.data());

  const Real att_scale = Real(1) / std::sqrt(Real(hs));
  const int R = cfg.rel_max_distance;

  // Recover which dropout site indices were used in forward order.
  std::uint64_t n_sites = 1;  // embedding
  std::vector<std::uint64_t> att_site(cfg.num_layers), resid1_site(cfg.num_layers),
      resid2_site(cfg.num_layers);
  for (int li = 0; li < cfg.num_layers; ++li) {
    att_site[li] = n_sites++;
    resid1_site[li] = n_sites++;
    resid2_site[li] = n_sites++;
  }

  for (int li = cfg.num_layers - 1; li >= 0; --li) {
    auto& l = p.layers[li];
    auto& g = grads.layers[li];
    auto& a = acts.layer[li];
    const int md = cfg.mlp_dim();

    // dx currently holds the gradient w.r.t. resid2 (= this block's output).
    // MLP branch gradient: d(branch) = dropout-mask o dx.
    Tensor<Real> dbranch({rows, d});
    if (pdrop > 0.0f) {
      const std::uint64_t site_seed =
          hash_combine(acts.dropout_seed, resid2_site[li]);
      for (std::size_t i = 0; i < dbranch.v.size(); ++i)
        dbranch.v[i] = detail::dropout_keep(site_seed, i, pdrop)
                           ? dx.v[i] * keep_scale
                           : Real(0);
    } else {
      dbranch.v = dx.v;
    }
    for (int i = 0; i < d; ++i) {
      Real s = 0;
      for (int r = 0; r < rows; ++r)
        s += dbranch.v[static_cast<std::size_t>(r) * d + i];
      g.fc2_b.v[i] += s;
    }
    gemm(true, false, md, d, rows, Real(1), a.fc1_act.data(), md,
         dbranch.data(), d, Real(1), g.fc2_w.data(), d);
    Tensor<Real> dfc1_act({rows, md});
    gemm(false, true, rows, md, d, Real(1), dbranch.data(), d, l.fc2_w.data(),
         d, Real(0), dfc1_act.data(), md);
    Tensor<Real> dfc1_pre({rows, md});
    for (std::size_t i = 0; i < dfc1_pre.v.size(); ++i)
      dfc1_pre.v[i] = dfc1_act.v[i] * detail::gelu_grad(a.fc1_pre.v[i]);
    for (int i = 0; i < md; ++i) {
      Real s = 0;
      for (int r = 0; r < rows; ++r)
        s += dfc1_pre.v[static_cast<std::size_t>(r) * md + i];
      g.fc1_b.v[i] += s;
    }
    gemm(true, false, d, md, rows, Real(1), a.ln2_out.data(), d,
         dfc1_pre.data(), md, Real(1), g.fc1_w.data(), md);
    Tensor<Real> dln2_out({rows, d});
    gemm(false, true, rows, d, md, Real(1), dfc1_pre.data(), md,
         l.fc1_w.data(), md, Real(0), dln2_out.data(), d);

    // dx (w.r.t. resid1) = dx (residual passthrough) + LN2 backward.
    detail::layer_norm_backward(dln2_out.data(), a.ln2_xhat.data(),
                                a.ln2_rstd.data(), l.ln2_g.data(), rows, d,
                                dx.data(), g.ln2_g.data(), g.ln2_b.data());

    // Attention branch: d(o_out) = dropout-mask o dx.
    if (pdrop > 0.0f) {
      const std::uint64_t site_seed =
          hash_combine(acts.dropout_seed, resid1_site[li]);
      for (std::size_t i = 0; i < dbranch.v.size(); ++i)
        dbranch.v[i] = detail::dropout_keep(site_seed, i, pdrop)
                           ? dx.v[i] * keep_scale
                           : Real(0);
    } else {
      dbranch.v = dx.v;
    }
    for (int i = 0; i < d; ++i) {
      Real s = 0;
      for (int r = 0; r < rows; ++r)
        s += dbranch.v[static_cast<std::size_t>(r) * d + i];
      g.o_b.v[i] += s;
    }
    gemm(true, false, d, d, rows, Real(1), a.att_out.data(), d, dbranch.data(),
         d, Real(1), g.o_w.data(), d);
    Tensor<Real> datt_out({rows, d});
    gemm(false, true, rows, d, d, Real(1), dbranch.data(), d, l.o_w.data(), d,
         Real(0), datt_out.data(), d);

    Tensor<Real> dqkv({rows, 3 * d});
    const std::uint64_t att_drop_seed =
        hash_combine(acts.dropout_seed, att_site[li]);
    for (int b = 0; b < B; ++b) {
      for (int h = 0; h < H; ++h) {
        const int hoff = h * hs;
        const Real* probs = a.att_probs.data() +
                            ((static_cast<std::size_t>(b) * H + h) * T) * T;
        std::vector<Real> dprobs(static_cast<std::size_t>(T) * T, Real(0));
        for (int i = 0; i < T; ++i) {
          const Real* dout = datt_out.data() +
                             (static_cast<std::size_t>(b) * T + i) * d + hoff;
          for (int j = 0; j <= i; ++j) {
            Real keep = Real(1);
            if (pdrop > 0.0f) {
              const std::uint64_t idx =
                  ((static_cast<std::uint64_t>(b) * H + h) * T + i) * T + j;
              keep = detail::dropout_keep(att_drop_seed, idx, pdrop)
                         ? keep_scale
                         : Real(0);
            }
            if (keep == Real(0)) continue;
            const Real pij = probs[static_cast<std::size_t>(i) * T + j] * keep;
            const Real* vj = a.qkv.data() +
                             (static_cast<std::size_t>(b) * T + j) * 3 * d +
                             2 * d + hoff;
            Real* dvj = dqkv.data() +
                        (static_cast<std::size_t>(b) * T + j) * 3 * d + 2 * d +
                        hoff;
            Real dp = 0;
            for (int e = 0; e < hs; ++e) {
              dvj[e] += pij * dout[e];
              dp += dout[e] * vj[e];
            }
            dprobs[static_cast<std::size_t>(i) * T + j] = dp * keep;
          }
        }
        // Softmax backward and score gradients.
        for (int i = 0; i < T; ++i) {
          const Real* prow = probs + static_cast<std::size_t>(i) * T;
          const Real* dprow = dprobs.data() + static_cast<std::size_t>(i) * T;
          Real dot = 0;
          for (int j = 0; j <= i; ++j) dot += dprow[j] * prow[j];
          const Real* qi =
              a.qkv.data() + (static_cast<std::size_t>(b) * T + i) * 3 * d +
              hoff;
          Real* dqi = dqkv.data() +
                      (static_cast<std::size_t>(b) * T + i) * 3 * d + hoff;
          for (int j = 0; j <= i; ++j) {
            const Real ds = prow[j] * (dprow[j] - dot);
            if (ds == Real(0)) continue;
            const Real* kj = a.qkv.data() +
                             (static_cast<std::size_t>(b) * T + j) * 3 * d + d +
                             hoff;
            Real* dkj = dqkv.data() +
                        (static_cast<std::size_t>(b) * T + j) * 3 * d + d +
                        hoff;
            for (int e = 0; e < hs; ++e) {
              dqi[e] += ds * att_scale * kj[e];
              dkj[e] += ds * att_scale * qi[e];
            }
            if (!grads.rel_bias.v.empty()) {
              int rel = i - j;
              if (rel > R) rel = R;
              grads.rel_bias
                  .v[static_cast<std::size_t>(h) * (2 * R + 1) + R + rel] += ds;
            }
          }
        }
      }
    }

    for (int i = 0; i < 3 * d; ++i) {
      Real s = 0;
      for (int r = 0; r < rows; ++r)
        s += dqkv.v[static_cast<std::size_t>(r) * 3 * d + i];
      g.qkv_b.v[i] += s;
    }
    gemm(true, false, d, 3 * d, rows, Real(1), a.ln1_out.data(), d,
         dqkv.data(), 3 * d, Real(1), g.qkv_w.data(), 3 * d);
    Tensor<Real> dln1_out({rows, d});
    gemm(false, true, rows, d, 3 * d, Real(1), dqkv.data(), 3 * d,
         l.qkv_w.data(), 3 * d, Real(0), dln1_out.data(), d);
    detail::layer_norm_backward(dln1_out.data(), a.ln1_xhat.data(),
                                a.ln1_rstd.data(), l.ln1_g.data(), rows, d,
                                dx.data(), g.ln1_g.data(), g.ln1_b.data());
  }

  // Embedding backward through the input dropout.
  if (pdrop > 0.0f) {
    const std::uint64_t site_seed = hash_combine(acts.dropout_seed, 0);
    for (std::size_t i = 0; i < dx.v.size(); ++i)
      dx.v[i] = detail::dropout_keep(site_seed, i, pdrop) ? dx.v[i] * keep_scale
                                                          : Real(0);
  }
  for (int r = 0; r < rows; ++r) {
    const Real* dxr = dx.data() + static_cast<std::size_t>(r) * d;
    Real* gte =
        grads.tok_emb.data() + static_cast<std::size_t>(batch.tokens[r]) * d;
    for (int i = 0; i < d; ++i) gte[i] += dxr[i];
    if (!grads.pos_emb.v.empty()) {
      Real* gpe = grads.pos_emb.data() +
                  static_cast<std::size_t>(batch.positions[r]) * d;
      for (int i = 0; i < d; ++i) gpe[i] += dxr[i];
    }
  }
}

// Greedy (maximum-probability) continuation of a single prompt. Ties
// break toward the lowest token id. Stops after max_new tokens or when
// ';' is emitted.
template <class Real>
std::vector<int> generate_greedy(ParamStore<Real>& p,
                                 const std::vector<int>& prompt_tokens,
                                 const LineLayout& layout, int max_new) {
  std::vector<int> seq = prompt_tokens;
  for (int step = 0; step < max_new; ++step) {
    Batch batch;
    batch.size = 1;
    batch.seq_len = static_cast<int>(seq.size());
    batch.tokens = seq;
    batch.positions =
        assign_positions(layout, p.config.pe_kind, batch.seq_len, 0);
    Activations<Real> acts;
    forward(p, batch, false, 0, acts);
    const Real* lg =
        acts.logits.data() +
        static_cast<std::size_t>(batch.seq_len - 1) * p.config.vocab_size;
    int best = 0;
    for (int k = 1; k < p.config.vocab_size; ++k)
      if (lg[k] > lg[best]) best = k;
    seq.push_back(best);
    if (best == vocab::kSemicolon) break;
  }
  return seq;
}

}  // namespace arith
