#include "arith/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace arith {

std::vector<std::vector<int>> TransformerPredictor::argmax_rows(
    const std::vector<std::vector<int>>& seqs) {
  std::vector<std::vector<int>> out(seqs.size());
  if (seqs.empty()) return out;
  const int T = static_cast<int>(seqs[0].size());
  const std::vector<int> pos =
      assign_positions(layout_, params_->config.pe_kind, T, 0);
  const int V = params_->config.vocab_size;
  Activations<float> acts;
  ParamStore<float>& p = *const_cast<ParamStore<float>*>(params_);

  for (std::size_t start = 0; start < seqs.size();
       start += static_cast<std::size_t>(batch_cap_)) {
    const std::size_t end =
        std::min(seqs.size(), start + static_cast<std::size_t>(batch_cap_));
    const int B = static_cast<int>(end - start);
    Batch batch;
    batch.size = B;
    batch.seq_len = T;
    batch.tokens.resize(static_cast<std::size_t>(B) * T);
    batch.positions.resize(static_cast<std::size_t>(B) * T);
    for (int b = 0; b < B; ++b) {
      const auto& s = seqs[start + static_cast<std::size_t>(b)];
      if (static_cast<int>(s.size()) != T)
        throw std::invalid_argument("ragged batch");
      std::copy(s.begin(), s.end(),
                batch.tokens.begin() + static_cast<std::ptrdiff_t>(b) * T);
      std::copy(pos.begin(), pos.end(),
                batch.positions.begin() + static_cast<std::ptrdiff_t>(b) * T);
    }
    forward(p, batch, false, 0, acts);
    for (int b = 0; b < B; ++b) {
      std::vector<int>& row = out[start + static_cast<std::size_t>(b)];
      row.resize(T);
      for (int t = 0; t < T; ++t) {
        const float* lg =
            acts.logits.data() + (static_cast<std::size_t>(b) * T + t) * V;
        int best = 0;
        for (int v = 1; v < V; ++v)
          if (lg[v] > lg[best]) best = v;
        row[t] = best;
      }
    }
  }
  return out;
}

ReferenceFn reference_true() {
  return [](const ExamplePair& e) { return e.result; };
}

ReferenceFn reference_learned(TaskKind task, int n) {
  return [task, n](const ExamplePair& e) { return learned_fn(task, n, e.a, e.b); };
}

namespace {

// Free-running decode for a whole suite; returns the predicted value per
// example, or nullopt when the generation is not a well-formed answer.
std::vector<std::optional<std::uint64_t>> greedy_decode_suite(
    SeqPredictor& pred, const std::vector<ExamplePair>& suite,
    const LineLayout& layout) {
  const int prompt_len = layout.prompt_length();
  const int steps = layout.answer_width + 1;  // digits plus terminator
  std::vector<std::vector<int>> seqs(suite.size());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const EncodedExample enc = encode(suite[i], layout);
    seqs[i].assign(enc.tokens.begin(), enc.tokens.begin() + prompt_len);
  }
  for (int s = 0; s < steps; ++s) {
    const auto rows = pred.argmax_rows(seqs);
    for (std::size_t i = 0; i < seqs.size(); ++i)
      seqs[i].push_back(rows[i].back());
  }
  std::vector<std::optional<std::uint64_t>> out(suite.size());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    std::uint64_t value = 0;
    if (try_decode_answer(seqs[i], layout, value)) out[i] = value;
  }
  return out;
}

// Teacher-forced digit predictions: [example][answer position 1..W_c],
// conditioning tokens come from the reference answer.
std::vector<std::vector<int>> forced_digits(
    SeqPredictor& pred, const std::vector<ExamplePair>& suite,
    const LineLayout& layout, const ReferenceFn& ref) {
  std::vector<std::vector<int>> seqs(suite.size());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    ExamplePair e = suite[i];
    e.result = ref(e);
    seqs[i] = encode(e, layout).tokens;
  }
  const auto rows = pred.argmax_rows(seqs);
  const int prompt_len = layout.prompt_length();
  std::vector<std::vector<int>> out(suite.size());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    out[i].resize(layout.answer_width);
    for (int k = 0; k < layout.answer_width; ++k)
      // row t predicts token t+1; answer digit k sits at prompt_len + k
      out[i][k] = rows[i][prompt_len + k - 1];
  }
  return out;
}

int reference_digit(std::uint64_t value, int k1based) {
  return static_cast<int>(
      (value / pow10_u64(static_cast<unsigned>(k1based - 1))) % 10);
}

std::optional<double> pearson(const std::vector<double>& x,
                              const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 3) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;  // constant trajectory
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

AccuracyResult eval_accuracy(SeqPredictor& pred,
                             const std::vector<ExamplePair>& suite,
                             const LineLayout& layout, const ReferenceFn& ref) {
  AccuracyResult r;
  const auto decoded = greedy_decode_suite(pred, suite, layout);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    if (!decoded[i]) {
      ++r.decode_fail;
    } else if (*decoded[i] == ref(suite[i])) {
      ++r.correct;
    } else {
      ++r.wrong;
    }
  }
  return r;
}

std::vector<double> digitwise_accuracy(SeqPredictor& pred,
                                       const std::vector<ExamplePair>& suite,
                                       const LineLayout& layout,
                                       const ReferenceFn& ref) {
  std::vector<double> acc(static_cast<std::size_t>(layout.answer_width), 0.0);
  if (suite.empty()) return acc;
  const auto digits = forced_digits(pred, suite, layout, ref);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const std::uint64_t want = ref(suite[i]);
    for (int k = 1; k <= layout.answer_width; ++k)
      if (digits[i][static_cast<std::size_t>(k - 1)] ==
          reference_digit(want, k))
        acc[static_cast<std::size_t>(k - 1)] += 1.0;
  }
  for (auto& a : acc) a /= static_cast<double>(suite.size());
  return acc;
}

std::vector<std::optional<double>> r2_per_position(
    SeqPredictor& pred, const std::vector<ExamplePair>& suite,
    const LineLayout& layout, const ReferenceFn& ref) {
  std::vector<std::optional<double>> out(
      static_cast<std::size_t>(layout.answer_width));
  if (suite.empty()) return out;
  const auto digits = forced_digits(pred, suite, layout, ref);
  const double n = static_cast<double>(suite.size());
  for (int k = 1; k <= layout.answer_width; ++k) {
    double mean = 0;
    for (std::size_t i = 0; i < suite.size(); ++i)
      mean += reference_digit(ref(suite[i]), k);
    mean /= n;
    double ss_tot = 0, ss_res = 0;
    for (std::size_t i = 0; i < suite.size(); ++i) {
      const double y = reference_digit(ref(suite[i]), k);
      const double yhat = digits[i][static_cast<std::size_t>(k - 1)];
      ss_tot += (y - mean) * (y - mean);
      ss_res += (y - yhat) * (y - yhat);
    }
    if (ss_tot > 0)
      out[static_cast<std::size_t>(k - 1)] = 1.0 - ss_res / ss_tot;
  }
  return out;
}

std::vector<std::vector<std::optional<double>>> r2_correlation(
    const DynamicsTrace& trace) {
  const std::size_t P = trace.r2.empty() ? 0 : trace.r2[0].size();
  std::vector<std::vector<std::optional<double>>> corr(
      P, std::vector<std::optional<double>>(P));
  for (std::size_t a = 0; a < P; ++a) {
    for (std::size_t b = 0; b < P; ++b) {
      std::vector<double> xa, xb;
      for (const auto& row : trace.r2) {
        if (row[a] && row[b]) {
          xa.push_back(*row[a]);
          xb.push_back(*row[b]);
        }
      }
      corr[a][b] = pearson(xa, xb);
    }
  }
  return corr;
}

EvalReport hypothesis_report(
    SeqPredictor& pred, TaskKind task, int train_length,
    const std::map<int, std::vector<ExamplePair>>& suites,
    const std::map<int, bool>& exhaustive, const LineLayout& layout,
    bool exact_both) {
  EvalReport rep;
  rep.task = task;
  rep.train_length = train_length;
  const ReferenceFn f_true = reference_true();
  const ReferenceFn f_learned = reference_learned(task, train_length);
  for (const auto& [m, suite] : suites) {
    SuiteReport sr;
    sr.n_test = m;
    sr.exact_both = exact_both;
    sr.count = suite.size();
    auto it = exhaustive.find(m);
    sr.exhaustive = it != exhaustive.end() && it->second;

    const auto decoded = greedy_decode_suite(pred, suite, layout);
    for (std::size_t i = 0; i < suite.size(); ++i) {
      const std::uint64_t want_true = f_true(suite[i]);
      const std::uint64_t want_learned = f_learned(suite[i]);
      if (!decoded[i]) {
        ++sr.vs_true.decode_fail;
        ++sr.vs_learned.decode_fail;
        continue;
      }
      *decoded[i] == want_true ? ++sr.vs_true.correct : ++sr.vs_true.wrong;
      *decoded[i] == want_learned ? ++sr.vs_learned.correct
                                  : ++sr.vs_learned.wrong;
    }
    sr.digitwise = digitwise_accuracy(pred, suite, layout, f_true);
    if (task.kind == Op::ModAdd && m > train_length)
      sr.oracle = theoretical_modadd_acc(*task.modulus, train_length, m)
                      .accuracy;

    if (m <= train_length &&
        sr.vs_true.correct != sr.vs_learned.correct)
      throw std::logic_error(
          "truncation surrogate diverged from the trained map inside the "
          "training lengths");
    rep.suites.push_back(std::move(sr));
  }
  return rep;
}

std::string report_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "n_test,count,exhaustive,acc_vs_true,acc_vs_learned,decode_fail,"
        "oracle\n";
  for (const auto& s : r.suites) {
    os << s.n_test << ',' << s.count << ',' << (s.exhaustive ? 1 : 0) << ','
       << s.vs_true.ratio() << ',' << s.vs_learned.ratio() << ','
       << s.vs_true.decode_fail << ',';
    if (s.oracle) os << s.oracle->value();
    os << '\n';
  }
  return os.str();
}

std::string report_pretty(const EvalReport& r) {
  std::ostringstream os;
  os << "train length n=" << r.train_length << "\n";
  os << "  n_test   count  mode        vs_true  vs_learned  oracle\n";
  for (const auto& s : r.suites) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %5d%10llu  %-10s %7.4f %11.4f",
                  s.n_test, static_cast<unsigned long long>(s.count),
                  s.exhaustive ? "exhaustive" : "sampled", s.vs_true.ratio(),
                  s.vs_learned.ratio());
    os << buf;
    if (s.oracle) {
      std::snprintf(buf, sizeof(buf), " %7.4f", s.oracle->value());
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace arith
