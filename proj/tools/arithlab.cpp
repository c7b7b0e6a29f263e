// Command-line front end: data generation, training, evaluation and the
// closed-form accuracy oracle, driven by a JSON experiment config.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "arith/checkpoint.hpp"
#include "arith/config.hpp"
#include "arith/datagen.hpp"
#include "arith/evaluator.hpp"
#include "arith/tokenizer.hpp"
#include "arith/trainer.hpp"

namespace fs = std::filesystem;
using namespace arith;

namespace {

constexpr int kOkExit = 0;
constexpr int kValidationExit = 1;
constexpr int kRuntimeExit = 2;
constexpr int kIoExit = 3;

fs::path resolve_out(const std::string& out_dir) {
  fs::path p(out_dir);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("ARITHLAB_OUT_ROOT"))
    return fs::path(root) / p;
  return p;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> max_steps;
  std::optional<std::string> out_dir;
  std::optional<std::string> pe_kind;

  void apply(ExperimentConfig& cfg) const {
    if (seed) {
      cfg.train.seed = *seed;
      cfg.model.seed = *seed;
      cfg.split.seed = *seed;
    }
    if (max_steps) cfg.train.max_steps = *max_steps;
    if (out_dir) cfg.out_dir = *out_dir;
    if (pe_kind) {
      nlohmann::json j = model_config_to_json(cfg.model);
      j["pe_kind"] = *pe_kind;
      cfg.model = model_config_from_json(j);
    }
    cfg.validate();
  }
};

std::map<int, std::vector<ExamplePair>> build_suites(
    const ExperimentConfig& cfg, std::map<int, bool>& exhaustive) {
  std::map<int, std::vector<ExamplePair>> suites;
  for (int m : cfg.eval_lengths) {
    DomainSpec d{cfg.task, {m}};
    d.exact_both = cfg.eval_exact_both;
    const std::uint64_t card = domain_cardinality(d);
    if (card <= cfg.eval_per_set) {
      suites[m] = enumerate_domain(d);
      exhaustive[m] = true;
    } else {
      suites[m] = sample(d, cfg.eval_per_set,
                         stream_seed(cfg.eval_seed, "eval-suite", m));
      exhaustive[m] = false;
    }
  }
  return suites;
}

int cmd_gen_data(const ExperimentConfig& cfg) {
  const fs::path out = resolve_out(cfg.out_dir);
  fs::create_directories(out);
  const Splits sp = make_splits(cfg.train_domain, cfg.split);
  const LineLayout layout = cfg.layout();
  auto dump = [&](const fs::path& p, const std::vector<ExamplePair>& v) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot open " + p.string());
    for (const auto& e : v) os << render_text(e, layout) << '\n';
  };
  dump(out / "train.txt", sp.train);
  dump(out / "test_id.txt", sp.id_test);
  std::map<int, bool> exhaustive;
  for (const auto& [m, suite] : build_suites(cfg, exhaustive))
    dump(out / ("test_len" + std::to_string(m) + ".txt"), suite);
  std::cout << "wrote " << sp.train.size() << " train / " << sp.id_test.size()
            << " in-distribution test lines to " << out << '\n';
  return kOkExit;
}

int cmd_train(const ExperimentConfig& cfg,
              const std::optional<std::string>& resume) {
  const fs::path out = resolve_out(cfg.out_dir);
  fs::create_directories(out);
  save_experiment(out / "experiment.json", cfg);
  const Splits sp = make_splits(cfg.train_domain, cfg.split);
  const LineLayout layout = cfg.layout();

  const int train_length =
      *std::max_element(cfg.train_domain.lengths.begin(),
                        cfg.train_domain.lengths.end());
  std::map<int, bool> exhaustive;
  const auto suites = build_suites(cfg, exhaustive);

  EvalHook hook = [&](ParamStore<float>& params, std::uint64_t step) {
    EvalOutcome out_metrics;
    TransformerPredictor pred(params, layout);
    const auto id = eval_accuracy(pred, sp.id_test, layout, reference_true());
    out_metrics.metrics.emplace_back("id_acc", id.ratio());
    for (const auto& [m, suite] : suites) {
      const auto a = eval_accuracy(pred, suite, layout, reference_true());
      out_metrics.metrics.emplace_back("len" + std::to_string(m) + "_acc",
                                       a.ratio());
    }
    std::cout << "step " << step << " id_acc " << id.ratio() << std::endl;
    return out_metrics;
  };

  const TrainResult res = run_training(cfg.model, cfg.train, layout, sp.train,
                                       out, hook,
                                       resume ? std::optional<fs::path>(*resume)
                                              : std::nullopt);
  std::cout << "finished after " << res.steps_done << " steps, loss "
            << res.final_loss << ", checkpoint " << res.checkpoint_path
            << '\n';
  return kOkExit;
}

int cmd_eval(const ExperimentConfig& cfg, const std::string& ckpt) {
  const CheckpointState st = load_checkpoint(ckpt);
  const LineLayout layout = cfg.layout();
  const int train_length =
      *std::max_element(cfg.train_domain.lengths.begin(),
                        cfg.train_domain.lengths.end());
  std::map<int, bool> exhaustive;
  const auto suites = build_suites(cfg, exhaustive);
  ParamStore<float> params = st.params;
  TransformerPredictor pred(params, layout);
  const EvalReport rep = hypothesis_report(pred, cfg.task, train_length,
                                           suites, exhaustive, layout,
                                           cfg.eval_exact_both);
  const fs::path out = resolve_out(cfg.out_dir);
  fs::create_directories(out);
  std::ofstream os(out / "report.csv");
  os << report_csv(rep);
  std::cout << report_pretty(rep);
  return kOkExit;
}

int cmd_oracle(std::uint64_t p, int n, int m_lo, int m_hi, bool with_count) {
  for (int m = m_lo; m <= m_hi; ++m) {
    const OracleResult r = theoretical_modadd_acc(p, n, m);
    std::cout << "p=" << p << " n=" << n << " n_test=" << m << "  acc = "
              << r.accuracy.num << '/' << r.accuracy.den << " = "
              << 100.0 * r.accuracy.value() << "%";
    if (with_count) {
      const Rational c = count_modadd_pairs(p, n, m);
      std::cout << "  enumerated " << c.num << '/' << c.den << " = "
                << 100.0 * c.value() << "%";
    }
    std::cout << '\n';
  }
  return kOkExit;
}

int cmd_report(const std::string& run_dir) {
  const fs::path dir = resolve_out(run_dir);
  const fs::path csv = dir / "report.csv";
  std::ifstream is(csv);
  if (!is) throw std::runtime_error("no report.csv under " + dir.string());
  std::cout << is.rdbuf();
  return kOkExit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"length generalization laboratory for decimal arithmetic"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment JSON")->required();
    sub->add_option("--seed", ov.seed, "override every seed");
    sub->add_option("--max-steps", ov.max_steps, "override training steps");
    sub->add_option("--out", ov.out_dir, "override output directory");
    sub->add_option("--pe", ov.pe_kind,
                    "override positional embedding "
                    "(learned_absolute|relative_bias|abacus)");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "materialize datasets");
  add_common(gen);

  CLI::App* train = app.add_subcommand("train", "run the training loop");
  add_common(train);
  std::optional<std::string> resume;
  train->add_option("--resume", resume, "checkpoint to resume from");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval);
  std::string ckpt;
  eval->add_option("--checkpoint", ckpt, "checkpoint file")->required();

  CLI::App* oracle =
      app.add_subcommand("oracle", "closed-form modular addition accuracy");
  std::uint64_t p = 0;
  int n = 0, m_lo = 0, m_hi = 0;
  bool with_count = false;
  oracle->add_option("--modulus", p, "modulus")->required();
  oracle->add_option("--train-len", n, "training operand length")->required();
  oracle->add_option("--test-len-min", m_lo, "first test length")->required();
  oracle->add_option("--test-len-max", m_hi, "last test length");
  oracle->add_flag("--count", with_count, "also count pairs by enumeration");

  CLI::App* report = app.add_subcommand("report", "print a stored report");
  std::string run_dir;
  report->add_option("--run", run_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOkExit : kValidationExit;
  }

  try {
    if (oracle->parsed()) {
      if (m_hi == 0) m_hi = m_lo;
      return cmd_oracle(p, n, m_lo, m_hi, with_count);
    }
    if (report->parsed()) return cmd_report(run_dir);

    ExperimentConfig cfg = load_experiment(config_path);
    ov.apply(cfg);
    if (gen->parsed()) return cmd_gen_data(cfg);
    if (train->parsed()) return cmd_train(cfg, resume);
    if (eval->parsed()) return cmd_eval(cfg, ckpt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidationExit;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIoExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeExit;
  }
  return kValidationExit;
}
