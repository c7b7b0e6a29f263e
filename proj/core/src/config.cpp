#include "arith/config.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace arith {
namespace {

using nlohmann::json;

std::string op_name(Op op) {
  switch (op) {
    case Op::Add: return "add";
    case Op::Mul: return "mul";
    case Op::ModAdd: return "modadd";
    case Op::ModMul: return "modmul";
  }
  throw std::logic_error("bad op");
}

Op op_from_name(const std::string& s) {
  if (s == "add") return Op::Add;
  if (s == "mul") return Op::Mul;
  if (s == "modadd") return Op::ModAdd;
  if (s == "modmul") return Op::ModMul;
  throw std::invalid_argument("unknown task '" + s + "'");
}

std::string pe_name(PeKind k) {
  switch (k) {
    case PeKind::LearnedAbsolute: return "learned_absolute";
    case PeKind::RelativeBias: return "relative_bias";
    case PeKind::Abacus: return "abacus";
  }
  throw std::logic_error("bad pe kind");
}

PeKind pe_from_name(const std::string& s) {
  if (s == "learned_absolute") return PeKind::LearnedAbsolute;
  if (s == "relative_bias") return PeKind::RelativeBias;
  if (s == "abacus") return PeKind::Abacus;
  throw std::invalid_argument("unknown positional embedding '" + s + "'");
}

ModelConfig preset_by_name(const std::string& s) {
  if (s == "nano") return ModelConfig::nano();
  if (s == "micro") return ModelConfig::micro();
  if (s == "mini") return ModelConfig::mini();
  throw std::invalid_argument("unknown model preset '" + s + "'");
}

}  // namespace

json task_to_json(const TaskKind& t) {
  json j;
  j["op"] = op_name(t.kind);
  if (t.modulus) j["modulus"] = *t.modulus;
  return j;
}

TaskKind task_from_json(const json& j) {
  TaskKind t;
  t.kind = op_from_name(j.at("op").get<std::string>());
  if (j.contains("modulus")) t.modulus = j.at("modulus").get<std::uint64_t>();
  t.validate();
  return t;
}

json model_config_to_json(const ModelConfig& c) {
  json j;
  j["num_layers"] = c.num_layers;
  j["num_heads"] = c.num_heads;
  j["embed_dim"] = c.embed_dim;
  j["vocab_size"] = c.vocab_size;
  j["context_window"] = c.context_window;
  j["dropout_prob"] = c.dropout_prob;
  j["pe_kind"] = pe_name(c.pe_kind);
  j["abacus_max_offset"] = c.abacus_max_offset;
  j["rel_max_distance"] = c.rel_max_distance;
  j["seed"] = c.seed;
  return j;
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  if (j.contains("preset")) c = preset_by_name(j.at("preset").get<std::string>());
  c.num_layers = j.value("num_layers", c.num_layers);
  c.num_heads = j.value("num_heads", c.num_heads);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.context_window = j.value("context_window", c.context_window);
  c.dropout_prob = j.value("dropout_prob", c.dropout_prob);
  if (j.contains("pe_kind"))
    c.pe_kind = pe_from_name(j.at("pe_kind").get<std::string>());
  c.abacus_max_offset = j.value("abacus_max_offset", c.abacus_max_offset);
  c.rel_max_distance = j.value("rel_max_distance", c.rel_max_distance);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

json train_config_to_json(const TrainConfig& c) {
  json j;
  j["learning_rate"] = c.learning_rate;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["adam_eps"] = c.adam_eps;
  j["weight_decay"] = c.weight_decay;
  j["grad_norm_clip"] = c.grad_norm_clip;
  j["batch_size"] = c.batch_size;
  j["max_steps"] = c.max_steps;
  j["eval_every"] = c.eval_every;
  j["checkpoint_every"] = c.checkpoint_every;
  j["loss_mask"] =
      c.loss_mask == LossMask::AnswerOnly ? "answer_only" : "full_sequence";
  j["cosine_decay"] = c.cosine_decay;
  j["seed"] = c.seed;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.grad_norm_clip = j.value("grad_norm_clip", c.grad_norm_clip);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  if (j.contains("loss_mask")) {
    const auto s = j.at("loss_mask").get<std::string>();
    if (s == "answer_only")
      c.loss_mask = LossMask::AnswerOnly;
    else if (s == "full_sequence")
      c.loss_mask = LossMask::FullSequence;
    else
      throw std::invalid_argument("unknown loss mask '" + s + "'");
  }
  c.cosine_decay = j.value("cosine_decay", c.cosine_decay);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

json domain_to_json(const DomainSpec& d) {
  json j;
  j["task"] = task_to_json(d.task);
  j["lengths"] = d.lengths;
  j["exact_both"] = d.exact_both;
  if (d.gap_floor) j["gap_floor"] = *d.gap_floor;
  return j;
}

DomainSpec domain_from_json(const json& j) {
  DomainSpec d{task_from_json(j.at("task")),
               j.at("lengths").get<std::set<int>>()};
  d.exact_both = j.value("exact_both", false);
  if (j.contains("gap_floor")) d.gap_floor = j.at("gap_floor").get<int>();
  d.validate();
  return d;
}

json layout_to_json(const LineLayout& l) {
  json j;
  j["operand_width"] = l.operand_width;
  j["answer_width"] = l.answer_width;
  j["op_symbol"] = std::string(1, l.op_symbol);
  return j;
}

LineLayout layout_from_json(const json& j) {
  LineLayout l;
  l.operand_width = j.at("operand_width").get<int>();
  l.answer_width = j.at("answer_width").get<int>();
  const auto s = j.at("op_symbol").get<std::string>();
  if (s.size() != 1) throw std::invalid_argument("op_symbol must be one char");
  l.op_symbol = s[0];
  l.validate();
  return l;
}

LineLayout ExperimentConfig::layout() const {
  int max_len = max_operand_len;
  if (max_len == 0) {
    for (int n : train_domain.lengths) max_len = std::max(max_len, n);
    for (int n : eval_lengths) max_len = std::max(max_len, n);
  }
  return LineLayout::for_task(task, max_len);
}

void ExperimentConfig::validate() const {
  task.validate();
  train_domain.validate();
  model.validate();
  train.validate();
  if (train_domain.task.kind != task.kind ||
      train_domain.task.modulus != task.modulus)
    throw std::invalid_argument("train domain task differs from experiment task");
  if (eval_lengths.empty())
    throw std::invalid_argument("eval_lengths is empty");
  if (eval_per_set == 0) throw std::invalid_argument("eval_per_set is zero");
  const LineLayout l = layout();
  for (int n : eval_lengths)
    if (n > l.operand_width)
      throw std::invalid_argument("eval length exceeds operand width");
  for (int n : train_domain.lengths)
    if (n > l.operand_width)
      throw std::invalid_argument("train length exceeds operand width");
  if (l.sequence_length() > model.context_window)
    throw std::invalid_argument("layout exceeds context window");
  if (split.train_fraction <= 0 || split.train_fraction >= 1)
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
}

json experiment_to_json(const ExperimentConfig& c) {
  json j;
  j["task"] = task_to_json(c.task);
  j["train_domain"] = domain_to_json(c.train_domain);
  j["split"] = {{"total", c.split.total},
                {"train_fraction", c.split.train_fraction},
                {"seed", c.split.seed}};
  j["model"] = model_config_to_json(c.model);
  j["train"] = train_config_to_json(c.train);
  j["eval_lengths"] = c.eval_lengths;
  j["eval_exact_both"] = c.eval_exact_both;
  j["eval_per_set"] = c.eval_per_set;
  j["eval_seed"] = c.eval_seed;
  j["max_operand_len"] = c.max_operand_len;
  j["out_dir"] = c.out_dir;
  return j;
}

ExperimentConfig experiment_from_json(const json& j) {
  ExperimentConfig c;
  c.task = task_from_json(j.at("task"));
  if (j.contains("train_domain")) {
    json dj = j.at("train_domain");
    if (!dj.contains("task")) dj["task"] = task_to_json(c.task);
    c.train_domain = domain_from_json(dj);
  } else {
    c.train_domain = DomainSpec{c.task, {3}};
  }
  if (j.contains("split")) {
    const auto& sj = j.at("split");
    c.split.total = sj.value("total", c.split.total);
    c.split.train_fraction = sj.value("train_fraction", c.split.train_fraction);
    c.split.seed = sj.value("seed", c.split.seed);
  }
  if (j.contains("model")) c.model = model_config_from_json(j.at("model"));
  if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
  if (j.contains("eval_lengths"))
    c.eval_lengths = j.at("eval_lengths").get<std::set<int>>();
  c.eval_exact_both = j.value("eval_exact_both", c.eval_exact_both);
  c.eval_per_set = j.value("eval_per_set", c.eval_per_set);
  c.eval_seed = j.value("eval_seed", c.eval_seed);
  c.max_operand_len = j.value("max_operand_len", c.max_operand_len);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.validate();
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  json j;
  is >> j;
  return experiment_from_json(j);
}

void save_experiment(const std::filesystem::path& path,
                     const ExperimentConfig& c) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << experiment_to_json(c).dump(2) << '\n';
}

}  // namespace arith
