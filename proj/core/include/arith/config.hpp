#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <set>
#include <string>

#include "arith/datagen.hpp"
#include "arith/model.hpp"
#include "arith/tokenizer.hpp"
#include "arith/trainer.hpp"

namespace arith {

nlohmann::json task_to_json(const TaskKind& t);
TaskKind task_from_json(const nlohmann::json& j);

nlohmann::json model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

nlohmann::json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json domain_to_json(const DomainSpec& d);
DomainSpec domain_from_json(const nlohmann::json& j);

nlohmann::json layout_to_json(const LineLayout& l);
LineLayout layout_from_json(const nlohmann::json& j);

// One experiment end to end: task, data domains, model, optimizer,
// evaluation sweep.
struct ExperimentConfig {
  TaskKind task = TaskKind::add();
  DomainSpec train_domain{TaskKind::add(), {3}};
  SplitSpec split;
  ModelConfig model = ModelConfig::nano();
  TrainConfig train;
  std::set<int> eval_lengths;     // n_test values for the OOD sweep
  bool eval_exact_both = false;   // evaluate on same-length-only classes
  std::uint64_t eval_per_set = 10'000;
  std::uint64_t eval_seed = 1;
  int max_operand_len = 0;        // 0: derive from eval/train lengths
  std::string out_dir = "runs/default";

  LineLayout layout() const;
  void validate() const;
};

nlohmann::json experiment_to_json(const ExperimentConfig& c);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

ExperimentConfig load_experiment(const std::filesystem::path& path);
void save_experiment(const std::filesystem::path& path,
                     const ExperimentConfig& c);

}  // namespace arith
