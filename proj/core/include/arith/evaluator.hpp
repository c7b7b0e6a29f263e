#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arith/datagen.hpp"
#include "arith/model.hpp"
#include "arith/numtheory.hpp"
#include "arith/tokenizer.hpp"

namespace arith {

// Anything that maps token sequences to per-row argmax predictions.
// Lets the evaluation pipeline run against closed-form stand-ins in
// tests as well as real models.
struct SeqPredictor {
  virtual ~SeqPredictor() = default;
  // rows[i][t] = argmax over next-token scores after position t of
  // sequence i. All sequences in one call have equal length.
  virtual std::vector<std::vector<int>> argmax_rows(
      const std::vector<std::vector<int>>& seqs) = 0;
};

// Eval-mode transformer adapter: no dropout, operand-aligned position
// offset fixed at 0, batched to bound memory.
class TransformerPredictor : public SeqPredictor {
 public:
  TransformerPredictor(const ParamStore<float>& params, LineLayout layout,
                       int batch_cap = 256)
      : params_(&params), layout_(layout), batch_cap_(batch_cap) {}

  std::vector<std::vector<int>> argmax_rows(
      const std::vector<std::vector<int>>& seqs) override;

 private:
  const ParamStore<float>* params_;
  LineLayout layout_;
  int batch_cap_;
};

using ReferenceFn = std::function<std::uint64_t(const ExamplePair&)>;

ReferenceFn reference_true();  // e.result as stored in the suite
ReferenceFn reference_learned(TaskKind task, int n);  // truncation surrogate

struct AccuracyResult {
  std::uint64_t correct = 0;
  std::uint64_t wrong = 0;
  std::uint64_t decode_fail = 0;  // malformed generations count as errors

  std::uint64_t total() const { return correct + wrong + decode_fail; }
  double ratio() const {
    return total() == 0 ? 0.0 : static_cast<double>(correct) / total();
  }
};

// Greedy free-running decode of every prompt, scored against ref.
AccuracyResult eval_accuracy(SeqPredictor& pred,
                             const std::vector<ExamplePair>& suite,
                             const LineLayout& layout, const ReferenceFn& ref);

// Teacher-forced per-digit accuracy: position i in [1, answer_width],
// conditioning on the reference answer prefix.
std::vector<double> digitwise_accuracy(SeqPredictor& pred,
                                       const std::vector<ExamplePair>& suite,
                                       const LineLayout& layout,
                                       const ReferenceFn& ref);

// Coefficient of determination of predicted digit vs reference digit
// per answer position, teacher forced. nullopt when the reference digit
// has zero variance over the probe set.
std::vector<std::optional<double>> r2_per_position(
    SeqPredictor& pred, const std::vector<ExamplePair>& suite,
    const LineLayout& layout, const ReferenceFn& ref);

// R^2 trajectories across checkpoints, and their pairwise Pearson
// correlation per position pair. Positions whose trajectory is constant
// or mostly undefined give nullopt.
struct DynamicsTrace {
  std::vector<std::uint64_t> steps;
  std::vector<std::vector<std::optional<double>>> r2;  // [checkpoint][pos]
};
std::vector<std::vector<std::optional<double>>> r2_correlation(
    const DynamicsTrace& trace);

struct SuiteReport {
  int n_test = 0;
  bool exact_both = false;
  bool exhaustive = false;
  std::uint64_t count = 0;
  AccuracyResult vs_true;
  AccuracyResult vs_learned;
  std::vector<double> digitwise;             // vs true, teacher forced
  std::optional<Rational> oracle;            // modular addition only
};

struct EvalReport {
  TaskKind task = TaskKind::add();
  int train_length = 0;
  std::vector<SuiteReport> suites;
};

// Accuracy vs the trained function and vs its truncation surrogate on
// each evaluation class. On classes inside the training lengths the two
// references coincide; asserts the two measured accuracies match there.
EvalReport hypothesis_report(
    SeqPredictor& pred, TaskKind task, int train_length,
    const std::map<int, std::vector<ExamplePair>>& suites,
    const std::map<int, bool>& exhaustive, const LineLayout& layout,
    bool exact_both = false);

std::string report_csv(const EvalReport& r);
std::string report_pretty(const EvalReport& r);

}  // namespace arith
