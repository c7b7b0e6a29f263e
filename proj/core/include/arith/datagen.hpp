#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "arith/numtheory.hpp"
#include "arith/rng.hpp"

namespace arith {

// Operand domain: D_n (longer operand exactly n digits), unions over a
// length set, the both-exactly-n variant, and the gapped counterexample
// where both top digits are forced >= gap_floor.
struct DomainSpec {
  TaskKind task;
  std::set<int> lengths;       // the n's of the union
  bool exact_both = false;     // both operands exactly length n
  std::optional<int> gap_floor;  // top digits of BOTH operands >= this

  void validate() const;
};

struct ExamplePair {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t result = 0;

  auto operator<=>(const ExamplePair&) const = default;
};

struct SplitSpec {
  std::uint64_t total = 100'000;
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
};

bool contains(const DomainSpec& spec, std::uint64_t a, std::uint64_t b);

// Cardinality of the domain (sum over the length set).
std::uint64_t domain_cardinality(const DomainSpec& spec);

// i.i.d. uniform draws over the domain, with replacement; unions pick a
// length proportional to each member's cardinality.
std::vector<ExamplePair> sample(const DomainSpec& spec, std::uint64_t count,
                                std::uint64_t seed);

// Every pair exactly once, a ascending then b.
std::vector<ExamplePair> enumerate_domain(
    const DomainSpec& spec, std::uint64_t budget = 100'000'000ULL);

struct Splits {
  std::vector<ExamplePair> train;
  std::vector<ExamplePair> id_test;
};

// Disjoint train / ID-test split: each distinct operand pair is bound
// to one side by a seeded hash, so sampling with replacement can never
// leak a pair across the boundary.
Splits make_splits(const DomainSpec& spec, const SplitSpec& split);

// One held-out suite per evaluation length; exhaustive when the domain
// fits in per_set, sampled otherwise.
std::map<int, std::vector<ExamplePair>> build_ood_suite(
    const TaskKind& task, const std::set<int>& train_lengths,
    const std::set<int>& eval_lengths, std::uint64_t per_set, bool exact_both,
    std::uint64_t seed);

}  // namespace arith
