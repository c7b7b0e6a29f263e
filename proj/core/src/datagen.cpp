#include "arith/datagen.hpp"

#include <algorithm>
#include <stdexcept>

namespace arith {

void DomainSpec::validate() const {
  task.validate();
  if (lengths.empty()) throw std::invalid_argument("lengths must be non-empty");
  for (int n : lengths)
    if (n < 1 || n > 9) throw std::invalid_argument("length out of range 1..9");
  if (exact_both && lengths.size() != 1)
    throw std::invalid_argument("exact_both requires a single length");
  if (gap_floor) {
    if (*gap_floor < 1 || *gap_floor > 9)
      throw std::invalid_argument("gap_floor must be in 1..9");
    if (lengths.size() != 1)
      throw std::invalid_argument("gap_floor requires a single length");
  }
}

namespace {

bool in_length_class(const DomainSpec& spec, int n, std::uint64_t a,
                     std::uint64_t b) {
  const int la = decimal_length(a);
  const int lb = decimal_length(b);
  if (spec.gap_floor) {
    if (la != n || lb != n) return false;
    const std::uint64_t top = pow10_u64(n - 1);
    return a / top >= static_cast<std::uint64_t>(*spec.gap_floor) &&
           b / top >= static_cast<std::uint64_t>(*spec.gap_floor);
  }
  if (spec.exact_both) return la == n && lb == n;
  return std::max(la, lb) == n;
}

std::uint64_t length_class_cardinality(const DomainSpec& spec, int n) {
  const std::uint64_t lo = n == 1 ? 0 : pow10_u64(n - 1);
  const std::uint64_t width = pow10_u64(n) - lo;  // count of exactly-n values
  if (spec.gap_floor) {
    const std::uint64_t g = static_cast<std::uint64_t>(*spec.gap_floor);
    const std::uint64_t per = (10 - g) * pow10_u64(n - 1);
    return per * per;
  }
  if (spec.exact_both) return width * width;
  // max(a, b) has exactly n digits: all pairs below 10^n minus pairs
  // where both are shorter.
  const std::uint64_t all = pow10_u64(n) * pow10_u64(n);
  const std::uint64_t shorter = n == 1 ? 0 : lo * lo;
  return all - shorter;
}

std::uint64_t draw_exact_length(Rng& rng, int n) {
  const std::uint64_t lo = n == 1 ? 0 : pow10_u64(n - 1);
  return rng.uniform_in(lo, pow10_u64(n) - 1);
}

ExamplePair draw_from_class(const DomainSpec& spec, int n, Rng& rng) {
  std::uint64_t a, b;
  if (spec.gap_floor) {
    const std::uint64_t g = static_cast<std::uint64_t>(*spec.gap_floor);
    const std::uint64_t low = pow10_u64(n - 1);
    a = rng.uniform_in(g, 9) * low + (n == 1 ? 0 : rng.uniform_below(low));
    b = rng.uniform_in(g, 9) * low + (n == 1 ? 0 : rng.uniform_below(low));
  } else if (spec.exact_both) {
    a = draw_exact_length(rng, n);
    b = draw_exact_length(rng, n);
  } else {
    const std::uint64_t hi = pow10_u64(n);
    do {
      a = rng.uniform_below(hi);
      b = rng.uniform_below(hi);
    } while (!in_length_class(spec, n, a, b));
  }
  return {a, b, true_fn(spec.task, a, b)};
}

int pick_length(const DomainSpec& spec, Rng& rng) {
  if (spec.lengths.size() == 1) return *spec.lengths.begin();
  std::uint64_t total = 0;
  for (int n : spec.lengths) total += length_class_cardinality(spec, n);
  std::uint64_t r = rng.uniform_below(total);
  for (int n : spec.lengths) {
    const std::uint64_t c = length_class_cardinality(spec, n);
    if (r < c) return n;
    r -= c;
  }
  return *spec.lengths.rbegin();
}

}  // namespace

bool contains(const DomainSpec& spec, std::uint64_t a, std::uint64_t b) {
  for (int n : spec.lengths)
    if (in_length_class(spec, n, a, b)) return true;
  return false;
}

std::uint64_t domain_cardinality(const DomainSpec& spec) {
  std::uint64_t total = 0;
  for (int n : spec.lengths) total += length_class_cardinality(spec, n);
  return total;
}

std::vector<ExamplePair> sample(const DomainSpec& spec, std::uint64_t count,
                                std::uint64_t seed) {
  spec.validate();
  if (domain_cardinality(spec) == 0) throw std::invalid_argument("empty domain");
  Rng rng = split_stream(seed, "sample");
  std::vector<ExamplePair> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const int n = pick_length(spec, rng);
    out.push_back(draw_from_class(spec, n, rng));
  }
  return out;
}

std::vector<ExamplePair> enumerate_domain(const DomainSpec& spec,
                                          std::uint64_t budget) {
  spec.validate();
  const std::uint64_t card = domain_cardinality(spec);
  if (card > budget) throw std::runtime_error("enumeration budget exceeded");
  const int max_n = *spec.lengths.rbegin();
  const std::uint64_t hi = pow10_u64(max_n);
  std::vector<ExamplePair> out;
  out.reserve(card);
  for (std::uint64_t a = 0; a < hi; ++a)
    for (std::uint64_t b = 0; b < hi; ++b)
      if (contains(spec, a, b)) out.push_back({a, b, true_fn(spec.task, a, b)});
  return out;
}

Splits make_splits(const DomainSpec& spec, const SplitSpec& split) {
  spec.validate();
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0))
    throw std::invalid_argument("train_fraction must be in (0, 1)");
  const std::uint64_t train_target = static_cast<std::uint64_t>(
      static_cast<double>(split.total) * split.train_fraction + 0.5);
  const std::uint64_t test_target = split.total - train_target;
  if (train_target == 0 || test_target == 0)
    throw std::invalid_argument("split produces an empty side");

  const std::uint64_t side_key = hash_combine(split.seed, 0x5eedu);
  const std::uint64_t cut = static_cast<std::uint64_t>(
      split.train_fraction * 18446744073709551615.0);
  auto goes_to_train = [&](const ExamplePair& e) {
    return hash_combine(hash_combine(side_key, e.a), e.b) < cut;
  };

  Rng rng = split_stream(split.seed, "splits");
  Splits out;
  out.train.reserve(train_target);
  out.id_test.reserve(test_target);
  const std::uint64_t max_attempts = split.total * 1000ULL + 1000ULL;
  std::uint64_t attempts = 0;
  while (out.train.size() < train_target || out.id_test.size() < test_target) {
    if (++attempts > max_attempts)
      throw std::runtime_error("split infeasible for this domain");
    const int n = pick_length(spec, rng);
    const ExamplePair e = draw_from_class(spec, n, rng);
    if (goes_to_train(e)) {
      if (out.train.size() < train_target) out.train.push_back(e);
    } else {
      if (out.id_test.size() < test_target) out.id_test.push_back(e);
    }
  }
  return out;
}

std::map<int, std::vector<ExamplePair>> build_ood_suite(
    const TaskKind& task, const std::set<int>& train_lengths,
    const std::set<int>& eval_lengths, std::uint64_t per_set, bool exact_both,
    std::uint64_t seed) {
  for (int m : eval_lengths)
    if (train_lengths.count(m))
      throw std::invalid_argument("eval length overlaps train lengths");
  std::map<int, std::vector<ExamplePair>> suites;
  for (int m : eval_lengths) {
    DomainSpec spec{task, {m}, exact_both, std::nullopt};
    const std::uint64_t card = domain_cardinality(spec);
    if (card <= per_set) {
      suites[m] = enumerate_domain(spec);
    } else {
      Rng stream = split_stream(seed, "ood", static_cast<std::uint64_t>(m));
      suites[m] = sample(spec, per_set, stream.next_u64());
    }
  }
  return suites;
}

}  // namespace arith
