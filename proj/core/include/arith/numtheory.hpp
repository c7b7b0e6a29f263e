#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "arith/digits.hpp"

namespace arith {

enum class Op { Add, Mul, ModAdd, ModMul };

// An arithmetic task: plain or modular addition/multiplication. The
// modulus is present exactly for the modular kinds.
struct TaskKind {
  Op kind = Op::Add;
  std::optional<std::uint64_t> modulus;

  static TaskKind add() { return {Op::Add, std::nullopt}; }
  static TaskKind mul() { return {Op::Mul, std::nullopt}; }
  static TaskKind mod_add(std::uint64_t p) { return {Op::ModAdd, p}; }
  static TaskKind mod_mul(std::uint64_t p) { return {Op::ModMul, p}; }

  bool is_modular() const { return kind == Op::ModAdd || kind == Op::ModMul; }
  bool is_mul() const { return kind == Op::Mul || kind == Op::ModMul; }
  void validate() const;
};

// Exact rational in lowest terms, denominator > 0.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

Rational rational_diff_abs(const Rational& a, const Rational& b);
bool rational_leq(const Rational& a, const Rational& b);

// x mod 10 (the paper's per-digit output function).
inline std::uint8_t units_digit(std::uint64_t x) {
  return static_cast<std::uint8_t>(x % 10);
}

// floor(x / 10) (the carry function).
inline std::uint64_t carry(std::uint64_t x) { return x / 10; }

// Addition computed strictly by the per-position digit/carry
// recurrence c_i = units(a_i + b_i + carry(a_{i-1} + b_{i-1})).
DigitString add_digitwise(const DigitString& a, const DigitString& b);

// Pre-carry convolution: entry k (0-based) is sum of a_i * b_j over
// i + j == k + 2 (1-based digit indices). Length len(a)+len(b)-1.
std::vector<std::uint64_t> raw_sums(const DigitString& a,
                                    const DigitString& b);

// Multiplication via the raw-sum / carry recurrence; result padded to
// len(a) + len(b).
DigitString mul_digitwise(const DigitString& a, const DigitString& b);

// The ground-truth function f for a task.
std::uint64_t true_fn(const TaskKind& task, std::uint64_t a, std::uint64_t b);

// The hypothesized learned function: truncate both operands mod 10^n,
// then apply the task's true function.
std::uint64_t learned_fn(const TaskKind& task, int n, std::uint64_t a,
                         std::uint64_t b);

struct OracleResult {
  Rational accuracy;       // gcd(p,10^n)/p above threshold, else 0
  bool threshold_met = false;
  std::uint64_t p_prime = 0;  // p / gcd(p, 10^n)
};

// Closed-form outward-OOD accuracy for modular addition trained on
// length n and tested on both-exactly-length n_test operands. The
// length threshold n_test >= n + log10(p'/2 + 1) is evaluated in exact
// integers as 2 * 10^(n_test - n) >= p' + 2.
OracleResult theoretical_modadd_acc(std::uint64_t p, int n, int n_test);

// Exact fraction of (A, B) in [1, 10^(m-n))^2 with
// (A + B) * 10^n == 0 mod p; the finite-range counterpart of the
// closed form above.
Rational count_modadd_pairs(std::uint64_t p, int n, int m);

struct ModMulCount {
  Rational fraction;            // exact when !sampled
  bool sampled = false;
  std::uint64_t sample_count = 0;  // draws when sampled, else combinations
};

struct ModMulCountOptions {
  std::uint64_t enumeration_budget = 1'000'000'000ULL;
  bool allow_sampling = false;
  std::uint64_t sample_size = 10'000'000ULL;
  std::uint64_t seed = 0;
};

// Fraction of (a, b) in the both-exactly-length-m domain for which the
// truncated product agrees with the true product mod p, i.e.
// A*B*10^n + A*b0 + B*a0 == 0 mod p'. Exact enumeration up to the
// budget, seeded uniform sampling beyond it when allowed.
ModMulCount count_modmul_pairs(std::uint64_t p, int n, int m,
                               const ModMulCountOptions& opts = {});

}  // namespace arith
