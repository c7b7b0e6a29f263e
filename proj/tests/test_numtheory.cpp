#include <doctest.h>

#include <numeric>

#include "arith/numtheory.hpp"

using namespace arith;

TEST_SUITE("numtheory") {

TEST_CASE("rational normalizes and compares exactly") {
  CHECK(Rational(50, 150) == Rational(1, 3));
  CHECK(Rational(0, 7) == Rational(0, 1));
  CHECK(rational_diff_abs(Rational(1, 3), Rational(1, 4)) == Rational(1, 12));
  CHECK(rational_leq(Rational(1, 151), Rational(1, 150)));
  CHECK(!rational_leq(Rational(1, 99), Rational(1, 100)));
}

TEST_CASE("digit helpers") {
  CHECK(units_digit(37) == 7);
  CHECK(carry(37) == 3);
  CHECK(decimal_length(0) == 1);
  CHECK(decimal_length(9) == 1);
  CHECK(decimal_length(10) == 2);
  CHECK(decimal_length(999'999) == 6);
}

TEST_CASE("digitwise addition carries across the full width") {
  CHECK(add_digitwise(DigitString::from_value(999),
                      DigitString::from_value(1)).to_value() == 1000);
  CHECK(add_digitwise(DigitString::from_value(1234),
                      DigitString::from_value(5678)).to_value() == 6912);
  CHECK(add_digitwise(DigitString::from_value(0),
                      DigitString::from_value(0)).to_value() == 0);
}

TEST_CASE("multiplication raw column sums before carrying") {
  const auto s = raw_sums(DigitString::from_value(12),
                          DigitString::from_value(34));
  REQUIRE(s.size() == 3);
  CHECK(s[0] == 8);    // 2*4
  CHECK(s[1] == 10);   // 2*3 + 1*4
  CHECK(s[2] == 3);    // 1*3
  CHECK(mul_digitwise(DigitString::from_value(12),
                      DigitString::from_value(34)).to_value() == 408);
}

TEST_CASE("digitwise results agree with integer arithmetic") {
  for (std::uint64_t a = 0; a < 500; a += 7)
    for (std::uint64_t b = 0; b < 500; b += 11) {
      CHECK(add_digitwise(DigitString::from_value(a),
                          DigitString::from_value(b)).to_value() == a + b);
      CHECK(mul_digitwise(DigitString::from_value(a),
                          DigitString::from_value(b)).to_value() == a * b);
    }
}

TEST_CASE("task evaluation and its truncation surrogate") {
  CHECK(true_fn(TaskKind::add(), 999, 1) == 1000);
  CHECK(true_fn(TaskKind::mul(), 12, 34) == 408);
  CHECK(true_fn(TaskKind::mod_add(100), 70, 45) == 15);
  CHECK(true_fn(TaskKind::mod_mul(7), 13, 11) == 143 % 7);
  // surrogate truncates both operands to their low n digits
  CHECK(learned_fn(TaskKind::add(), 3, 12345, 678) == 345 + 678);
  CHECK(learned_fn(TaskKind::mod_add(100), 3, 12345, 678) == (345 + 678) % 100);
  CHECK(learned_fn(TaskKind::add(), 4, 999, 1) == 1000);
}

TEST_CASE("closed-form accuracy at published points") {
  // zero below the carry-information threshold, asymptote above it
  CHECK(theoretical_modadd_acc(151, 4, 5).accuracy == Rational(0, 1));
  CHECK(theoretical_modadd_acc(151, 4, 6).accuracy == Rational(1, 151));
  CHECK(theoretical_modadd_acc(151, 4, 9).accuracy == Rational(1, 151));
  CHECK(theoretical_modadd_acc(201, 4, 5).accuracy == Rational(0, 1));
  CHECK(theoretical_modadd_acc(201, 4, 6).accuracy == Rational(0, 1));
  CHECK(theoretical_modadd_acc(201, 4, 7).accuracy == Rational(1, 201));
  // shared factors with 10^n lift the asymptote
  CHECK(theoretical_modadd_acc(150, 4, 5).accuracy == Rational(1, 3));
  CHECK(theoretical_modadd_acc(150, 4, 5).p_prime == 3);
  // p dividing 10^n is always correct
  CHECK(theoretical_modadd_acc(100, 2, 3).accuracy == Rational(1, 1));
  CHECK(theoretical_modadd_acc(50, 2, 3).accuracy == Rational(1, 1));
  CHECK_THROWS_AS(theoretical_modadd_acc(151, 4, 4), std::invalid_argument);
}

TEST_CASE("pair counting matches a semantic brute force") {
  // small moduli, n=1, m=2: compare against direct evaluation of the
  // surrogate over every two-digit pair
  for (std::uint64_t p : {3ULL, 7ULL, 12ULL, 50ULL, 101ULL}) {
    std::uint64_t hits = 0, total = 0;
    const TaskKind task = TaskKind::mod_add(p);
    for (std::uint64_t a = 10; a <= 99; ++a)
      for (std::uint64_t b = 10; b <= 99; ++b) {
        ++total;
        if (true_fn(task, a, b) == learned_fn(task, 1, a, b)) ++hits;
      }
    // a0, b0 never affect correctness, so the [1,9]x[1,9] count scales
    const Rational got = count_modadd_pairs(p, 1, 2);
    CHECK(got == Rational(static_cast<std::int64_t>(hits),
                          static_cast<std::int64_t>(total)));
  }
}

TEST_CASE("counting converges to the closed form") {
  for (std::uint64_t p : {50ULL, 51ULL, 100ULL, 101ULL, 150ULL, 151ULL,
                          200ULL, 201ULL}) {
    for (int n : {2, 3}) {
      for (int m = n + 1; m <= n + 3; ++m) {
        const Rational counted = count_modadd_pairs(p, n, m);
        const Rational closed = theoretical_modadd_acc(p, n, m).accuracy;
        const Rational gap = rational_diff_abs(counted, closed);
        // finite-size deviation bound: 1/(10^(m-n) - 1)
        const Rational bound(1, static_cast<std::int64_t>(
                                    pow10_u64(m - n) - 1));
        CHECK(rational_leq(gap, bound));
      }
    }
  }
}

TEST_CASE("modular multiplication counting matches a semantic brute force") {
  for (std::uint64_t p : {7ULL, 12ULL, 50ULL, 51ULL}) {
    std::uint64_t hits = 0, total = 0;
    const TaskKind task = TaskKind::mod_mul(p);
    for (std::uint64_t a = 10; a <= 99; ++a)
      for (std::uint64_t b = 10; b <= 99; ++b) {
        ++total;
        if (true_fn(task, a, b) == learned_fn(task, 1, a, b)) ++hits;
      }
    const ModMulCount got = count_modmul_pairs(p, 1, 2);
    CHECK(!got.sampled);
    CHECK(got.fraction == Rational(static_cast<std::int64_t>(hits),
                                   static_cast<std::int64_t>(total)));
  }
}

TEST_CASE("modular multiplication counting refuses to sample by default") {
  ModMulCountOptions opts;
  opts.enumeration_budget = 10;  // force the estimate path
  CHECK_THROWS(count_modmul_pairs(51, 3, 4, opts));
  opts.allow_sampling = true;
  opts.sample_size = 1000;
  const ModMulCount est = count_modmul_pairs(51, 3, 4, opts);
  CHECK(est.sampled);
  CHECK(est.sample_count == 1000);
}

}  // TEST_SUITE
