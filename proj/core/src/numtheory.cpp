#include "arith/numtheory.hpp"

#include <algorithm>
#include <cstdlib>

#include "arith/rng.hpp"

namespace arith {

void TaskKind::validate() const {
  if (is_modular()) {
    if (!modulus || *modulus < 2)
      throw std::invalid_argument("modular task requires modulus >= 2");
  } else if (modulus) {
    throw std::invalid_argument("non-modular task carries no modulus");
  }
}

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(std::abs(num), den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational rational_diff_abs(const Rational& a, const Rational& b) {
  const __int128 n = static_cast<__int128>(a.num) * b.den -
                     static_cast<__int128>(b.num) * a.den;
  const __int128 d = static_cast<__int128>(a.den) * b.den;
  __int128 an = n < 0 ? -n : n;
  // Reduce in 128 bits before narrowing.
  __int128 x = an, y = d;
  while (y != 0) {
    __int128 t = x % y;
    x = y;
    y = t;
  }
  if (x > 1) {
    an /= x;
  }
  const __int128 dd = d / (x > 1 ? x : 1);
  if (an > INT64_MAX || dd > INT64_MAX)
    throw std::overflow_error("rational difference overflow");
  return Rational(static_cast<std::int64_t>(an), static_cast<std::int64_t>(dd));
}

bool rational_leq(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num) * b.den <=
         static_cast<__int128>(b.num) * a.den;
}

DigitString add_digitwise(const DigitString& a, const DigitString& b) {
  const std::size_t n = std::max(a.length(), b.length());
  std::vector<std::uint8_t> out(n + 1, 0);
  std::uint64_t c = 0;
  for (std::size_t i = 1; i <= n + 1; ++i) {
    const std::uint64_t s = a.digit(i) + b.digit(i) + c;
    out[i - 1] = units_digit(s);
    c = carry(s);
  }
  return DigitString(std::move(out));
}

std::vector<std::uint64_t> raw_sums(const DigitString& a,
                                    const DigitString& b) {
  const std::size_t la = a.length(), lb = b.length();
  std::vector<std::uint64_t> r(la + lb - 1, 0);
  for (std::size_t i = 1; i <= la; ++i)
    for (std::size_t j = 1; j <= lb; ++j)
      r[i + j - 2] += static_cast<std::uint64_t>(a.digit(i)) * b.digit(j);
  return r;
}

DigitString mul_digitwise(const DigitString& a, const DigitString& b) {
  const auto raw = raw_sums(a, b);
  std::vector<std::uint8_t> out(a.length() + b.length(), 0);
  std::uint64_t carry_in = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint64_t s = (i < raw.size() ? raw[i] : 0) + carry_in;
    out[i] = units_digit(s);
    carry_in = carry(s);
  }
  return DigitString(std::move(out));
}

std::uint64_t true_fn(const TaskKind& task, std::uint64_t a, std::uint64_t b) {
  switch (task.kind) {
    case Op::Add:
      return a + b;
    case Op::Mul:
      return a * b;
    case Op::ModAdd:
      return (a + b) % *task.modulus;
    case Op::ModMul:
      return static_cast<std::uint64_t>(
          (static_cast<unsigned __int128>(a) * b) % *task.modulus);
  }
  throw std::logic_error("unreachable");
}

std::uint64_t learned_fn(const TaskKind& task, int n, std::uint64_t a,
                         std::uint64_t b) {
  if (n < 1) throw std::invalid_argument("learned_fn requires n >= 1");
  const std::uint64_t tn = pow10_u64(n);
  return true_fn(task, a % tn, b % tn);
}

OracleResult theoretical_modadd_acc(std::uint64_t p, int n, int n_test) {
  if (p < 2) throw std::invalid_argument("modulus must be >= 2");
  if (n_test <= n)
    throw std::invalid_argument("oracle applies to outward OOD only (n_test > n)");
  const std::uint64_t g = std::gcd(p, pow10_u64(std::min(n, 19)));
  OracleResult res;
  res.p_prime = p / g;
  // Threshold n_test >= n + log10(p'/2 + 1), exactly: 2*10^(d) >= p' + 2.
  const int d = n_test - n;
  bool met;
  if (d >= 19) {
    met = true;
  } else {
    const unsigned __int128 lhs =
        static_cast<unsigned __int128>(2) * pow10_u64(d);
    met = lhs >= static_cast<unsigned __int128>(res.p_prime) + 2;
  }
  res.threshold_met = met;
  res.accuracy = met ? Rational(static_cast<std::int64_t>(g),
                                static_cast<std::int64_t>(p))
                     : Rational(0, 1);
  return res;
}

Rational count_modadd_pairs(std::uint64_t p, int n, int m) {
  if (m <= n) throw std::invalid_argument("requires m > n");
  if (m - n > 9) throw std::invalid_argument("range exceeds counting support");
  const std::uint64_t N = pow10_u64(m - n) - 1;  // A, B in [1, N]
  const std::uint64_t g = std::gcd(p, pow10_u64(std::min(n, 19)));
  const std::uint64_t pp = p / g;
  // Count pairs with A + B == 0 (mod p') arithmetically: bucket the
  // residues of [1, N] and pair complementary buckets.
  auto residue_count = [&](std::uint64_t r) -> std::uint64_t {
    // #{x in [1, N] : x == r (mod pp)}
    if (r == 0) return N / pp;
    return r <= N ? (N - r) / pp + 1 : 0;
  };
  unsigned __int128 valid = 0;
  for (std::uint64_t r = 0; r < pp; ++r) {
    const std::uint64_t rc = (pp - r) % pp;
    valid += static_cast<unsigned __int128>(residue_count(r)) *
             residue_count(rc);
    if (pp > 4'000'000'000ULL) break;  // unreachable for supported ranges
  }
  const unsigned __int128 total = static_cast<unsigned __int128>(N) * N;
  // Reduce before narrowing.
  unsigned __int128 x = valid, y = total;
  while (y != 0) {
    unsigned __int128 t = x % y;
    x = y;
    y = t;
  }
  const unsigned __int128 gg = x == 0 ? 1 : x;
  return Rational(static_cast<std::int64_t>(valid / gg),
                  static_cast<std::int64_t>(total / gg));
}

namespace {

// Inverse of a modulo m for gcd(a, m) == 1; returns 0 when m == 1.
std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t m) {
  if (m <= 1) return 0;
  std::int64_t t0 = 0, t1 = 1;
  std::int64_t r0 = static_cast<std::int64_t>(m),
               r1 = static_cast<std::int64_t>(a % m);
  while (r1 != 0) {
    const std::int64_t q = r0 / r1;
    std::int64_t tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
    tmp = r0 - q * r1;
    r0 = r1;
    r1 = tmp;
  }
  const std::int64_t mm = static_cast<std::int64_t>(m);
  return static_cast<std::uint64_t>((t0 % mm + mm) % mm);
}

}  // namespace

ModMulCount count_modmul_pairs(std::uint64_t p, int n, int m,
                               const ModMulCountOptions& opts) {
  if (m <= n) throw std::invalid_argument("requires m > n");
  const std::uint64_t N = pow10_u64(m - n) - 1;   // A, B in [1, N]
  const std::uint64_t L = pow10_u64(n);           // a0, b0 in [0, L)
  const std::uint64_t g = std::gcd(p, L);
  const std::uint64_t pp = p / g;
  const std::uint64_t tn_mod = L % pp;

  const unsigned __int128 combos =
      static_cast<unsigned __int128>(N) * N * L * L;

  auto valid_pair = [&](std::uint64_t A, std::uint64_t B, std::uint64_t a0,
                        std::uint64_t b0) {
    const unsigned __int128 t =
        static_cast<unsigned __int128>(A) * B % pp * tn_mod +
        static_cast<unsigned __int128>(A) * b0 +
        static_cast<unsigned __int128>(B) * a0;
    return t % pp == 0;
  };

  ModMulCount out;
  if (combos <= opts.enumeration_budget) {
    std::uint64_t valid = 0;
    for (std::uint64_t A = 1; A <= N; ++A)
      for (std::uint64_t B = 1; B <= N; ++B) {
        const std::uint64_t ab = static_cast<std::uint64_t>(
            static_cast<unsigned __int128>(A) * B % pp * tn_mod % pp);
        for (std::uint64_t a0 = 0; a0 < L; ++a0) {
          // b0 solves A*b0 == -(ab + B*a0) (mod pp); count solutions
          // in [0, L) from the linear-congruence structure.
          const std::uint64_t rhs =
              (pp - (ab + B % pp * (a0 % pp)) % pp) % pp;
          const std::uint64_t ga = std::gcd(A % pp, pp);
          if (rhs % ga != 0) continue;
          // Solutions form the progression b0_first + k * (pp/ga).
          const std::uint64_t step = pp / ga;
          const std::uint64_t b0_first = static_cast<std::uint64_t>(
              static_cast<unsigned __int128>((rhs / ga) % step) *
              mod_inverse((A % pp) / ga, step) % step);
          if (b0_first < L) valid += (L - 1 - b0_first) / step + 1;
        }
      }
    const unsigned __int128 total = combos;
    unsigned __int128 x = valid, y = total;
    while (y != 0) {
      unsigned __int128 t = x % y;
      x = y;
      y = t;
    }
    const unsigned __int128 gg = x == 0 ? 1 : x;
    out.fraction = Rational(static_cast<std::int64_t>(valid / gg),
                            static_cast<std::int64_t>(total / gg));
    out.sampled = false;
    out.sample_count = static_cast<std::uint64_t>(combos);
    return out;
  }

  if (!opts.allow_sampling)
    throw std::runtime_error(
        "enumeration budget exceeded; pass allow_sampling for an estimate");

  Rng rng = split_stream(opts.seed, "modmul-count");
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < opts.sample_size; ++i) {
    const std::uint64_t A = rng.uniform_in(1, N);
    const std::uint64_t B = rng.uniform_in(1, N);
    const std::uint64_t a0 = rng.uniform_below(L);
    const std::uint64_t b0 = rng.uniform_below(L);
    if (valid_pair(A, B, a0, b0)) ++hits;
  }
  out.fraction = Rational(static_cast<std::int64_t>(hits),
                          static_cast<std::int64_t>(opts.sample_size));
  out.sampled = true;
  out.sample_count = opts.sample_size;
  return out;
}

}  // namespace arith
