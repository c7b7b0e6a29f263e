#include "arith/digits.hpp"

namespace arith {

DigitString DigitString::from_value(std::uint64_t value, std::size_t min_len) {
  std::vector<std::uint8_t> ds;
  do {
    ds.push_back(static_cast<std::uint8_t>(value % 10));
    value /= 10;
  } while (value > 0);
  while (ds.size() < min_len) ds.push_back(0);
  return DigitString(std::move(ds));
}

std::uint64_t DigitString::to_value() const {
  std::uint64_t v = 0;
  for (std::size_t i = digits_.size(); i > 0; --i) v = v * 10 + digits_[i - 1];
  return v;
}

void DigitString::set_digit(std::size_t i, std::uint8_t d) {
  if (i < 1) throw std::out_of_range("digit index is 1-based");
  if (d > 9) throw std::invalid_argument("digit out of range");
  if (i > digits_.size()) digits_.resize(i, 0);
  digits_[i - 1] = d;
}

std::uint64_t pow10_u64(int e) {
  if (e < 0 || e > 19) throw std::out_of_range("pow10_u64 exponent");
  std::uint64_t r = 1;
  while (e-- > 0) r *= 10;
  return r;
}

}  // namespace arith
