#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace arith {

// Little-endian digit sequence: digit(1) is the units digit and
// value == sum digit(i) * 10^(i-1). Trailing zeros are allowed so a
// value can be stored padded to a fixed width.
class DigitString {
 public:
  DigitString() = default;

  explicit DigitString(std::vector<std::uint8_t> digits)
      : digits_(std::move(digits)) {
    for (auto d : digits_)
      if (d > 9) throw std::invalid_argument("digit out of range");
  }

  static DigitString from_value(std::uint64_t value, std::size_t min_len = 1);

  std::uint64_t to_value() const;

  std::size_t length() const { return digits_.size(); }

  // 1-based, by significance; positions past the stored length read 0.
  std::uint8_t digit(std::size_t i) const {
    return i >= 1 && i <= digits_.size() ? digits_[i - 1] : 0;
  }

  void set_digit(std::size_t i, std::uint8_t d);

  const std::vector<std::uint8_t>& raw() const { return digits_; }

  bool operator==(const DigitString&) const = default;

 private:
  std::vector<std::uint8_t> digits_;
};

// Number of decimal digits; 0 has length 1.
inline int decimal_length(std::uint64_t x) {
  int n = 1;
  while (x >= 10) {
    x /= 10;
    ++n;
  }
  return n;
}

std::uint64_t pow10_u64(int e);

}  // namespace arith
