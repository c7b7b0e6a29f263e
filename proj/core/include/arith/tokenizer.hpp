#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "arith/datagen.hpp"

namespace arith {

// Fixed 16-symbol character vocabulary. Ids are stable by construction:
// digits map to their own value.
namespace vocab {
inline constexpr int kDigit0 = 0;  // '0'..'9' are ids 0..9
inline constexpr int kPlus = 10;
inline constexpr int kStar = 11;
inline constexpr int kEquals = 12;
inline constexpr int kSemicolon = 13;
inline constexpr int kBos = 14;
inline constexpr int kEos = 15;
inline constexpr int kSize = 16;

inline bool is_digit(int id) { return id >= 0 && id <= 9; }
char to_char(int id);       // BOS/EOS render as '^' / '$' (debug only)
int from_char(char c);      // -1 for unknown
}  // namespace vocab

// Fixed line geometry: operands zero-padded to operand_width digits,
// most-significant first; answer zero-padded to answer_width digits,
// least-significant first (the reversed format).
struct LineLayout {
  int operand_width = 4;
  int answer_width = 5;
  char op_symbol = '+';

  // BOS a_W..a_1 op b_W..b_1 = c_1..c_Wc ; EOS
  int sequence_length() const { return 2 * operand_width + answer_width + 5; }
  // Index of the first answer position (just past '=').
  int prompt_length() const { return 2 * operand_width + 3; }
  int op_token() const;
  void validate() const;

  static LineLayout for_task(const TaskKind& task, int max_operand_len);
};

struct EncodedExample {
  std::vector<int> tokens;
  int prompt_len = 0;
};

EncodedExample encode(const ExamplePair& pair, const LineLayout& layout);

// Value of the digit run between '=' and ';' in a generated sequence.
// `tokens` is the full sequence; parsing starts at prompt_len. A short
// answer (early ';') is accepted; a non-digit token before the
// terminator throws.
std::uint64_t decode_answer(const std::vector<int>& tokens,
                            const LineLayout& layout);

// Same, but reports failure instead of throwing.
bool try_decode_answer(const std::vector<int>& tokens,
                       const LineLayout& layout, std::uint64_t& out);

// Text file form: one example per line, BOS/EOS implicit.
std::string render_text(const ExamplePair& pair, const LineLayout& layout);

struct ParseError : std::runtime_error {
  std::size_t offset;
  ParseError(const std::string& what, std::size_t off)
      : std::runtime_error(what), offset(off) {}
};

ExamplePair parse_text(std::string_view line);

}  // namespace arith
