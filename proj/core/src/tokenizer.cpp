#include "arith/tokenizer.hpp"

#include <stdexcept>

namespace arith {

namespace vocab {

char to_char(int id) {
  if (is_digit(id)) return static_cast<char>('0' + id);
  switch (id) {
    case kPlus: return '+';
    case kStar: return '*';
    case kEquals: return '=';
    case kSemicolon: return ';';
    case kBos: return '^';
    case kEos: return '$';
  }
  throw std::out_of_range("token id out of vocabulary");
}

int from_char(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  switch (c) {
    case '+': return kPlus;
    case '*': return kStar;
    case '=': return kEquals;
    case ';': return kSemicolon;
  }
  return -1;
}

}  // namespace vocab

int LineLayout::op_token() const {
  switch (op_symbol) {
    case '+': return vocab::kPlus;
    case '*': return vocab::kStar;
  }
  throw std::invalid_argument("op_symbol must be '+' or '*'");
}

void LineLayout::validate() const {
  if (operand_width < 1 || answer_width < 1)
    throw std::invalid_argument("layout widths must be positive");
  op_token();
}

LineLayout LineLayout::for_task(const TaskKind& task, int max_operand_len) {
  LineLayout layout;
  layout.operand_width = max_operand_len;
  layout.op_symbol = task.is_mul() ? '*' : '+';
  if (task.is_modular()) {
    layout.answer_width = decimal_length(*task.modulus - 1);
  } else if (task.kind == Op::Mul) {
    layout.answer_width = 2 * max_operand_len;
  } else {
    layout.answer_width = max_operand_len + 1;
  }
  return layout;
}

namespace {

void push_operand_msd_first(std::vector<int>& out, std::uint64_t v, int width,
                            const char* name) {
  if (v >= pow10_u64(width))
    throw std::invalid_argument(std::string(name) + " overflows operand width");
  for (int i = width; i >= 1; --i)
    out.push_back(static_cast<int>(v / pow10_u64(i - 1) % 10));
}

}  // namespace

EncodedExample encode(const ExamplePair& pair, const LineLayout& layout) {
  layout.validate();
  if (pair.result >= pow10_u64(layout.answer_width))
    throw std::invalid_argument("result overflows answer width");
  EncodedExample ex;
  ex.tokens.reserve(layout.sequence_length());
  ex.tokens.push_back(vocab::kBos);
  push_operand_msd_first(ex.tokens, pair.a, layout.operand_width, "operand a");
  ex.tokens.push_back(layout.op_token());
  push_operand_msd_first(ex.tokens, pair.b, layout.operand_width, "operand b");
  ex.tokens.push_back(vocab::kEquals);
  for (int i = 1; i <= layout.answer_width; ++i)  // least-significant first
    ex.tokens.push_back(static_cast<int>(pair.result / pow10_u64(i - 1) % 10));
  ex.tokens.push_back(vocab::kSemicolon);
  ex.tokens.push_back(vocab::kEos);
  ex.prompt_len = layout.prompt_length();
  return ex;
}

bool try_decode_answer(const std::vector<int>& tokens,
                       const LineLayout& layout, std::uint64_t& out) {
  out = 0;
  std::uint64_t scale = 1;
  bool terminated = false;
  for (std::size_t i = layout.prompt_length(); i < tokens.size(); ++i) {
    const int id = tokens[i];
    if (id == vocab::kSemicolon) {
      terminated = true;
      break;
    }
    if (!vocab::is_digit(id)) return false;
    out += static_cast<std::uint64_t>(id) * scale;
    scale *= 10;
  }
  return terminated;
}

std::uint64_t decode_answer(const std::vector<int>& tokens,
                            const LineLayout& layout) {
  std::uint64_t v = 0;
  if (!try_decode_answer(tokens, layout, v))
    throw std::runtime_error("malformed answer field");
  return v;
}

std::string render_text(const ExamplePair& pair, const LineLayout& layout) {
  const EncodedExample ex = encode(pair, layout);
  std::string s;
  s.reserve(ex.tokens.size() - 2);
  for (std::size_t i = 1; i + 1 < ex.tokens.size(); ++i)
    s.push_back(vocab::to_char(ex.tokens[i]));
  return s;
}

ExamplePair parse_text(std::string_view line) {
  std::size_t pos = 0;
  auto parse_digits_msd = [&](std::uint64_t& v) {
    const std::size_t start = pos;
    v = 0;
    while (pos < line.size() && line[pos] >= '0' && line[pos] <= '9') {
      v = v * 10 + static_cast<std::uint64_t>(line[pos] - '0');
      ++pos;
    }
    if (pos == start) throw ParseError("expected digits", pos);
  };
  ExamplePair pair;
  parse_digits_msd(pair.a);
  if (pos >= line.size() || (line[pos] != '+' && line[pos] != '*'))
    throw ParseError("expected operator", pos);
  ++pos;
  parse_digits_msd(pair.b);
  if (pos >= line.size() || line[pos] != '=')
    throw ParseError("expected '='", pos);
  ++pos;
  // Answer digits are least-significant first.
  std::uint64_t v = 0, scale = 1;
  const std::size_t astart = pos;
  while (pos < line.size() && line[pos] >= '0' && line[pos] <= '9') {
    v += static_cast<std::uint64_t>(line[pos] - '0') * scale;
    scale *= 10;
    ++pos;
  }
  if (pos == astart) throw ParseError("expected answer digits", pos);
  pair.result = v;
  if (pos >= line.size() || line[pos] != ';')
    throw ParseError("expected ';'", pos);
  ++pos;
  if (pos != line.size()) throw ParseError("trailing characters", pos);
  return pair;
}

}  // namespace arith
