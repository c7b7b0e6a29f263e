#include "arith/model.hpp"

namespace arith {

std::vector<int> assign_positions(const LineLayout& layout, PeKind pe_kind,
                                  int seq_len, int abacus_offset) {
  std::vector<int> pos(seq_len, 0);
  if (pe_kind == PeKind::LearnedAbsolute) {
    for (int t = 0; t < seq_len; ++t) pos[t] = t;
    return pos;
  }
  if (pe_kind == PeKind::RelativeBias) return pos;

  // Abacus: digit tokens carry their significance within their field
  // (1 = units), shifted by a shared offset; everything else sits at 0.
  const int W = layout.operand_width;
  const int a_start = 1;                 // after BOS
  const int b_start = a_start + W + 1;   // after operator
  const int ans_start = layout.prompt_length();
  for (int t = 0; t < seq_len; ++t) {
    int sig = 0;
    if (t >= a_start && t < a_start + W) {
      sig = W - (t - a_start);  // most-significant digit first
    } else if (t >= b_start && t < b_start + W) {
      sig = W - (t - b_start);
    } else if (t >= ans_start && t < ans_start + layout.answer_width) {
      sig = t - ans_start + 1;  // least-significant digit first
    }
    pos[t] = sig == 0 ? 0 : abacus_offset + sig;
  }
  return pos;
}

std::vector<std::uint8_t> loss_row_mask(const LineLayout& layout,
                                        LossMask policy) {
  const int T = layout.sequence_length();
  std::vector<std::uint8_t> mask(T, 0);
  if (policy == LossMask::FullSequence) {
    for (int t = 0; t + 1 < T; ++t) mask[t] = 1;
  } else {
    // Rows predicting the answer digits and the ';' terminator.
    const int first = layout.prompt_length() - 1;
    for (int t = first; t <= first + layout.answer_width; ++t) mask[t] = 1;
  }
  return mask;
}

}  // namespace arith
