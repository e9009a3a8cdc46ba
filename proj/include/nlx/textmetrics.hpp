#pragma once

// Surface similarity between a generated and a reference explanation.

#include <string>
#include <string_view>
#include <vector>

namespace nlx {

// Lowercased tokens. Alphanumeric runs (with inner '-', '_' and digit-flanked
// '.') form words; any other non-space character is a token by itself.
struct TokenSeq {
  std::vector<std::string> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

TokenSeq tokenize(std::string_view text);

// Sentence BLEU, n <= 4, uniform weights, brevity penalty against the closest
// reference length. Precisions for n > 1 use add-one smoothing.
double bleu(const TokenSeq& candidate, const std::vector<TokenSeq>& references);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// n in {1, 2}.
RougeScore rouge_n(const TokenSeq& candidate, const TokenSeq& reference, int n);
// Longest-common-subsequence F1.
double rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace nlx
