#include "nlx/textmetrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

#include "nlx/error.hpp"

namespace nlx {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

void require_non_empty(const TokenSeq& s, const char* what) {
  if (s.empty()) throw Error(ErrorCode::EmptyInput, std::string(what) + " is empty");
}

double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (!is_word_char(c)) {
      out.tokens.emplace_back(1, c);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size()) {
      const char d = text[j];
      if (is_word_char(d)) {
        ++j;
      } else if ((d == '-' || d == '_') && j + 1 < text.size() && is_word_char(text[j + 1])) {
        ++j;
      } else if (d == '.' && j > i && is_digit(text[j - 1]) && j + 1 < text.size() &&
                 is_digit(text[j + 1])) {
        ++j;
      } else {
        break;
      }
    }
    std::string word(text.substr(i, j - i));
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    out.tokens.push_back(std::move(word));
    i = j;
  }
  return out;
}

double bleu(const TokenSeq& candidate, const std::vector<TokenSeq>& references) {
  require_non_empty(candidate, "candidate");
  if (references.empty()) throw Error(ErrorCode::EmptyInput, "no references");
  for (const auto& r : references) require_non_empty(r, "reference");

  constexpr std::size_t kMaxOrder = 4;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    const NgramCounts cand = ngrams(candidate.tokens, n);
    NgramCounts max_ref;
    for (const auto& r : references) {
      for (const auto& [gram, count] : ngrams(r.tokens, n)) {
        max_ref[gram] = std::max(max_ref[gram], count);
      }
    }
    std::size_t clipped = 0;
    std::size_t total = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) clipped += std::min(count, it->second);
    }
    double p = 0.0;
    if (n == 1) {
      p = static_cast<double>(clipped) / static_cast<double>(total);
    } else {
      p = static_cast<double>(clipped + 1) / static_cast<double>(total + 1);
    }
    if (p == 0.0) return 0.0;
    log_sum += std::log(p) / static_cast<double>(kMaxOrder);
  }

  // Closest reference length; ties go to the shorter one.
  const auto c = static_cast<long>(candidate.size());
  long r = static_cast<long>(references.front().size());
  for (const auto& ref : references) {
    const long len = static_cast<long>(ref.size());
    if (std::labs(len - c) < std::labs(r - c) || (std::labs(len - c) == std::labs(r - c) && len < r)) {
      r = len;
    }
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return bp * std::exp(log_sum);
}

RougeScore rouge_n(const TokenSeq& candidate, const TokenSeq& reference, int n) {
  require_non_empty(candidate, "candidate");
  require_non_empty(reference, "reference");
  if (n != 1 && n != 2) throw Error(ErrorCode::InvalidArgument, "rouge_n supports n = 1 or 2");
  const NgramCounts cand = ngrams(candidate.tokens, static_cast<std::size_t>(n));
  const NgramCounts ref = ngrams(reference.tokens, static_cast<std::size_t>(n));
  std::size_t overlap = 0, cand_total = 0, ref_total = 0;
  for (const auto& [gram, count] : cand) {
    cand_total += count;
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  for (const auto& [gram, count] : ref) ref_total += count;
  RougeScore s;
  s.precision = cand_total ? static_cast<double>(overlap) / static_cast<double>(cand_total) : 0.0;
  s.recall = ref_total ? static_cast<double>(overlap) / static_cast<double>(ref_total) : 0.0;
  s.f1 = f1_of(s.precision, s.recall);
  return s;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  // Two-row dynamic programme.
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (const auto& x : a) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = x == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  require_non_empty(candidate, "candidate");
  require_non_empty(reference, "reference");
  const auto lcs = static_cast<double>(lcs_length(candidate.tokens, reference.tokens));
  return f1_of(lcs / static_cast<double>(candidate.size()),
               lcs / static_cast<double>(reference.size()));
}

}  // namespace nlx
