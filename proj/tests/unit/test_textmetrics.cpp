#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "nlx/error.hpp"
#include "nlx/rng.hpp"
#include "nlx/textmetrics.hpp"

using namespace nlx;

namespace {

// Plain recursive LCS, exponential without the memo.
std::size_t lcs_ref(const std::vector<std::string>& a, const std::vector<std::string>& b, std::size_t i,
                    std::size_t j, std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
  if (i == a.size() || j == b.size()) return 0;
  if (auto it = memo.find({i, j}); it != memo.end()) return it->second;
  const std::size_t v = a[i] == b[j] ? 1 + lcs_ref(a, b, i + 1, j + 1, memo)
                                     : std::max(lcs_ref(a, b, i + 1, j, memo), lcs_ref(a, b, i, j + 1, memo));
  return memo[{i, j}] = v;
}

}  // namespace

TEST_CASE("tokenizer") {
  CHECK(tokenize("If A equal to 1, then Tupa.").tokens ==
        std::vector<std::string>{"if", "a", "equal", "to", "1", ",", "then", "tupa", "."});
  CHECK(tokenize("x lesser than 3.049").tokens == std::vector<std::string>{"x", "lesser", "than", "3.049"});
  CHECK(tokenize("middle-middle-square >50K").tokens ==
        std::vector<std::string>{"middle-middle-square", ">", "50k"});
  CHECK(tokenize("   ").empty());
}

TEST_CASE("identity and disjoint inputs") {
  const TokenSeq s = tokenize("if a equal to 1 then yes");
  CHECK(bleu(s, {s}) == 1.0);
  CHECK(rouge_n(s, s, 1).f1 == 1.0);
  CHECK(rouge_n(s, s, 2).precision == 1.0);
  CHECK(rouge_l(s, s) == 1.0);
  const TokenSeq d = tokenize("completely different words here");
  CHECK(bleu(s, {d}) == 0.0);
  const RougeScore r = rouge_n(s, d, 1);
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
  CHECK(rouge_l(s, d) == 0.0);
}

TEST_CASE("BLEU against hand counts") {
  // unigrams 6/7; bigrams 4 of 6 -> 5/7 smoothed; trigrams 2 of 5 -> 3/6; 4-grams 1 of 4 -> 2/5.
  const double expected = std::pow((6.0 / 7.0) * (5.0 / 7.0) * (3.0 / 6.0) * (2.0 / 5.0), 0.25);
  CHECK(bleu(tokenize("if a equal to 1 then yes"), {tokenize("if a equal to 2 then yes")}) ==
        doctest::Approx(expected).epsilon(1e-12));
  // Short candidate: every precision is 1, brevity penalty exp(1 - 4/2).
  CHECK(bleu(tokenize("a b"), {tokenize("a b c d")}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  // The closest reference length wins: 3 is closer to 2 than 6.
  CHECK(bleu(tokenize("a b"), {tokenize("a b c d e f"), tokenize("a b c")}) ==
        doctest::Approx(std::exp(1.0 - 3.0 / 2.0)).epsilon(1e-12));
}

TEST_CASE("ROUGE-N against hand counts") {
  const RougeScore r = rouge_n(tokenize("a b c d e"), tokenize("a w x y"), 1);
  CHECK(r.precision == doctest::Approx(0.2));
  CHECK(r.recall == doctest::Approx(0.25));
  CHECK(r.f1 == doctest::Approx(2 * 0.2 * 0.25 / 0.45));
  // Clipped counts: "a a a" vs "a b": one matching unigram.
  const RougeScore c = rouge_n(tokenize("a a a"), tokenize("a b"), 1);
  CHECK(c.precision == doctest::Approx(1.0 / 3.0));
  CHECK(c.recall == doctest::Approx(0.5));
  const RougeScore b2 = rouge_n(tokenize("a b c"), tokenize("a b d"), 2);
  CHECK(b2.precision == doctest::Approx(0.5));
  CHECK(b2.recall == doctest::Approx(0.5));
}

TEST_CASE("ROUGE-L matches a recursive LCS on random pairs") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    std::vector<std::string> a, b;
    for (int k = 0; k < 10; ++k) {
      a.emplace_back(1, static_cast<char>('a' + rng.below(4)));
      b.emplace_back(1, static_cast<char>('a' + rng.below(4)));
    }
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    const std::size_t l = lcs_ref(a, b, 0, 0, memo);
    CHECK(lcs_length(a, b) == l);
    const double p = static_cast<double>(l) / 10.0;
    CHECK(rouge_l(TokenSeq{a}, TokenSeq{b}) == doctest::Approx(l == 0 ? 0.0 : p));
  }
}

TEST_CASE("order sensitivity") {
  const TokenSeq s = tokenize("if hxva equal to africas then it is definitely tupa");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    TokenSeq shuffled = s;
    rng.shuffle(shuffled.tokens);
    CHECK(rouge_n(shuffled, s, 1).f1 == 1.0);
    if (shuffled.tokens != s.tokens) CHECK(bleu(shuffled, {s}) < 1.0);
  }
}

TEST_CASE("scores stay in [0, 1]") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::vector<std::string> a, b;
    for (std::uint64_t k = 1 + rng.below(12); k > 0; --k) a.emplace_back(1, static_cast<char>('a' + rng.below(5)));
    for (std::uint64_t k = 1 + rng.below(12); k > 0; --k) b.emplace_back(1, static_cast<char>('a' + rng.below(5)));
    const double v = bleu(TokenSeq{a}, {TokenSeq{b}});
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(rouge_l(TokenSeq{a}, TokenSeq{b}) <= 1.0);
  }
}

TEST_CASE("empty inputs are rejected") {
  const TokenSeq s = tokenize("a b");
  CHECK_THROWS_AS(bleu(TokenSeq{}, {s}), Error);
  CHECK_THROWS_AS(bleu(s, {}), Error);
  CHECK_THROWS_AS(rouge_n(s, TokenSeq{}, 1), Error);
  CHECK_THROWS_AS(rouge_l(TokenSeq{}, s), Error);
  CHECK_THROWS_AS(rouge_n(s, s, 3), Error);
}
