#include <algorithm>
#include <cctype>
#include <vector>

#include "nlx/error.hpp"
#include "nlx/explang.hpp"

namespace nlx {

namespace {

struct Token {
  std::string_view text;
  std::size_t offset;
};

std::vector<Token> tokenize(std::string_view input) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < input.size()) {
    if (std::isspace(static_cast<unsigned char>(input[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < input.size() && !std::isspace(static_cast<unsigned char>(input[j]))) ++j;
    std::string_view word = input.substr(i, j - i);
    if (word.size() > 1 && word.back() == ',') {
      tokens.push_back({word.substr(0, word.size() - 1), i});
      tokens.push_back({word.substr(word.size() - 1), j - 1});
    } else {
      tokens.push_back({word, i});
    }
    i = j;
  }
  return tokens;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

bool starts_comparator(std::string_view w) {
  return iequals(w, "equal") || iequals(w, "not") || iequals(w, "greater") ||
         iequals(w, "lesser") || iequals(w, "less");
}

bool is_conjunction(std::string_view w) { return iequals(w, "and") || iequals(w, "or"); }

std::string join_words(const std::vector<Token>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t k = begin; k < end; ++k) {
    if (k > begin) out += ' ';
    out += tokens[k].text;
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view input) : input_(input), tokens_(tokenize(input)) {}

  Explanation run() {
    expect_word("If");
    ClauseTree clause = parse_condition();
    std::size_t conditions = 1;
    while (!at_end() && is_conjunction(peek())) {
      if (conditions == static_cast<std::size_t>(ClauseTree::kMaxDepth) + 1) {
        fail({"','", "'then'"});
      }
      const BoolOp op = iequals(peek(), "and") ? BoolOp::And : BoolOp::Or;
      ++pos_;
      clause = ClauseTree::join(op, std::move(clause), parse_condition());
      ++conditions;
    }
    if (!at_end() && peek() == ",") ++pos_;
    expect_word("then");
    return parse_consequent(std::move(clause));
  }

 private:
  bool at_end() const { return pos_ >= tokens_.size(); }
  std::string_view peek() const { return tokens_[pos_].text; }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    if (at_end()) throw ParseError(input_.size(), std::move(expected), "");
    throw ParseError(tokens_[pos_].offset, std::move(expected), std::string(peek()));
  }

  void expect_word(std::string_view word) {
    if (at_end() || !iequals(peek(), word)) fail({"'" + std::string(word) + "'"});
    ++pos_;
  }

  bool accept_word(std::string_view word) {
    if (!at_end() && iequals(peek(), word)) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool value_terminator() const {
    return at_end() || peek() == "," || is_conjunction(peek()) || iequals(peek(), "then");
  }

  ClauseTree parse_condition() {
    const std::size_t feature_begin = pos_;
    if (at_end() || starts_comparator(peek()) || value_terminator()) fail({"feature name"});
    while (!at_end() && !starts_comparator(peek())) {
      if (value_terminator()) fail({"comparator"});
      ++pos_;
    }
    if (at_end()) fail({"comparator"});
    std::string feature = join_words(tokens_, feature_begin, pos_);
    const Comparator cmp = parse_comparator();

    const std::size_t value_begin = pos_;
    while (!value_terminator()) ++pos_;
    if (pos_ == value_begin) fail({"value"});
    Value value;
    if (pos_ - value_begin == 1) {
      const auto number = parse_number(tokens_[value_begin].text);
      value = number ? Value::number(*number) : Value::text(std::string(tokens_[value_begin].text));
    } else {
      value = Value::text(join_words(tokens_, value_begin, pos_));
    }
    return ClauseTree(Condition{std::move(feature), cmp, std::move(value)});
  }

  Comparator parse_comparator() {
    const bool negated = accept_word("not");
    if (accept_word("equal")) {
      expect_word("to");
      return negated ? Comparator::Neq : Comparator::Eq;
    }
    const bool greater = !at_end() && iequals(peek(), "greater");
    const bool lesser = !at_end() && (iequals(peek(), "lesser") || iequals(peek(), "less"));
    if (!greater && !lesser) {
      if (negated) fail({"'equal'", "'greater'", "'lesser'"});
      fail({"comparator"});
    }
    ++pos_;
    expect_word("than");
    if (negated) return greater ? Comparator::Ngt : Comparator::Nlt;
    // "or equal to" belongs to the comparator only when followed by "equal".
    if (pos_ + 1 < tokens_.size() && iequals(peek(), "or") && iequals(tokens_[pos_ + 1].text, "equal")) {
      pos_ += 2;
      expect_word("to");
      return greater ? Comparator::Geq : Comparator::Leq;
    }
    return greater ? Comparator::Gt : Comparator::Lt;
  }

  Explanation parse_consequent(ClauseTree clause) {
    // Everything after "then" belongs to the consequent; one trailing period is kept aside.
    std::vector<Token> rest(tokens_.begin() + static_cast<std::ptrdiff_t>(pos_), tokens_.end());
    bool full_stop = false;
    if (!rest.empty() && rest.back().text.size() > 1 && rest.back().text.back() == '.') {
      rest.back().text.remove_suffix(1);
      full_stop = true;
    } else if (!rest.empty() && rest.back().text == ".") {
      rest.pop_back();
      full_stop = true;
    }
    auto fail_at = [&](std::size_t k, std::vector<std::string> expected) {
      if (k >= rest.size()) throw ParseError(input_.size(), std::move(expected), "");
      throw ParseError(rest[k].offset, std::move(expected), std::string(rest[k].text));
    };
    if (rest.empty()) fail_at(0, {"label"});

    Explanation e{std::move(clause), std::nullopt, {}, false, std::nullopt, full_stop};
    std::size_t k = 0;
    std::size_t is_at = rest.size();
    for (std::size_t i = 1; i < rest.size(); ++i) {
      if (iequals(rest[i].text, "is")) {
        is_at = i;
        break;
      }
    }
    if (is_at < rest.size()) {
      if (!(is_at == 1 && iequals(rest[0].text, "it"))) {
        e.target_name = join_words(rest, 0, is_at);
      }
      k = is_at + 1;
      if (k < rest.size() && is_quantifier_word(rest[k].text)) {
        e.quantifier = Quantifier(rest[k].text);
        ++k;
      }
    }
    if (k < rest.size() && iequals(rest[k].text, "not")) {
      e.label_negated = true;
      ++k;
    }
    if (k >= rest.size()) fail_at(k, {"label"});
    if (iequals(rest[k].text, "not")) fail_at(k, {"label"});
    e.label = join_words(rest, k, rest.size());
    return e;
  }

  std::string_view input_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Explanation parse(std::string_view text) { return Parser(text).run(); }

}  // namespace nlx
