#pragma once

// The if-then explanation language: AST, quantifier table, parser, renderers.
//
// Surface grammar (keywords case-insensitive):
//
//   If <cond> [(AND|OR) <cond> [(AND|OR) <cond>]] [,] then <consequent> [.]
//   <cond>       := <feature words> <comparator> <value words>
//   <consequent> := [not] <label>
//                 | (it | <target words>) is [<quantifier>] [not] <label>
//
// Conjunctions associate to the left without parentheses, so at most two
// binary operators fit in one clause and every right operand is a condition.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "nlx/value.hpp"

namespace nlx {

enum class Comparator { Eq, Neq, Gt, Lt, Geq, Leq, Ngt, Nlt };

inline constexpr std::array<Comparator, 8> kAllComparators = {
    Comparator::Eq,  Comparator::Neq, Comparator::Gt,  Comparator::Lt,
    Comparator::Geq, Comparator::Leq, Comparator::Ngt, Comparator::Nlt};

// Canonical surface phrase, e.g. "lesser than or equal to".
std::string_view comparator_phrase(Comparator c) noexcept;
// Short tag used in JSON: "EQ", "NEQ", "GT", ...
std::string_view comparator_tag(Comparator c) noexcept;
std::optional<Comparator> comparator_from_tag(std::string_view tag) noexcept;

// True for comparators that only make sense against a numeric literal.
bool requires_numeric(Comparator c) noexcept;
// True for NEQ / NGT / NLT, the clause-negation forms.
bool is_negated(Comparator c) noexcept;
// Numeric semantics; NGT behaves as LEQ and NLT as GEQ.
bool compare_numbers(Comparator c, double x, double threshold) noexcept;

struct Condition {
  std::string feature;
  Comparator comparator = Comparator::Eq;
  Value value;

  friend bool operator==(const Condition&, const Condition&) = default;
};

enum class BoolOp { And, Or };

std::string_view bool_op_keyword(BoolOp op) noexcept;

// Immutable clause tree: a condition or a left-deep AND/OR node.
class ClauseTree {
 public:
  static constexpr int kMaxDepth = 2;

  // Placeholder leaf with an empty condition.
  ClauseTree() : ClauseTree(Condition{}) {}
  ClauseTree(Condition condition);  // NOLINT(google-explicit-constructor)

  // Throws InvalidArgument when `right` is not a leaf or the result would be
  // deeper than kMaxDepth binary nodes.
  static ClauseTree join(BoolOp op, ClauseTree left, ClauseTree right);

  bool is_leaf() const noexcept { return std::holds_alternative<Condition>(node_); }
  const Condition& condition() const { return std::get<Condition>(node_); }
  BoolOp op() const;
  const ClauseTree& left() const;
  const ClauseTree& right() const;

  // Number of binary nodes on the longest root-to-leaf path.
  int depth() const noexcept;
  // Number of conditions (leaves).
  std::size_t size() const noexcept;

  template <typename F>
  void for_each_condition(F&& f) const {
    if (is_leaf()) {
      f(condition());
    } else {
      left().for_each_condition(f);
      right().for_each_condition(f);
    }
  }

  friend bool operator==(const ClauseTree& a, const ClauseTree& b);

 private:
  struct Branch;
  explicit ClauseTree(std::shared_ptr<const Branch> b) : node_(std::move(b)) {}
  const Branch& branch() const;

  std::variant<Condition, std::shared_ptr<const Branch>> node_;
};

struct ClauseTree::Branch {
  BoolOp op;
  ClauseTree left;
  ClauseTree right;
};

inline const ClauseTree::Branch& ClauseTree::branch() const {
  return *std::get<std::shared_ptr<const Branch>>(node_);
}
inline BoolOp ClauseTree::op() const { return branch().op; }
inline const ClauseTree& ClauseTree::left() const { return branch().left; }
inline const ClauseTree& ClauseTree::right() const { return branch().right; }

struct QuantifierEntry {
  std::string_view word;
  double confidence;
};

// Ordered by non-increasing confidence.
inline constexpr std::array<QuantifierEntry, 13> kQuantifierTable = {{
    {"always", 1.00},
    {"certainly", 0.95},
    {"definitely", 0.95},
    {"usually", 0.90},
    {"generally", 0.85},
    {"likely", 0.70},
    {"often", 0.70},
    {"frequently", 0.65},
    {"sometimes", 0.50},
    {"occasionally", 0.40},
    {"rarely", 0.15},
    {"seldom", 0.10},
    {"never", 0.00},
}};

// Throws UnknownQuantifier for words outside the vocabulary (case-insensitive).
double quantifier_confidence(std::string_view word);
bool is_quantifier_word(std::string_view word) noexcept;

class Quantifier {
 public:
  // Throws UnknownQuantifier.
  explicit Quantifier(std::string_view word);

  const std::string& word() const noexcept { return word_; }
  double confidence() const noexcept { return confidence_; }

  friend bool operator==(const Quantifier& a, const Quantifier& b) { return a.word_ == b.word_; }

 private:
  std::string word_;
  double confidence_;
};

struct Explanation {
  ClauseTree clause;
  std::optional<Quantifier> quantifier;
  std::string label;
  bool label_negated = false;
  std::optional<std::string> target_name;
  // Surface punctuation: the text ended with a period. Not part of equality or JSON.
  bool full_stop = false;

  friend bool operator==(const Explanation& a, const Explanation& b) {
    return a.clause == b.clause && a.quantifier == b.quantifier && a.label == b.label &&
           a.label_negated == b.label_negated && a.target_name == b.target_name;
  }
};

// Throws ParseError with a byte offset and the set of expected tokens.
Explanation parse(std::string_view text);

std::string render_condition(const Condition& c);
std::string render_clause(const ClauseTree& clause);
std::string render(const Explanation& e);

// "{p}% of the time, {the target|it} is {label} if {clause}".
// Throws MissingQuantifier when the explanation has none.
std::string render_with_confidence(const Explanation& e);

}  // namespace nlx
