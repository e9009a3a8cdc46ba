#include "nlx/explang.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "nlx/error.hpp"

namespace nlx {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view comparator_phrase(Comparator c) noexcept {
  switch (c) {
    case Comparator::Eq: return "equal to";
    case Comparator::Neq: return "not equal to";
    case Comparator::Gt: return "greater than";
    case Comparator::Lt: return "lesser than";
    case Comparator::Geq: return "greater than or equal to";
    case Comparator::Leq: return "lesser than or equal to";
    case Comparator::Ngt: return "not greater than";
    case Comparator::Nlt: return "not lesser than";
  }
  return "";
}

std::string_view comparator_tag(Comparator c) noexcept {
  switch (c) {
    case Comparator::Eq: return "EQ";
    case Comparator::Neq: return "NEQ";
    case Comparator::Gt: return "GT";
    case Comparator::Lt: return "LT";
    case Comparator::Geq: return "GEQ";
    case Comparator::Leq: return "LEQ";
    case Comparator::Ngt: return "NGT";
    case Comparator::Nlt: return "NLT";
  }
  return "";
}

std::optional<Comparator> comparator_from_tag(std::string_view tag) noexcept {
  for (Comparator c : kAllComparators) {
    if (comparator_tag(c) == tag) return c;
  }
  return std::nullopt;
}

bool requires_numeric(Comparator c) noexcept {
  return c != Comparator::Eq && c != Comparator::Neq;
}

bool is_negated(Comparator c) noexcept {
  return c == Comparator::Neq || c == Comparator::Ngt || c == Comparator::Nlt;
}

bool compare_numbers(Comparator c, double x, double threshold) noexcept {
  switch (c) {
    case Comparator::Eq: return x == threshold;
    case Comparator::Neq: return x != threshold;
    case Comparator::Gt: return x > threshold;
    case Comparator::Lt: return x < threshold;
    case Comparator::Geq:
    case Comparator::Nlt: return x >= threshold;
    case Comparator::Leq:
    case Comparator::Ngt: return x <= threshold;
  }
  return false;
}

std::string_view bool_op_keyword(BoolOp op) noexcept {
  return op == BoolOp::And ? "AND" : "OR";
}

// ---------------------------------------------------------------------------
// ClauseTree

ClauseTree::ClauseTree(Condition condition) : node_(std::move(condition)) {}

ClauseTree ClauseTree::join(BoolOp op, ClauseTree left, ClauseTree right) {
  if (!right.is_leaf()) {
    throw Error(ErrorCode::InvalidArgument,
                "clause trees are left-deep: the right operand must be a condition");
  }
  if (left.depth() + 1 > kMaxDepth) {
    throw Error(ErrorCode::InvalidArgument,
                "clause trees nest at most " + std::to_string(kMaxDepth) + " operators");
  }
  return ClauseTree(std::make_shared<const Branch>(Branch{op, std::move(left), std::move(right)}));
}

int ClauseTree::depth() const noexcept {
  if (is_leaf()) return 0;
  return 1 + std::max(left().depth(), right().depth());
}

std::size_t ClauseTree::size() const noexcept {
  if (is_leaf()) return 1;
  return left().size() + right().size();
}

bool operator==(const ClauseTree& a, const ClauseTree& b) {
  if (a.is_leaf() != b.is_leaf()) return false;
  if (a.is_leaf()) return a.condition() == b.condition();
  return a.op() == b.op() && a.left() == b.left() && a.right() == b.right();
}

// ---------------------------------------------------------------------------
// Quantifiers

namespace {

const QuantifierEntry* find_quantifier(std::string_view word) noexcept {
  const std::string lower = lowercase(word);
  for (const auto& entry : kQuantifierTable) {
    if (entry.word == lower) return &entry;
  }
  return nullptr;
}

}  // namespace

bool is_quantifier_word(std::string_view word) noexcept {
  return find_quantifier(word) != nullptr;
}

double quantifier_confidence(std::string_view word) {
  const auto* entry = find_quantifier(word);
  if (!entry) {
    throw Error(ErrorCode::UnknownQuantifier, "unknown quantifier '" + std::string(word) + "'");
  }
  return entry->confidence;
}

Quantifier::Quantifier(std::string_view word)
    : word_(lowercase(word)), confidence_(quantifier_confidence(word)) {}

// ---------------------------------------------------------------------------
// Rendering

std::string render_condition(const Condition& c) {
  std::string out = c.feature;
  out += ' ';
  out += comparator_phrase(c.comparator);
  out += ' ';
  out += c.value.to_string();
  return out;
}

std::string render_clause(const ClauseTree& clause) {
  if (clause.is_leaf()) return render_condition(clause.condition());
  std::string out = render_clause(clause.left());
  out += ' ';
  out += bool_op_keyword(clause.op());
  out += ' ';
  out += render_clause(clause.right());
  return out;
}

std::string render(const Explanation& e) {
  std::string out = "If " + render_clause(e.clause) + ", then ";
  if (e.quantifier || e.target_name) {
    out += e.target_name ? *e.target_name : std::string("it");
    out += " is ";
    if (e.quantifier) {
      out += e.quantifier->word();
      out += ' ';
    }
  }
  if (e.label_negated) out += "not ";
  out += e.label;
  if (e.full_stop) out += '.';
  return out;
}

std::string render_with_confidence(const Explanation& e) {
  if (!e.quantifier) {
    throw Error(ErrorCode::MissingQuantifier,
                "explanation has no quantifier to convert: " + render(e));
  }
  const long percent = std::lround(100.0 * e.quantifier->confidence());
  std::string out = std::to_string(percent) + "% of the time, ";
  out += e.target_name ? "the " + *e.target_name : std::string("it");
  out += " is ";
  if (e.label_negated) out += "not ";
  out += e.label;
  out += " if ";
  out += render_clause(e.clause);
  return out;
}

}  // namespace nlx
