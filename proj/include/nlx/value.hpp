#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace nlx {

// Shortest round-trippable decimal form; integral values carry no fraction.
std::string format_number(double x);

// Parses the whole of `text` as a finite decimal number.
std::optional<double> parse_number(std::string_view text);

// A feature value or a condition literal: either numeric or categorical text.
class Value {
 public:
  Value() : data_(0.0) {}

  static Value number(double x) { return Value(x); }
  static Value text(std::string s) { return Value(std::move(s)); }

  bool is_number() const noexcept { return std::holds_alternative<double>(data_); }
  double as_number() const { return std::get<double>(data_); }
  const std::string& as_text() const { return std::get<std::string>(data_); }

  // Surface form used by renderers and CSV writers.
  std::string to_string() const {
    return is_number() ? format_number(as_number()) : as_text();
  }

  friend bool operator==(const Value&, const Value&) = default;

 private:
  explicit Value(double x) : data_(x) {}
  explicit Value(std::string s) : data_(std::move(s)) {}

  std::variant<double, std::string> data_;
};

}  // namespace nlx
