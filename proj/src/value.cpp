#include "nlx/value.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "nlx/error.hpp"

namespace nlx {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::UnknownQuantifier: return "UnknownQuantifier";
    case ErrorCode::MissingQuantifier: return "MissingQuantifier";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::WrongLabelKind: return "WrongLabelKind";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SchemaTooSmall: return "SchemaTooSmall";
    case ErrorCode::BalanceUnreachable: return "BalanceUnreachable";
    case ErrorCode::LabelAbsent: return "LabelAbsent";
    case ErrorCode::ZeroCoverage: return "ZeroCoverage";
    case ErrorCode::DegenerateBatch: return "DegenerateBatch";
    case ErrorCode::InsufficientExamples: return "InsufficientExamples";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::UnsupportedKind: return "UnsupportedKind";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Oracle: return "OracleError";
  }
  return "Unknown";
}

namespace {

std::string describe_expected(const std::vector<std::string>& expected) {
  std::string out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) out += i + 1 == expected.size() ? " or " : ", ";
    out += expected[i];
  }
  return out;
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected,
                       const std::string& found)
    : Error(ErrorCode::Parse,
            "at byte " + std::to_string(offset) + ": expected " +
                describe_expected(expected) + ", found " +
                (found.empty() ? std::string("end of input") : "'" + found + "'")),
      offset_(offset),
      expected_(std::move(expected)) {}

std::string format_number(double x) {
  if (x == 0.0) return "0";  // folds -0
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) return std::to_string(x);
  return std::string(buf.data(), end);
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::string_view body = text;
  if (body.front() == '+') body.remove_prefix(1);
  if (body.empty()) return std::nullopt;
  // from_chars also accepts "inf"/"nan"; only plain decimals count as numbers.
  const char c = body.front() == '-' && body.size() > 1 ? body[1] : body.front();
  if (!(c >= '0' && c <= '9') && c != '.') return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc{} || ptr != body.data() + body.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace nlx
