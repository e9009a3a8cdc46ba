#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlx {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  UnknownQuantifier,
  MissingQuantifier,
  TypeMismatch,
  UnknownFeature,
  LabelMismatch,
  EmptyBatch,
  WrongLabelKind,
  EmptyInput,
  SchemaTooSmall,
  BalanceUnreachable,
  LabelAbsent,
  ZeroCoverage,
  DegenerateBatch,
  InsufficientExamples,
  BudgetExhausted,
  MalformedCsv,
  EmptyDataset,
  UnsupportedKind,
  Config,
  Io,
  Oracle,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the explanation parser. `offset` is a byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected,
             const std::string& found);

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class MalformedCsvError : public Error {
 public:
  MalformedCsvError(std::size_t line, const std::string& message)
      : Error(ErrorCode::MalformedCsv,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace nlx
