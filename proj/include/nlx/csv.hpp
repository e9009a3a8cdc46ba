#pragma once

// Minimal RFC 4180 reader/writer: comma separator, double-quote quoting,
// CRLF or LF line endings.

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace nlx {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based physical line on which each row starts, for error messages.
  std::vector<std::size_t> row_lines;
};

// Throws MalformedCsvError (unterminated quote, ragged row) or EmptyDataset
// when there is no header.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

// Quotes only when the field contains a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace nlx
