#include "nlx/csv.hpp"

#include <fstream>
#include <iterator>

#include "nlx/error.hpp"

namespace nlx {

namespace {

// Splits the whole input into records. Quoted fields may span lines.
std::vector<std::pair<std::size_t, std::vector<std::string>>> split_records(const std::string& text) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> records;
  std::vector<std::string> fields;
  std::string field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_has_content = false;

  auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    // Blank lines are skipped rather than read as one-field rows.
    if (record_has_content) records.emplace_back(record_line, std::move(fields));
    fields.clear();
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw MalformedCsvError(line, "unexpected quote inside unquoted field");
        }
        if (!record_has_content) record_line = line;
        in_quotes = true;
        field_was_quoted = true;
        record_has_content = true;
        break;
      case ',':
        if (!record_has_content) record_line = line;
        record_has_content = true;
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (field_was_quoted) throw MalformedCsvError(line, "text after closing quote");
        if (!record_has_content) record_line = line;
        record_has_content = true;
        field.push_back(c);
    }
  }
  if (in_quotes) throw MalformedCsvError(record_line, "unterminated quoted field");
  end_record();
  return records;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto records = split_records(text);
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "CSV has no header");
  CsvTable table;
  table.header = std::move(records.front().second);
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& [line, fields] = records[r];
    if (fields.size() != table.header.size()) {
      throw MalformedCsvError(line, "expected " + std::to_string(table.header.size()) +
                                        " fields, found " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.row_lines.push_back(line);
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return read_csv(in);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

}  // namespace nlx
