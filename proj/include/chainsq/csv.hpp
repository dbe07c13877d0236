#pragma once

// CSV emission: `name [unit]` header cells, 17 significant digits, RFC 4180
// quoting, and a sibling `<stem>.manifest.ini` next to every table.

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace chainsq {

struct Column {
  std::string name;
  std::string unit;  // "1" for dimensionless
};

using CsvCell = std::variant<double, long long, bool, std::string>;

std::string format_double(double v);
std::string csv_quote(const std::string& field);
std::string format_cell(const CsvCell& cell);

class CsvWriter {
 public:
  // Writes the header (unless appending) and the sibling manifest.
  CsvWriter(const std::filesystem::path& path, std::vector<Column> columns, const std::string& manifest_text,
            bool append = false);

  void row(const std::vector<CsvCell>& cells);
  const std::filesystem::path& path() const { return path_; }
  std::size_t rows_written() const { return rows_; }

 private:
  std::filesystem::path path_;
  std::vector<Column> columns_;
  std::ofstream out_;
  std::size_t rows_ = 0;
};

std::filesystem::path manifest_path_for(const std::filesystem::path& csv_path);

// Parses an RFC 4180 document into records (header included).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

}  // namespace chainsq
