#include "chainsq/csv.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace chainsq {

namespace {

[[noreturn]] void io_error(const std::filesystem::path& p, const std::string& what) {
  throw std::runtime_error(fmt::format("{}: {}", p.string(), what));
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_cell(const CsvCell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>)
          return format_double(v);
        else if constexpr (std::is_same_v<T, long long>)
          return std::to_string(v);
        else if constexpr (std::is_same_v<T, bool>)
          return v ? "1" : "0";
        else
          return csv_quote(v);
      },
      cell);
}

std::filesystem::path manifest_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".manifest.ini");
  return p;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<Column> columns, const std::string& manifest_text,
                     bool append)
    : path_(path), columns_(std::move(columns)) {
  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
  if (ec) io_error(path_.parent_path(), ec.message());
  {
    std::ofstream m(manifest_path_for(path_), std::ios::trunc);
    if (!m) io_error(manifest_path_for(path_), "cannot open for writing");
    m << manifest_text;
    if (!m) io_error(manifest_path_for(path_), "write failed");
  }
  out_.open(path_, append ? std::ios::app : std::ios::trunc);
  if (!out_) io_error(path_, "cannot open for writing");
  if (!append) {
    std::string header;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (i) header += ',';
      header += csv_quote(columns_[i].unit.empty() ? columns_[i].name : columns_[i].name + " [" + columns_[i].unit + "]");
    }
    out_ << header << "\r\n";
    out_.flush();
    if (!out_) io_error(path_, "write failed");
  }
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  if (cells.size() != columns_.size())
    throw std::logic_error(fmt::format("{}: row has {} cells, schema has {}", path_.string(), cells.size(), columns_.size()));
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += format_cell(cells[i]);
  }
  out_ << line << "\r\n";
  out_.flush();  // streaming: a killed scan leaves a valid prefix
  if (!out_) io_error(path_, "write failed");
  ++rows_;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (field_started || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error(path, "cannot open for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace chainsq
