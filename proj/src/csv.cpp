#include "lcmine/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "lcmine/error.hpp"

namespace lcmine {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  out.push_back(std::move(field));
  return out;
}

}  // namespace

CsvTable CsvTable::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path);

  CsvTable table;
  table.path_ = path;
  std::string line;
  if (!std::getline(in, line)) {
    fail(ErrorKind::schema, path + ": empty file, header row required");
  }
  table.header_ = split_line(line);
  for (std::size_t i = 0; i < table.header_.size(); ++i) {
    table.index_.emplace(table.header_[i], i);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != table.header_.size()) {
      fail(ErrorKind::parse, path + ": row " + std::to_string(table.rows_.size() + 2) +
                                 " has " + std::to_string(cells.size()) +
                                 " fields, expected " + std::to_string(table.header_.size()));
    }
    table.rows_.push_back(std::move(cells));
  }
  return table;
}

bool CsvTable::has_column(std::string_view name) const {
  return index_.count(std::string(name)) > 0;
}

std::size_t CsvTable::column(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    fail(ErrorKind::schema, path_ + ": missing required column '" + std::string(name) + "'");
  }
  return it->second;
}

const std::string& CsvTable::cell(std::size_t row, std::size_t col) const {
  return rows_[row][col];
}

double CsvTable::cell_double(std::size_t row, std::size_t col) const {
  const std::string& s = rows_[row][col];
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    fail(ErrorKind::parse, path_ + ": unreadable numeric cell at row " +
                               std::to_string(row + 2) + ", column '" + header_[col] +
                               "' (value '" + s + "')");
  }
  return value;
}

long long CsvTable::cell_int(std::size_t row, std::size_t col) const {
  const std::string& s = rows_[row][col];
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    // Some exporters write integer columns as "12.0"; accept the exact ones.
    const double d = cell_double(row, col);
    const long long rounded = static_cast<long long>(d >= 0 ? d + 0.5 : d - 0.5);
    if (static_cast<double>(rounded) == d) return rounded;
    fail(ErrorKind::parse, path_ + ": unreadable integer cell at row " +
                               std::to_string(row + 2) + ", column '" + header_[col] + "'");
  }
  return value;
}

CsvWriter::CsvWriter(const std::string& path) : path_(path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) fail(ErrorKind::io, "cannot write " + path);
  file_ = f;
}

CsvWriter::~CsvWriter() { close(); }

void CsvWriter::close() {
  if (file_) {
    std::fclose(static_cast<FILE*>(file_));
    file_ = nullptr;
  }
}

void CsvWriter::write_header(const std::vector<std::string>& names) {
  begin_row();
  for (const auto& n : names) add(n);
  end_row();
}

void CsvWriter::begin_row() { first_in_row_ = true; }

void CsvWriter::add(std::string_view text) {
  FILE* f = static_cast<FILE*>(file_);
  if (!first_in_row_) std::fputc(',', f);
  std::fwrite(text.data(), 1, text.size(), f);
  first_in_row_ = false;
}

void CsvWriter::add(double value) { add(format_fixed(value)); }

void CsvWriter::add(long long value) { add(std::to_string(value)); }

void CsvWriter::add(int value) { add(std::to_string(value)); }

void CsvWriter::add_null() { add(std::string_view{}); }

void CsvWriter::end_row() {
  std::fputc('\n', static_cast<FILE*>(file_));
  first_in_row_ = true;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace lcmine
