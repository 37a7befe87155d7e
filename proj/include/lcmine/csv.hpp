#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lcmine {

/// In-memory view of one comma-separated file: a header row plus string
/// cells. Typed access converts on demand and reports the offending
/// row/column on failure.
class CsvTable {
 public:
  static CsvTable read_file(const std::string& path);

  std::size_t row_count() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }

  bool has_column(std::string_view name) const;
  /// Column index; throws a schema error naming the column when absent.
  std::size_t column(std::string_view name) const;

  const std::string& cell(std::size_t row, std::size_t col) const;
  double cell_double(std::size_t row, std::size_t col) const;
  long long cell_int(std::size_t row, std::size_t col) const;

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::string>> rows_;
};

/// Streaming CSV writer with fixed 6-decimal numeric formatting so that
/// written recordings reload to the documented precision.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void write_header(const std::vector<std::string>& names);
  void begin_row();
  void add(std::string_view text);
  void add(double value);
  void add(long long value);
  void add(int value);
  /// Empty cell for undefined/null values.
  void add_null();
  void end_row();
  void close();

 private:
  void* file_ = nullptr;  // FILE*
  bool first_in_row_ = true;
  std::string path_;
};

std::string format_fixed(double value, int decimals = 6);

}  // namespace lcmine
