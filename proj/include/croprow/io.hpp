#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace croprow {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes to "<path>.tmp.<pid>" and renames over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

/// Fixed six-decimal formatting used by every numeric CSV/JSON field.
std::string fmt6(double value);

/// Minimal CSV table: first line is the header, no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name, or -1.
  int column(std::string_view name) const;
  const std::string& cell(std::size_t row, std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& add(std::string value);
  CsvWriter& add(double value);
  CsvWriter& add(int value);
  CsvWriter& add(long long value);
  CsvWriter& add(bool value);
  void end_row();

  const std::string& str() const { return out_; }

 private:
  std::size_t columns_;
  std::size_t pending_ = 0;
  std::string out_;
};

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace croprow
