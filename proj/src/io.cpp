#include "croprow/io.hpp"

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace croprow {

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write failed: " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError("cannot rename into place: " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt6(double value) {
  // Avoid "-0.000000" so golden files do not depend on the sign of tiny values.
  if (value > -5e-7 && value < 5e-7) value = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t' || text.front() == '\r')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  return text;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(trim(text.substr(start)));
      break;
    }
    parts.emplace_back(trim(text.substr(start, pos - start)));
    start = pos + 1;
  }
  return parts;
}

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

const std::string& CsvTable::cell(std::size_t row, std::string_view name) const {
  int c = column(name);
  if (c < 0) throw std::out_of_range("no CSV column '" + std::string(name) + "'");
  return rows.at(row).at(static_cast<std::size_t>(c));
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t start = 0;
  bool first = true;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    auto fields = split(line, ',');
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size())
        throw std::invalid_argument("CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                                    std::to_string(table.header.size()));
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ += ',';
    out_ += header[i];
  }
  out_ += '\n';
}

CsvWriter& CsvWriter::add(std::string value) {
  if (pending_ == columns_) throw std::logic_error("CSV row has too many fields");
  if (pending_) out_ += ',';
  out_ += value;
  ++pending_;
  return *this;
}

CsvWriter& CsvWriter::add(double value) { return add(fmt6(value)); }
CsvWriter& CsvWriter::add(int value) { return add(std::to_string(value)); }
CsvWriter& CsvWriter::add(long long value) { return add(std::to_string(value)); }
CsvWriter& CsvWriter::add(bool value) { return add(std::string(value ? "1" : "0")); }

void CsvWriter::end_row() {
  if (pending_ != columns_) throw std::logic_error("CSV row has too few fields");
  out_ += '\n';
  pending_ = 0;
}

}  // namespace croprow
