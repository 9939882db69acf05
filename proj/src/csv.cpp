#include "floqem/csv.hpp"

#include "floqem/types.hpp"

#include <cstdio>

namespace floqem {

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path) {
  if (!out_) throw ConfigError("cannot open output file '" + path + "'");
}

void CsvWriter::meta(const std::string& key, const std::string& value) {
  if (header_written_)
    throw ConfigError("metadata must precede the CSV header");
  out_ << "# " << key << "=" << value << "\n";
}

void CsvWriter::header(const std::vector<std::string>& cols) {
  header_written_ = true;
  for (size_t i = 0; i < cols.size(); ++i)
    out_ << cols[i] << (i + 1 < cols.size() ? "," : "");
  out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i)
    out_ << cells[i] << (i + 1 < cells.size() ? "," : "");
  out_ << "\n";
}

}  // namespace floqem
