#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace floqem {

// Locale-independent "%.12g" rendering; all numeric output funnels through
// this so runs are byte-comparable.
std::string format_g(double v);

uint64_t fnv1a64(const std::string& s);

// Plain CSV with '#'-prefixed metadata lines. No timestamps, no host paths:
// output depends only on config content and seed.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void meta(const std::string& key, const std::string& value);
  void header(const std::vector<std::string>& cols);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  bool header_written_ = false;
};

}  // namespace floqem
