#pragma once

// CSV emission: '#'-prefixed metadata block, one header line, then rows.
// Formatting is fixed so output is byte-identical for identical inputs.

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace qmf {

std::string format_double(double v);  // %.12g

std::uint64_t fnv1a64(std::string_view data);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void metadata(std::string_view key, std::string_view value);
  void metadata(std::string_view key, double value);
  void metadata(std::string_view key, std::uint64_t value);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);

 private:
  std::ostream& out_;
  bool header_written_ = false;
};

}  // namespace qmf
