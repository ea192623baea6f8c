#include "qmf/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace qmf {

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

void CsvWriter::metadata(std::string_view key, std::string_view value) {
  if (header_written_)
    throw std::logic_error("CsvWriter: metadata after header");
  out_ << "# " << key << " = " << value << "\n";
}

void CsvWriter::metadata(std::string_view key, double value) {
  metadata(key, std::string_view(format_double(value)));
}

void CsvWriter::metadata(std::string_view key, std::uint64_t value) {
  metadata(key, std::string_view(std::to_string(value)));
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << (i ? "," : "") << columns[i];
  out_ << "\n";
  header_written_ = true;
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    out_ << (i ? "," : "") << format_double(values[i]);
  out_ << "\n";
}

}  // namespace qmf
