#include "reports.hpp"

#include <fmt/format.h>

#include "scenario.hpp"

namespace frobenius::cli {

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw ConfigError("output.dir", 0, "cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
  row(std::vector<double>(values));
}

void CsvWriter::row(const std::vector<double>& values) {
  fmt::memory_buffer buf;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) buf.push_back(',');
    fmt::format_to(std::back_inserter(buf), "{:.17g}", values[i]);
  }
  buf.push_back('\n');
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::string format_number(double v) { return fmt::format("{:.6g}", v); }

}  // namespace frobenius::cli
