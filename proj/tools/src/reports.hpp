#pragma once

// CSV output with 17 significant digits so doubles round-trip exactly.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace frobenius::cli {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
};

/// Six significant digits, for human-readable summaries.
std::string format_number(double v);

}  // namespace frobenius::cli
