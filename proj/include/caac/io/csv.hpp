#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace caac::io {

/// Decimal form that parses back to the same double ("%.17g").
std::string format_double(double v);
double parse_double(std::string_view text, std::string_view what);
long parse_int(std::string_view text, std::string_view what);

class CsvWriter {
 public:
  /// Throws IoError if the file cannot be opened.
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(double v);
  CsvWriter& cell(long v);
  CsvWriter& cell(int v) { return cell(static_cast<long>(v)); }
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long>(v)); }
  CsvWriter& empty() { return cell(std::string_view{}); }
  void end_row();
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index of `name`; throws FormatError if missing.
  std::size_t column(std::string_view name) const;
};

/// Plain comma-separated file with a header line (no quoting). Throws IoError
/// if unreadable and FormatError on ragged rows or a header mismatch.
CsvTable read_csv(const std::filesystem::path& path,
                  const std::vector<std::string>& expected_header = {});

}  // namespace caac::io
