#pragma once

#include "imlike/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace imlike {

// Provenance line written as the first line of every CSV.
struct RunInfo {
  std::string command_line;
  std::uint64_t seed = 0;
};

std::string format_number(double value);

// "# imlike <version> | command: ... | seed: ..."
std::string provenance_comment(const RunInfo& info);

// Writes the optional provenance comment, a header line and one row per matrix row.
void write_csv(std::ostream& os, const std::vector<std::string>& header, const Matrix& rows,
               const RunInfo* info = nullptr);

struct CsvData {
  std::vector<std::string> header;
  Matrix values;

  // Column by header name; throws DatasetError if absent.
  Vector column(const std::string& name) const;
};

// Numeric CSV with a header line; blank lines and lines starting with '#' are skipped.
CsvData read_csv(std::istream& is);
CsvData read_csv_file(const std::string& path);

}  // namespace imlike
