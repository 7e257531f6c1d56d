#include "imlike/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace imlike {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.10g", value);
  return buffer;
}

std::string provenance_comment(const RunInfo& info) {
  std::string cmd = info.command_line;
  std::replace(cmd.begin(), cmd.end(), '\n', ' ');
  return "# imlike " IMLIKE_VERSION " | command: " + cmd + " | seed: " + std::to_string(info.seed);
}

void write_csv(std::ostream& os, const std::vector<std::string>& header, const Matrix& rows,
               const RunInfo* info) {
  if (!header.empty() && static_cast<Index>(header.size()) != rows.cols() && rows.rows() > 0)
    throw InvalidParameter("write_csv: header width does not match rows");
  if (info) os << provenance_comment(*info) << '\n';
  for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
  os << '\n';
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index j = 0; j < rows.cols(); ++j) os << (j ? "," : "") << format_number(rows(i, j));
    os << '\n';
  }
}

Vector CsvData::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DatasetError("csv: missing column '" + name + "'");
  return values.col(it - header.begin());
}

CsvData read_csv(std::istream& is) {
  CsvData data;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto cells = split(t);
    if (data.header.empty()) {
      data.header = std::move(cells);
      continue;
    }
    if (cells.size() != data.header.size())
      throw DatasetError("csv: line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                         " fields, expected " + std::to_string(data.header.size()));
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw DatasetError("csv: line " + std::to_string(line_no) + ": not a number: '" + c + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (data.header.empty()) throw DatasetError("csv: no header line");
  data.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(data.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) data.values(i, j) = rows[i][j];
  return data;
}

CsvData read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace imlike
