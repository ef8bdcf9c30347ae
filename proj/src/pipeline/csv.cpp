#include "vidssm/csv.hpp"

#include "vidssm/errors.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace vidssm {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

Eigen::Index CsvTable::column_index(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InputError("CSV has no column '" + name + "'");
  return static_cast<Eigen::Index>(it - header.begin());
}

Eigen::VectorXd CsvTable::column(const std::string& name) const {
  return rows.col(column_index(name));
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InputError("CSV is empty");
  t.header = split(line);
  std::vector<std::vector<double>> records;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw InputError("CSV line " + std::to_string(lineno) + " has " +
                       std::to_string(cells.size()) + " fields, expected " +
                       std::to_string(t.header.size()));
    std::vector<double> rec;
    rec.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        rec.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw InputError("CSV line " + std::to_string(lineno) + ": bad number '" + c + "'");
      }
    }
    records.push_back(std::move(rec));
  }
  t.rows.resize(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < records.size(); ++i)
    for (std::size_t j = 0; j < records[i].size(); ++j) t.rows(i, j) = records[i][j];
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_csv(in);
}

void write_csv(std::ostream& out, const CsvTable& t) {
  for (std::size_t j = 0; j < t.header.size(); ++j) out << (j ? "," : "") << t.header[j];
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < t.rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.rows.cols(); ++j) out << (j ? "," : "") << t.rows(i, j);
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const CsvTable& t) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  write_csv(out, t);
}

}  // namespace vidssm
