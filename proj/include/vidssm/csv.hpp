#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace vidssm {

/// Numeric CSV: one header row, `,` delimiter, `.` decimals, LF endings.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd rows;  // one row per record

  bool has_column(const std::string& name) const;
  Eigen::Index column_index(const std::string& name) const;
  Eigen::VectorXd column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);
/// Values are written with 17 significant digits.
void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

}  // namespace vidssm
