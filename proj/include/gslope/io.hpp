#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <string>
#include <vector>

namespace gslope {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// RFC-4180 reader: quoted fields, "" escapes, CRLF or LF line ends. The first
// record is the header.
CsvTable read_csv(const std::string& path);

Eigen::MatrixXd table_to_matrix(const CsvTable& table);

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace gslope
