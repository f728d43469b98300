#include "gslope/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gslope {

namespace {

std::vector<std::vector<std::string>> parse_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, field_started = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (record.size() > 1 || !record[0].empty()) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started) {
          quoted = true;
          field_started = true;
        } else {
          field += c;  // stray quote inside unquoted field, keep literal
        }
        break;
      case ',': end_field(); field_started = false; break;
      case '\r': break;
      case '\n': end_record(); break;
      default: field += c; field_started = true; break;
    }
  }
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  auto records = parse_records(buf.str());
  if (records.empty()) throw std::runtime_error(path + ": missing header row");
  CsvTable t;
  t.header = std::move(records.front());
  t.rows.assign(records.begin() + 1, records.end());
  for (const auto& row : t.rows)
    if (row.size() != t.header.size())
      throw std::runtime_error(path + ": ragged row (expected " +
                               std::to_string(t.header.size()) + " fields)");
  return t;
}

Eigen::MatrixXd table_to_matrix(const CsvTable& table) {
  const auto rows = static_cast<Eigen::Index>(table.rows.size());
  const auto cols = static_cast<Eigen::Index>(table.header.size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const std::string& f = table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      try {
        std::size_t used = 0;
        m(i, j) = std::stod(f, &used);
        if (used != f.size()) throw std::invalid_argument(f);
      } catch (const std::exception&) {
        throw std::runtime_error("not a number in CSV: '" + f + "'");
      }
    }
  }
  return m;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  auto emit = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string& f = fields[i];
      if (i) out << ',';
      if (f.find_first_of(",\"\r\n") != std::string::npos) {
        out << '"';
        for (char c : f) {
          if (c == '"') out << '"';
          out << c;
        }
        out << '"';
      } else {
        out << f;
      }
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(out, header, rows);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace gslope
