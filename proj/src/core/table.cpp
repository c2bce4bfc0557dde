#include "core/table.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace floqep {

void ResultTable::add_row(std::vector<cplx> row) {
  if (row.size() != columns.size())
    fail(Errc::invalid_argument, "result table: row width does not match the schema");
  rows.push_back(std::move(row));
}

int ResultTable::csv_width() const {
  int w = 0;
  for (const auto& c : columns) w += (c.type == ColType::cplx) ? 2 : 1;
  return w;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_csv(const ResultTable& t, std::ostream& out) {
  out << "# floqep " << (t.tool_version.empty() ? version() : t.tool_version);
  if (!t.config_hash.empty()) out << " config_hash=" << t.config_hash;
  out << "\n";
  bool first = true;
  for (const auto& c : t.columns) {
    if (c.type == ResultTable::ColType::cplx) {
      out << (first ? "" : ",") << csv_quote(c.name + ".re") << "," << csv_quote(c.name + ".im");
    } else {
      out << (first ? "" : ",") << csv_quote(c.name);
    }
    first = false;
  }
  out << "\n";
  for (const auto& row : t.rows) {
    first = true;
    for (std::size_t k = 0; k < t.columns.size(); ++k) {
      if (!first) out << ",";
      first = false;
      switch (t.columns[k].type) {
        case ResultTable::ColType::integer:
          out << static_cast<long long>(std::llround(row[k].real()));
          break;
        case ResultTable::ColType::real:
          out << format_g17(row[k].real());
          break;
        case ResultTable::ColType::cplx:
          out << format_g17(row[k].real()) << "," << format_g17(row[k].imag());
          break;
      }
    }
    out << "\n";
  }
}

void write_csv_file(const ResultTable& t, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::io, "cannot open for writing: " + path);
  write_csv(t, f);
  if (!f.good()) fail(Errc::io, "write failed: " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

CsvData read_csv(std::istream& in) {
  CsvData d;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      d.comment = line;
      continue;
    }
    d.header = split_csv_line(line);
    break;
  }
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(std::stod(c));
    d.rows.push_back(std::move(row));
  }
  return d;
}

CsvData read_csv_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::io, "cannot open: " + path);
  return read_csv(f);
}

}  // namespace floqep
