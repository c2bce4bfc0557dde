#ifndef FLOQEP_CORE_TABLE_HPP
#define FLOQEP_CORE_TABLE_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace floqep {

/// Rectangular result table. Complex columns are emitted as paired
/// <name>.re / <name>.im CSV columns; 17 significant digits throughout.
struct ResultTable {
  enum class ColType { real, integer, cplx };
  struct Column {
    std::string name;
    ColType type = ColType::real;
  };

  std::vector<Column> columns;
  std::vector<std::vector<cplx>> rows;  // integers/reals stored in the real part
  std::string config_hash;
  std::string tool_version;
  std::string created_at;  // in-memory only; never serialized (reruns stay bit-identical)

  ResultTable() = default;
  explicit ResultTable(std::vector<Column> cols) : columns(std::move(cols)) {}

  void add_row(std::vector<cplx> row);
  int csv_width() const;
};

void write_csv(const ResultTable& t, std::ostream& out);
void write_csv_file(const ResultTable& t, const std::string& path);

/// Raw CSV read-back (header + numeric cells); used by round-trip checks.
struct CsvData {
  std::string comment;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvData read_csv(std::istream& in);
CsvData read_csv_file(const std::string& path);

std::string format_g17(double v);

}  // namespace floqep

#endif
