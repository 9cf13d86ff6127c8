#pragma once

// File formats: OFF meshes, CSV tables and JSON documents. Floats are written
// with 17 significant digits.

#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvflow/mesh.hpp"

namespace curvflow::io {

/// Parses ASCII OFF (`OFF`, `V F E`, vertices, `3 i j k` faces) and checks
/// that the result is a closed, oriented, edge-manifold triangle mesh. Errors
/// are ValidationErrors naming the offending line.
mesh::TriMesh parse_off(std::istream& in, const std::string& name = "<input>");
mesh::TriMesh load_mesh(const std::string& path);
void write_off(const mesh::TriMesh& m, std::ostream& out);
void save_mesh(const mesh::TriMesh& m, const std::string& path);

std::string format_double(double x);

/// Row-by-row CSV output with a fixed header.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> columns);
  void row(const std::vector<double>& values);
  /// Row whose first cell is a label; the remaining cells are numbers.
  void row(const std::string& label, const std::vector<double>& values);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::vector<std::string> columns_;
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Index of a column; throws ValidationError when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

/// Reads a numeric CSV with a header row. Rows whose first cell is not a
/// number (summary rows) are skipped.
CsvTable read_csv(const std::string& path);

void write_json(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::string& path);

}  // namespace curvflow::io
