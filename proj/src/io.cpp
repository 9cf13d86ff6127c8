#include "curvflow/io.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "curvflow/error.hpp"

namespace curvflow::io {

namespace {

// Next non-empty, non-comment line; false at end of input.
bool next_line(std::istream& in, std::string& line, int& number) {
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

[[noreturn]] void fail(const std::string& name, const std::string& what, int line) {
  throw ValidationError(fmt::format("{}: {} at line {}", name, what, line));
}

void dump(const nlohmann::json& j, std::ostream& out, int indent) {
  const std::string pad(2 * (indent + 1), ' '), close(2 * indent, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad << nlohmann::json(it.key()).dump() << ": ";
        dump(it.value(), out, indent + 1);
      }
      out << "\n" << close << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ",\n";
        out << pad;
        dump(j[i], out, indent + 1);
      }
      out << "\n" << close << "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      out << (std::isfinite(x) ? format_double(x) : "null");
      return;
    }
    default:
      out << j.dump();
  }
}

}  // namespace

mesh::TriMesh parse_off(std::istream& in, const std::string& name) {
  std::string line;
  int number = 0;
  if (!next_line(in, line, number)) fail(name, "missing OFF header", number + 1);
  {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != "OFF") fail(name, "malformed header", number);
    std::string rest;
    if (ss >> rest) line = line.substr(line.find("OFF") + 3);
    else if (!next_line(in, line, number)) fail(name, "missing counts", number + 1);
  }
  long nv = -1, nf = -1, ne = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> nf) || nv < 0 || nf < 0) fail(name, "malformed counts", number);
    ss >> ne;
  }
  mesh::TriMesh m;
  m.vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    if (!next_line(in, line, number)) fail(name, "unexpected end of file", number + 1);
    std::istringstream ss(line);
    double x, y, z;
    if (!(ss >> x >> y >> z)) fail(name, "malformed vertex", number);
    m.vertices.emplace_back(x, y, z);
  }
  std::map<std::pair<int, int>, int> directed;
  for (long f = 0; f < nf; ++f) {
    if (!next_line(in, line, number)) fail(name, "unexpected end of file", number + 1);
    std::istringstream ss(line);
    int k = 0;
    if (!(ss >> k)) fail(name, "malformed face", number);
    if (k != 3) fail(name, "non-triangle face", number);
    std::array<int, 3> t{};
    if (!(ss >> t[0] >> t[1] >> t[2])) fail(name, "malformed face", number);
    for (int v : t) {
      if (v < 0 || v >= nv) fail(name, "vertex index out of range", number);
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) fail(name, "degenerate face", number);
    for (int e = 0; e < 3; ++e) {
      if (!directed.emplace(std::make_pair(t[e], t[(e + 1) % 3]), number).second) fail(name, "non-manifold edge", number);
    }
    m.faces.push_back(t);
  }
  for (const auto& [edge, at] : directed) {
    if (!directed.count({edge.second, edge.first})) fail(name, "non-manifold edge", at);
  }
  mesh::validate(m);
  return m;
}

mesh::TriMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return parse_off(in, path);
}

void write_off(const mesh::TriMesh& m, std::ostream& out) {
  out << "OFF\n" << m.vertices.size() << ' ' << m.faces.size() << " 0\n";
  for (const auto& v : m.vertices) out << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
  for (const auto& f : m.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void save_mesh(const mesh::TriMesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  write_off(m, out);
}

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> columns)
    : path_(path), columns_(std::move(columns)), out_(path) {
  if (!out_) throw ValidationError("cannot write " + path);
  for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_.size()) throw ValidationError("CSV row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
  out_ << '\n';
  out_.flush();
}

void CsvWriter::row(const std::string& label, const std::vector<double>& values) {
  if (values.size() + 1 != columns_.size()) throw ValidationError("CSV row width mismatch");
  out_ << label;
  for (double v : values) out_ << ',' << format_double(v);
  out_ << '\n';
  out_.flush();
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw ValidationError("no column named " + name);
}

std::vector<double> CsvTable::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r[c]);
  return v;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  CsvTable t;
  std::string line;
  int number = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  ++number;
  t.columns = split(line);
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.columns.size()) fail(path, "wrong number of cells", number);
    std::vector<double> row;
    bool numeric = true;
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
      if (!numeric) break;
    }
    if (!numeric) {
      if (row.empty()) continue;
      fail(path, "malformed number", number);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  dump(doc, out, 0);
  out << '\n';
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace curvflow::io
