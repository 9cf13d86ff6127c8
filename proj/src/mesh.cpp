#include "curvflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>

#include "curvflow/error.hpp"

namespace curvflow::mesh {

namespace {

constexpr double kPi = std::numbers::pi;

double cot(const Vec3& a, const Vec3& b) { return a.dot(b) / a.cross(b).norm(); }

}  // namespace

Topology validate(const TriMesh& m) {
  const int nv = static_cast<int>(m.vertices.size());
  std::map<std::pair<int, int>, int> directed;
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto& t = m.faces[f];
    for (int k = 0; k < 3; ++k) {
      if (t[k] < 0 || t[k] >= nv) throw ValidationError("face " + std::to_string(f) + " references a missing vertex");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw ValidationError("degenerate face " + std::to_string(f));
    for (int k = 0; k < 3; ++k) {
      if (++directed[{t[k], t[(k + 1) % 3]}] > 1) {
        throw ValidationError("non-manifold or non-orientable mesh: edge (" + std::to_string(t[k]) + ", " +
                              std::to_string(t[(k + 1) % 3]) + ") repeated with the same orientation");
      }
    }
  }
  for (const auto& [e, count] : directed) {
    if (!directed.contains({e.second, e.first})) {
      throw ValidationError("open mesh: boundary edge (" + std::to_string(e.first) + ", " + std::to_string(e.second) + ")");
    }
  }
  std::vector<char> used(nv, 0);
  for (const auto& t : m.faces) {
    for (int v : t) used[v] = 1;
  }
  if (std::find(used.begin(), used.end(), 0) != used.end()) throw ValidationError("mesh has isolated vertices");

  Topology top;
  top.vertices = nv;
  top.faces = static_cast<int>(m.faces.size());
  top.edges = static_cast<int>(directed.size() / 2);
  top.euler = top.vertices - top.edges + top.faces;
  if (top.euler > 2 || top.euler % 2 != 0) throw ValidationError("Euler characteristic does not match a connected closed surface");
  top.genus = 1 - top.euler / 2;
  return top;
}

VertexCurvatures mesh_curvatures(const TriMesh& m) {
  validate(m);
  const std::size_t nv = m.vertices.size();
  VertexCurvatures out;
  out.area.assign(nv, 0.0);
  out.angle_deficit.assign(nv, 2.0 * kPi);
  // Area gradient by the cotangent formula and volume gradient per vertex;
  // their ratio is the discrete mean curvature.
  std::vector<Vec3> area_grad(nv, Vec3::Zero()), volume_grad(nv, Vec3::Zero());
  for (const auto& t : m.faces) {
    const Vec3* p[3] = {&m.vertices[t[0]], &m.vertices[t[1]], &m.vertices[t[2]]};
    const double area = 0.5 * (*p[1] - *p[0]).cross(*p[2] - *p[0]).norm();
    double angle[3], cots[3];
    bool obtuse = false;
    for (int k = 0; k < 3; ++k) {
      const Vec3 a = *p[(k + 1) % 3] - *p[k], b = *p[(k + 2) % 3] - *p[k];
      angle[k] = std::atan2(a.cross(b).norm(), a.dot(b));
      cots[k] = cot(a, b);
      obtuse = obtuse || angle[k] > 0.5 * kPi;
    }
    for (int k = 0; k < 3; ++k) {
      const int i = t[k], j = t[(k + 1) % 3], l = t[(k + 2) % 3];
      out.angle_deficit[i] -= angle[k];
      volume_grad[i] += m.vertices[j].cross(m.vertices[l]) / 6.0;
      // Edge (i, j) is opposite vertex l.
      const Vec3 eij = m.vertices[i] - m.vertices[j];
      area_grad[i] += 0.5 * cots[(k + 2) % 3] * eij;
      area_grad[j] -= 0.5 * cots[(k + 2) % 3] * eij;
      if (obtuse) {
        out.area[i] += area / 3.0;
      } else {
        const Vec3 eil = m.vertices[i] - m.vertices[l];
        out.area[i] += (eij.squaredNorm() * cots[(k + 2) % 3] + eil.squaredNorm() * cots[(k + 1) % 3]) / 8.0;
      }
    }
  }
  out.mean.resize(nv);
  out.gauss.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    out.mean[i] = area_grad[i].dot(volume_grad[i]) / volume_grad[i].squaredNorm();
    out.gauss[i] = out.angle_deficit[i] / out.area[i];
  }
  return out;
}

double angle_deficit_sum(const TriMesh& m) {
  const auto c = mesh_curvatures(m);
  double s = 0.0;
  for (double d : c.angle_deficit) s += d;
  return s;
}

surface::GeometricReport mesh_report(const TriMesh& m) {
  const auto c = mesh_curvatures(m);
  surface::GeometricReport r;
  Vec3 moment = Vec3::Zero();
  for (const auto& t : m.faces) {
    const Vec3 &a = m.vertices[t[0]], &b = m.vertices[t[1]], &d = m.vertices[t[2]];
    r.perimeter += 0.5 * (b - a).cross(d - a).norm();
    const double v = a.dot(b.cross(d)) / 6.0;
    r.volume += v;
    moment += v * (a + b + d) / 4.0;
  }
  r.volume_divergence = r.volume;
  r.barycenter = moment / r.volume;
  double total_area = 0.0, int_h = 0.0;
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    const double a = c.area[i], h = c.mean[i];
    total_area += a;
    int_h += a * h;
    r.mean_curvature_sq += a * h * h;
    r.total_gauss_curvature += c.angle_deficit[i];
    r.traceless_energy += a * std::max(0.5 * h * h - 2.0 * c.gauss[i], 0.0);
  }
  r.mean_curvature_avg = int_h / total_area;
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    const double dh = c.mean[i] - r.mean_curvature_avg;
    r.oscillation += c.area[i] * dh * dh;
  }
  r.willmore = 0.25 * r.mean_curvature_sq;
  double d2 = 0.0;
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < m.vertices.size(); ++j) d2 = std::max(d2, (m.vertices[i] - m.vertices[j]).squaredNorm());
  }
  r.diameter = std::sqrt(d2);
  return r;
}

TriMesh icosphere(int subdivisions) {
  if (subdivisions < 0 || subdivisions > 8) throw ValidationError("subdivision level out of range");
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  m.vertices = {{-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0}, {0, -1, g}, {0, 1, g},
                {0, -1, -g}, {0, 1, -g}, {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1}};
  for (auto& v : m.vertices) v.normalize();
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      const int id = static_cast<int>(m.vertices.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> faces;
    faces.reserve(m.faces.size() * 4);
    for (const auto& t : m.faces) {
      const int a = mid(t[0], t[1]), b = mid(t[1], t[2]), c = mid(t[2], t[0]);
      faces.push_back({t[0], a, c});
      faces.push_back({t[1], b, a});
      faces.push_back({t[2], c, b});
      faces.push_back({a, b, c});
    }
    m.faces = std::move(faces);
  }
  return m;
}

TriMesh torus(double R, double r, int nu, int nv) {
  if (!(R > r && r > 0.0) || nu < 3 || nv < 3) throw ValidationError("invalid torus parameters");
  TriMesh m;
  for (int i = 0; i < nu; ++i) {
    const double u = 2.0 * kPi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double v = 2.0 * kPi * j / nv;
      m.vertices.push_back({(R + r * std::cos(v)) * std::cos(u), (R + r * std::cos(v)) * std::sin(u), r * std::sin(v)});
    }
  }
  auto id = [&](int i, int j) { return ((i + nu) % nu) * nv + (j + nv) % nv; };
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return m;
}

}  // namespace curvflow::mesh
