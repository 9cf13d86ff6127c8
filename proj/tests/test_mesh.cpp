#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "curvflow/error.hpp"
#include "curvflow/mesh.hpp"

using namespace curvflow;
using namespace curvflow::mesh;

namespace {
constexpr double kPi = std::numbers::pi;

TriMesh octahedron() {
  TriMesh m;
  m.vertices = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  m.faces = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4}, {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  return m;
}
}  // namespace

TEST_CASE("icosphere topology and Gauss-Bonnet") {
  const auto m = icosphere(4);
  const auto top = validate(m);
  CHECK(top.vertices == 2562);
  CHECK(top.faces == 5120);
  CHECK(top.euler == 2);
  CHECK(top.genus == 0);
  CHECK(std::abs(angle_deficit_sum(m) - 4 * kPi) < 1e-9);
  const auto r = mesh_report(m);
  CHECK(r.willmore >= 4 * kPi);
  CHECK(r.willmore <= 4 * kPi * 1.01);
  CHECK(std::abs(r.volume - 4 * kPi / 3) < 1e-2);
  CHECK(std::abs(r.mean_curvature_avg - 2.0) < 1e-2);
  CHECK(r.barycenter.norm() < 1e-12);
  CHECK(std::abs(r.diameter - 2.0) < 1e-12);
}

TEST_CASE("Willmore energy converges under refinement") {
  double prev = 1e300;
  for (int s = 1; s <= 4; ++s) {
    const double dev = std::abs(mesh_report(icosphere(s)).willmore - 4 * kPi);
    CHECK(dev < prev);
    prev = dev;
  }
}

TEST_CASE("torus is genus one with zero total curvature") {
  const double R = 2.0, r = 0.7;
  const auto m = torus(R, r, 64, 32);
  const auto top = validate(m);
  CHECK(top.euler == 0);
  CHECK(top.genus == 1);
  CHECK(std::abs(angle_deficit_sum(m)) < 1e-9);
  // Integral of H over the torus of revolution is 4 pi^2 R.
  const auto c = mesh_curvatures(m);
  double int_h = 0.0;
  for (std::size_t i = 0; i < m.vertices.size(); ++i) int_h += c.area[i] * c.mean[i];
  CHECK(std::abs(int_h - 4 * kPi * kPi * R) / (4 * kPi * kPi * R) < 1e-2);
  CHECK(mesh_report(m).volume > 0.0);
  CHECK(std::abs(mesh_report(m).volume - 2 * kPi * kPi * R * r * r) / (2 * kPi * kPi * R * r * r) < 1e-2);
}

TEST_CASE("octahedron Euler characteristic") {
  const auto top = validate(octahedron());
  CHECK(top.euler == 2);
  CHECK(top.genus == 0);
  CHECK(top.edges == 12);
  CHECK(std::abs(angle_deficit_sum(octahedron()) - 4 * kPi) < 1e-12);
}

TEST_CASE("invalid meshes are rejected") {
  auto open = octahedron();
  open.faces.pop_back();
  CHECK_THROWS_AS(validate(open), ValidationError);
  auto flipped = octahedron();
  std::swap(flipped.faces[0][0], flipped.faces[0][1]);
  CHECK_THROWS_AS(validate(flipped), ValidationError);
  auto bad = octahedron();
  bad.faces[0][0] = 17;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  CHECK_THROWS_AS(mesh_curvatures(open), ValidationError);
}
