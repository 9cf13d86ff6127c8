#pragma once

// Closed oriented triangle meshes: topology checks and discrete curvature
// diagnostics.

#include <array>
#include <vector>

#include "curvflow/surface.hpp"

namespace curvflow::mesh {

using s2::Vec3;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

struct Topology {
  int vertices = 0, edges = 0, faces = 0;
  int euler = 0;
  int genus = 0;
};

/// Checks closedness, orientability and edge-manifoldness. Throws
/// ValidationError otherwise.
Topology validate(const TriMesh& m);

/// Per-vertex quantities. `area` is the mixed Voronoi area, `mean` the signed
/// mean curvature H = k1 + k2 (positive on convex parts) and `gauss` the
/// angle deficit divided by the area.
struct VertexCurvatures {
  std::vector<double> area, angle_deficit, mean, gauss;
};
VertexCurvatures mesh_curvatures(const TriMesh& m);

/// Sum of vertex angle deficits; equals 2 pi chi for closed meshes.
double angle_deficit_sum(const TriMesh& m);

surface::GeometricReport mesh_report(const TriMesh& m);

/// Unit icosphere with 20 * 4^subdivisions faces.
TriMesh icosphere(int subdivisions);
/// Genus-one torus of revolution about the z axis.
TriMesh torus(double major_radius, double minor_radius, int n_major, int n_minor);

}  // namespace curvflow::mesh
