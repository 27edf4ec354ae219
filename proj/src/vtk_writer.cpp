#include "lps/vtk_writer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace lps {

namespace {

// Buckets of cell ids per structured grid square/subcube, keyed by the cell
// centroid. Point location then only probes the handful of simplices that
// subdivide one square.
struct CellLocator {
  const SimplicialMesh* mesh;
  int n;  // grid squares per side
  std::vector<std::vector<int>> buckets;

  explicit CellLocator(const SimplicialMesh& m) : mesh(&m) {
    const int per_square = m.dim == 2 ? 2 : 6;
    n = static_cast<int>(std::lround(
        std::pow(static_cast<double>(m.n_cells()) / per_square, 1.0 / m.dim)));
    if (n < 1) throw std::runtime_error("cell locator: unstructured cell count");
    buckets.resize(static_cast<std::size_t>(std::pow(n, m.dim)));
    for (std::size_t c = 0; c < m.n_cells(); ++c) {
      Vec3 centroid = Vec3::Zero();
      for (int k = 0; k < m.vertices_per_cell(); ++k)
        centroid += m.cell_vertex(static_cast<int>(c), k);
      centroid /= m.vertices_per_cell();
      buckets[bucket_of(centroid)].push_back(static_cast<int>(c));
    }
  }

  std::size_t bucket_of(const Vec3& x) const {
    std::size_t id = 0;
    for (int d = mesh->dim - 1; d >= 0; --d) {
      int i = std::clamp(static_cast<int>(std::floor(x[d] * n)), 0, n - 1);
      id = id * n + i;
    }
    return id;
  }

  // Containing cell and its reference coordinates; tolerant at facets.
  std::pair<int, Vec3> locate(const Vec3& x) const {
    const double tol = 1e-10;
    for (int cell : buckets[bucket_of(x)]) {
      Vec3 ref = mesh->cell_maps[cell].to_reference(x);
      double bary0 = 1.0 - ref[0] - ref[1] - (mesh->dim == 3 ? ref[2] : 0.0);
      if (ref[0] >= -tol && ref[1] >= -tol &&
          (mesh->dim == 2 || ref[2] >= -tol) && bary0 >= -tol)
        return {cell, ref};
    }
    throw std::runtime_error("cell locator: point outside every candidate cell");
  }
};

void write_real(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

FieldDump sample_field(const Eigen::VectorXd& solution, const SimplicialMesh& mesh,
                       const FeSpace& space, int samples_per_side) {
  if (samples_per_side < 1)
    throw std::invalid_argument("sample_field: need at least one sample cell");
  FieldDump dump;
  dump.dim = mesh.dim;
  dump.samples_per_side = samples_per_side;
  CellLocator locator(mesh);

  const int m = samples_per_side + 1;
  const int nz = mesh.dim == 3 ? m : 1;
  dump.points.reserve(static_cast<std::size_t>(m) * m * nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        dump.points.emplace_back(static_cast<double>(i) / samples_per_side,
                                 static_cast<double>(j) / samples_per_side,
                                 mesh.dim == 3
                                     ? static_cast<double>(k) / samples_per_side
                                     : 0.0);

  dump.values.reserve(dump.points.size());
  dump.component.reserve(dump.points.size());
  for (const Vec3& p : dump.points) {
    auto [cell, ref] = locator.locate(p);
    Vec3 v = space.eval(solution, cell, ref);
    dump.values.push_back(v);
    dump.component.push_back(v[0]);
  }
  auto [lo, hi] = std::minmax_element(dump.component.begin(), dump.component.end());
  dump.min_value = *lo;
  dump.max_value = *hi;
  set_reference_range(dump, dump.min_value, dump.max_value);
  return dump;
}

void set_reference_range(FieldDump& dump, double ref_min, double ref_max) {
  dump.ref_min = ref_min;
  dump.ref_max = ref_max;
  dump.overshoot = std::max(0.0, dump.max_value - ref_max);
  dump.undershoot = std::max(0.0, ref_min - dump.min_value);
}

void write_vtk(const FieldDump& dump, const std::string& field_name,
               std::ostream& os) {
  os << "# vtk DataFile Version 3.0\n";
  os << "lattice sample of " << field_name << "\n";
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";

  os << "POINTS " << dump.points.size() << " double\n";
  for (const Vec3& p : dump.points) {
    write_real(os, p[0]);
    os << ' ';
    write_real(os, p[1]);
    os << ' ';
    write_real(os, p[2]);
    os << '\n';
  }

  const int s = dump.samples_per_side;
  const int m = s + 1;
  auto pid2 = [m](int i, int j) { return j * m + i; };
  auto pid3 = [m](int i, int j, int k) { return (k * m + j) * m + i; };
  if (dump.dim == 2) {
    const long nc = static_cast<long>(s) * s;
    os << "CELLS " << nc << ' ' << 5 * nc << '\n';
    for (int j = 0; j < s; ++j)
      for (int i = 0; i < s; ++i)
        os << "4 " << pid2(i, j) << ' ' << pid2(i + 1, j) << ' '
           << pid2(i + 1, j + 1) << ' ' << pid2(i, j + 1) << '\n';
    os << "CELL_TYPES " << nc << '\n';
    for (long c = 0; c < nc; ++c) os << "9\n";  // VTK_QUAD
  } else {
    const long nc = static_cast<long>(s) * s * s;
    os << "CELLS " << nc << ' ' << 9 * nc << '\n';
    for (int k = 0; k < s; ++k)
      for (int j = 0; j < s; ++j)
        for (int i = 0; i < s; ++i)
          os << "8 " << pid3(i, j, k) << ' ' << pid3(i + 1, j, k) << ' '
             << pid3(i + 1, j + 1, k) << ' ' << pid3(i, j + 1, k) << ' '
             << pid3(i, j, k + 1) << ' ' << pid3(i + 1, j, k + 1) << ' '
             << pid3(i + 1, j + 1, k + 1) << ' ' << pid3(i, j + 1, k + 1)
             << '\n';
    os << "CELL_TYPES " << nc << '\n';
    for (long c = 0; c < nc; ++c) os << "12\n";  // VTK_HEXAHEDRON
  }

  os << "POINT_DATA " << dump.points.size() << '\n';
  os << "SCALARS " << field_name << "_x double 1\nLOOKUP_TABLE default\n";
  for (double v : dump.component) {
    write_real(os, v);
    os << '\n';
  }
  os << "VECTORS " << field_name << " double\n";
  for (const Vec3& v : dump.values) {
    write_real(os, v[0]);
    os << ' ';
    write_real(os, v[1]);
    os << ' ';
    write_real(os, v[2]);
    os << '\n';
  }
}

void write_mesh_vtk(const SimplicialMesh& mesh, std::ostream& os) {
  os << "# vtk DataFile Version 3.0\n";
  os << "simplicial mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.vertices.size() << " double\n";
  for (const Vec3& p : mesh.vertices) {
    write_real(os, p[0]);
    os << ' ';
    write_real(os, p[1]);
    os << ' ';
    write_real(os, p[2]);
    os << '\n';
  }
  const int vpc = mesh.vertices_per_cell();
  os << "CELLS " << mesh.n_cells() << ' ' << (vpc + 1) * mesh.n_cells() << '\n';
  for (const auto& cell : mesh.cells) {
    os << vpc;
    for (int k = 0; k < vpc; ++k) os << ' ' << cell[k];
    os << '\n';
  }
  os << "CELL_TYPES " << mesh.n_cells() << '\n';
  for (std::size_t c = 0; c < mesh.n_cells(); ++c)
    os << (mesh.dim == 2 ? "5\n" : "10\n");  // VTK_TRIANGLE / VTK_TETRA
}

}  // namespace lps
