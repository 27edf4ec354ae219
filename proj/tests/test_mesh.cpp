#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lps/mesh.hpp"

#include <cmath>
#include <set>

using namespace lps;

TEST_CASE("structured mesh entity counts") {
  SimplicialMesh m22 = build_structured_mesh(2, 2);
  CHECK(m22.vertices.size() == 9);
  CHECK(m22.n_cells() == 8);

  SimplicialMesh m31 = build_structured_mesh(3, 1);
  CHECK(m31.vertices.size() == 8);
  CHECK(m31.n_cells() == 6);

  SimplicialMesh m24 = build_structured_mesh(2, 4);
  CHECK(m24.vertices.size() == 25);
  CHECK(m24.n_cells() == 32);
  CHECK(m24.n_edges() == 56);  // Euler: 25 - 56 + 32 = 1

  CHECK_THROWS_AS((void)build_structured_mesh(2, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)build_structured_mesh(4, 1), std::invalid_argument);
}

TEST_CASE("construction is deterministic") {
  for (int dim : {2, 3}) {
    SimplicialMesh a = build_structured_mesh(dim, 3);
    SimplicialMesh b = build_structured_mesh(dim, 3);
    REQUIRE(a.vertices.size() == b.vertices.size());
    for (std::size_t i = 0; i < a.vertices.size(); ++i)
      CHECK(a.vertices[i] == b.vertices[i]);
    CHECK(a.cells == b.cells);
    CHECK(a.facets == b.facets);
    CHECK(a.facet_cells == b.facet_cells);
  }
}

TEST_CASE("cell volumes tile the domain and maps are positively oriented") {
  for (int dim : {2, 3}) {
    SimplicialMesh mesh = build_structured_mesh(dim, dim == 2 ? 5 : 3);
    double total = 0;
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
      CHECK(mesh.cell_maps[c].det > 0);
      total += mesh.cell_volume(static_cast<int>(c));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(shape_regularity(mesh) < 20.0);
  }
}

TEST_CASE("boundary facet normals point out of the unit domain") {
  for (int dim : {2, 3}) {
    SimplicialMesh mesh = build_structured_mesh(dim, 2);
    for (std::size_t f = 0; f < mesh.n_facets(); ++f) {
      if (!mesh.facet_on_boundary(static_cast<int>(f))) continue;
      Vec3 centroid = Vec3::Zero();
      for (int k = 0; k < dim; ++k) centroid += mesh.vertices[mesh.facets[f][k]];
      centroid /= dim;
      // stepping outward along the normal must leave [0,1]^dim
      Vec3 outside = centroid + 1e-3 * mesh.facet_normals[f];
      bool left = false;
      for (int d = 0; d < dim; ++d)
        left = left || outside[d] < 0 || outside[d] > 1;
      CHECK(left);
    }
  }
}

TEST_CASE("facet geometry on hand-checked facets") {
  SimplicialMesh mesh = build_structured_mesh(2, 1);
  int bottom = -1, diagonal = -1;
  for (std::size_t f = 0; f < mesh.n_facets(); ++f) {
    Vec3 a = mesh.vertices[mesh.facets[f][0]];
    Vec3 b = mesh.vertices[mesh.facets[f][1]];
    if (a[1] == 0 && b[1] == 0) bottom = static_cast<int>(f);
    if (!mesh.facet_on_boundary(static_cast<int>(f))) diagonal = static_cast<int>(f);
  }
  REQUIRE(bottom >= 0);
  FacetGeometry g = facet_geometry(mesh, bottom);
  CHECK(g.area == doctest::Approx(1.0));
  CHECK(g.normal[0] == doctest::Approx(0.0));
  CHECK(g.normal[1] == doctest::Approx(-1.0));
  CHECK(g.adjacent_cells[1] == -1);

  REQUIRE(diagonal >= 0);
  FacetGeometry d = facet_geometry(mesh, diagonal);
  CHECK(d.area == doctest::Approx(std::sqrt(2.0)));
  CHECK(d.adjacent_cells[0] >= 0);
  CHECK(d.adjacent_cells[1] >= 0);

  CHECK_THROWS((void)facet_geometry(mesh, 999));

  SimplicialMesh cube = build_structured_mesh(3, 1);
  for (std::size_t f = 0; f < cube.n_facets(); ++f) {
    bool on_floor = true;
    for (int k = 0; k < 3; ++k)
      on_floor = on_floor && cube.vertices[cube.facets[f][k]][2] == 0;
    if (!on_floor) continue;
    FacetGeometry fg = facet_geometry(cube, static_cast<int>(f));
    CHECK(fg.area == doctest::Approx(0.5));
    CHECK(std::abs(fg.normal[2]) == doctest::Approx(1.0));
  }
}

TEST_CASE("facet quadrature weights sum to the facet area") {
  for (int dim : {2, 3}) {
    SimplicialMesh mesh = build_structured_mesh(dim, 2);
    for (int f : {0, 3, static_cast<int>(mesh.n_facets()) - 1}) {
      FacetQuadrature fq = facet_quadrature(mesh, f, 4);
      double sum = 0;
      for (double w : fq.weights) sum += w;
      CHECK(sum == doctest::Approx(mesh.facet_areas[f]).epsilon(1e-13));
      // points lie on the facet plane
      Vec3 a = mesh.vertices[mesh.facets[f][0]];
      for (const Vec3& p : fq.points)
        CHECK(std::abs(mesh.facet_normals[f].dot(p - a)) < 1e-13);
    }
  }
}

TEST_CASE("boundary classification partitions the boundary by the flux sign") {
  SimplicialMesh mesh = build_structured_mesh(2, 4);
  auto right = [](const Vec3&) { return Vec3(1, 0, 0); };
  BoundaryClassification bc = classify_boundary(mesh, right);
  std::size_t n_boundary = 0;
  for (std::size_t f = 0; f < mesh.n_facets(); ++f)
    if (mesh.facet_on_boundary(static_cast<int>(f))) ++n_boundary;
  CHECK(bc.inflow_facets.size() + bc.outflow_facets.size() == n_boundary);
  CHECK(bc.inflow_facets.size() == 4);  // the left edge
  for (int f : bc.inflow_facets) {
    Vec3 a = mesh.vertices[mesh.facets[f][0]];
    CHECK(a[0] == doctest::Approx(0.0));
  }

  // beta = 0: no inflow anywhere (characteristic facets count as outflow)
  auto zero = [](const Vec3&) { return Vec3::Zero(); };
  BoundaryClassification bz = classify_boundary(mesh, zero);
  CHECK(bz.inflow_facets.empty());
  CHECK(bz.outflow_facets.size() == n_boundary);

  // tangential flow along the bottom edge is characteristic, hence outflow
  auto tang = [](const Vec3&) { return Vec3(1, 0, 0); };
  for (int f : classify_boundary(mesh, tang).outflow_facets) {
    (void)f;  // partition already checked; membership is what matters
  }
}

TEST_CASE("signed facet flux integral") {
  SimplicialMesh mesh = build_structured_mesh(2, 2);
  auto right = [](const Vec3&) { return Vec3(1, 0, 0); };
  for (std::size_t f = 0; f < mesh.n_facets(); ++f) {
    if (!mesh.facet_on_boundary(static_cast<int>(f))) continue;
    Vec3 a = mesh.vertices[mesh.facets[f][0]];
    Vec3 b = mesh.vertices[mesh.facets[f][1]];
    double integral = facet_beta_normal_integral(mesh, static_cast<int>(f), right, 4);
    if (a[0] == 1 && b[0] == 1) CHECK(integral == doctest::Approx(0.5));
    if (a[0] == 0 && b[0] == 0) CHECK(integral == doctest::Approx(-0.5));
    if (a[1] == b[1]) CHECK(integral == doctest::Approx(0.0));
  }
}

TEST_CASE("local facet and edge bookkeeping is consistent") {
  for (int dim : {2, 3}) {
    SimplicialMesh mesh = build_structured_mesh(dim, 2);
    for (std::size_t c = 0; c < mesh.n_cells(); ++c)
      for (int k = 0; k <= dim; ++k) {
        int f = mesh.cell_facets[c][k];
        REQUIRE(f >= 0);
        // facet tuple = cell tuple minus vertex k
        std::set<int> expect;
        for (int j = 0; j <= dim; ++j)
          if (j != k) expect.insert(mesh.cells[c][j]);
        std::set<int> got;
        for (int j = 0; j < dim; ++j) got.insert(mesh.facets[f][j]);
        CHECK(expect == got);
        // the facet lists this cell as one of its neighbors
        CHECK((mesh.facet_cells[f][0] == static_cast<int>(c) ||
               mesh.facet_cells[f][1] == static_cast<int>(c)));
      }
    // Euler characteristic of a ball is 1 in either dimension.
    long euler = static_cast<long>(mesh.vertices.size()) -
                 static_cast<long>(mesh.n_edges()) +
                 static_cast<long>(mesh.n_cells());
    if (dim == 3)
      euler += static_cast<long>(mesh.n_facets()) - 2 * mesh.n_cells();
    CHECK(euler == 1);
  }
}
