#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lps/fe_space.hpp"

#include <cmath>
#include <random>

using namespace lps;

namespace {

// Random polynomial field in [P_r]^dim with a fixed seed.
VectorPoly random_poly_field(int r, int dim, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> coef(-1, 1);
  VectorPoly f;
  for (int c = 0; c < dim; ++c)
    for (const auto& e : monomial_exponents(dim, r))
      f.comp[c] += Polynomial::monomial(e, coef(gen));
  return f;
}

}  // namespace

TEST_CASE("reference basis sizes span the full polynomial space") {
  CHECK(reference_basis(FieldKind::div, 1, 2).functions.size() == 6);
  CHECK(reference_basis(FieldKind::curl, 1, 3).functions.size() == 12);
  CHECK(reference_basis(FieldKind::div, 2, 2).functions.size() == 12);
  CHECK(reference_basis(FieldKind::curl, 3, 2).functions.size() == 20);
  CHECK_THROWS((void)reference_basis(FieldKind::div, 0, 2));
  CHECK_THROWS((void)bubble_basis(FieldKind::curl, 0, 2));
}

TEST_CASE("global dof counts") {
  SimplicialMesh mesh2 = build_structured_mesh(2, 1);  // 2 cells, 5 edges
  CHECK(FeSpace(mesh2, FieldKind::div, 1, false).n_dofs() == 10);
  CHECK(FeSpace(mesh2, FieldKind::div, 1, true).n_dofs() == 14);
  CHECK(FeSpace(mesh2, FieldKind::curl, 1, false).n_dofs() == 10);

  // net enrichment per cell: 2 (r=1), 4 (r=2) in 2D; 3 (r=1) in 3D
  SimplicialMesh mesh4 = build_structured_mesh(2, 2);
  for (FieldKind kind : {FieldKind::curl, FieldKind::div}) {
    int plain1 = FeSpace(mesh4, kind, 1, false).n_dofs();
    CHECK(FeSpace(mesh4, kind, 1, true).n_dofs() ==
          plain1 + 2 * static_cast<int>(mesh4.n_cells()));
    int plain2 = FeSpace(mesh4, kind, 2, false).n_dofs();
    CHECK(FeSpace(mesh4, kind, 2, true).n_dofs() ==
          plain2 + 4 * static_cast<int>(mesh4.n_cells()));
  }

  SimplicialMesh mesh3 = build_structured_mesh(3, 1);
  FeSpace curl3(mesh3, FieldKind::curl, 1, true);
  CHECK(curl3.n_dofs() ==
        2 * static_cast<int>(mesh3.n_edges()) + 3 * static_cast<int>(mesh3.n_cells()));
}

TEST_CASE("canonical interpolant reproduces the polynomial space") {
  for (int dim : {2, 3})
    for (FieldKind kind : {FieldKind::curl, FieldKind::div})
      for (int r = 1; r <= (dim == 2 ? 3 : 2); ++r) {
        SimplicialMesh mesh = build_structured_mesh(dim, 2);
        FeSpace space(mesh, kind, r, true);
        VectorPoly f = random_poly_field(r, dim, 7u + r + dim);
        Eigen::VectorXd u =
            space.interpolate([&](const Vec3& x) { return f.value(x); });
        std::mt19937 gen(11);
        std::uniform_real_distribution<double> pt(0.05, 0.3);
        for (int c : {0, static_cast<int>(mesh.n_cells()) - 1})
          for (int trial = 0; trial < 4; ++trial) {
            Vec3 xref(pt(gen), pt(gen), dim == 3 ? pt(gen) : 0.0);
            Vec3 x = mesh.cell_maps[c].to_physical(xref);
            CHECK((space.eval(u, c, xref) - f.value(x)).norm() < 1e-11);
          }
      }
}

TEST_CASE("constants are reproduced exactly") {
  SimplicialMesh mesh = build_structured_mesh(2, 3);
  for (FieldKind kind : {FieldKind::curl, FieldKind::div}) {
    FeSpace space(mesh, kind, 1, true);
    Eigen::VectorXd u =
        space.interpolate([](const Vec3&) { return Vec3(0.7, -0.3, 0); });
    Vec3 got = space.eval(u, 4, Vec3(0.2, 0.3, 0));
    CHECK(got[0] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(got[1] == doctest::Approx(-0.3).epsilon(1e-12));
  }
}

TEST_CASE("traces are conforming across interior facets") {
  for (int dim : {2, 3})
    for (FieldKind kind : {FieldKind::curl, FieldKind::div})
      for (int r = 1; r <= (dim == 2 ? 3 : 2); ++r) {
        SimplicialMesh mesh = build_structured_mesh(dim, 2);
        FeSpace space(mesh, kind, r, true);
        std::mt19937 gen(100u * dim + 10u * r + (kind == FieldKind::curl));
        std::normal_distribution<double> gauss;
        Eigen::VectorXd u(space.n_dofs());
        for (int i = 0; i < u.size(); ++i) u[i] = gauss(gen);

        for (std::size_t f = 0; f < mesh.n_facets(); ++f) {
          if (mesh.facet_on_boundary(static_cast<int>(f))) continue;
          FacetQuadrature fq = facet_quadrature(mesh, static_cast<int>(f), 2 * r + 2);
          Vec3 n = mesh.facet_normals[f];
          for (const Vec3& p : fq.points) {
            Vec3 va, vb;
            for (int side = 0; side < 2; ++side) {
              int c = mesh.facet_cells[f][side];
              Vec3 xref = mesh.cell_maps[c].to_reference(p);
              (side == 0 ? va : vb) = space.eval(u, c, xref);
            }
            if (kind == FieldKind::div) {
              CHECK(std::abs((va - vb).dot(n)) < 1e-9);
            } else {
              Vec3 jump = va - vb;
              CHECK((jump - jump.dot(n) * n).norm() < 1e-9);
            }
          }
        }
      }
}

TEST_CASE("retained bubbles have vanishing conforming trace") {
  for (int dim : {2, 3})
    for (FieldKind kind : {FieldKind::curl, FieldKind::div})
      for (int r : {1, 2}) {
        const BubbleBasis& bb = bubble_basis(kind, r, dim);
        CHECK(!bb.retained.empty());
        const QuadratureRule& edge_rule = simplex_rule(1, 6);
        for (int idx : bb.retained) {
          const VectorPoly& b = bb.functions[idx];
          if (dim == 2) {
            // sample the three edges of the reference triangle
            const std::pair<Vec3, Vec3> edges[] = {
                {Vec3(0, 0, 0), Vec3(1, 0, 0)},
                {Vec3(0, 0, 0), Vec3(0, 1, 0)},
                {Vec3(1, 0, 0), Vec3(-1, 1, 0)}};
            for (const auto& [a, t] : edges)
              for (const Vec3& q : edge_rule.points) {
                Vec3 x = a + q[0] * t;
                Vec3 v = b.value(x);
                if (kind == FieldKind::curl)
                  CHECK(std::abs(v.dot(t.normalized())) < 1e-12);
                else
                  CHECK(std::abs(v[0] * t[1] - v[1] * t[0]) < 1e-12);
              }
          } else {
            // facet lambda_k = 0: tangential (curl) or normal (div) trace
            const QuadratureRule& tri_rule = simplex_rule(2, 6);
            for (int k = 0; k < 4; ++k) {
              Vec3 verts[3];
              int m = 0;
              for (int j = 0; j < 4; ++j)
                if (j != k) verts[m++] = SimplicialMesh::reference_vertex(j);
              Vec3 e1 = verts[1] - verts[0], e2 = verts[2] - verts[0];
              Vec3 n = e1.cross(e2).normalized();
              for (const Vec3& q : tri_rule.points) {
                Vec3 x = verts[0] + q[0] * e1 + q[1] * e2;
                Vec3 v = b.value(x);
                if (kind == FieldKind::curl)
                  CHECK((v - v.dot(n) * n).norm() < 1e-12);
                else
                  CHECK(std::abs(v.dot(n)) < 1e-12);
              }
            }
          }
        }
      }
}

TEST_CASE("interpolation error decays at second order for r=1") {
  auto field = [](const Vec3& x) {
    return Vec3(std::sin(x[0]) * std::cos(x[1]), std::exp(x[0]) * x[1] * x[1], 0);
  };
  std::vector<double> errs;
  for (int n : {2, 4, 8}) {
    SimplicialMesh mesh = build_structured_mesh(2, n);
    FeSpace space(mesh, FieldKind::curl, 1, false);
    Eigen::VectorXd u = space.interpolate(field);
    const QuadratureRule& rule = simplex_rule(2, 8);
    double err2 = 0;
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
      for (std::size_t q = 0; q < rule.size(); ++q) {
        Vec3 x = mesh.cell_maps[c].to_physical(rule.points[q]);
        err2 += rule.weights[q] * mesh.cell_maps[c].det *
                (space.eval(u, static_cast<int>(c), rule.points[q]) - field(x))
                    .squaredNorm();
      }
    }
    errs.push_back(std::sqrt(err2));
  }
  double order1 = std::log2(errs[0] / errs[1]);
  double order2 = std::log2(errs[1] / errs[2]);
  CHECK(order1 > 1.8);
  CHECK(order2 > 1.9);
  CHECK(order2 < 2.2);
}
