#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lps/verification.hpp"

#include <cmath>
#include <sstream>

using namespace lps;

TEST_CASE("reference inf-sup constants match the exact-integration oracle") {
  // Frozen from an independent rational-arithmetic computation (exact
  // monomial integrals over the simplex, dense generalized eigenproblem).
  // The 2D value for r=1 is exactly sqrt(5/8); curl and div coincide in 2D
  // because the two bubble sets differ by a rotation.
  struct Expect {
    FieldKind kind;
    int r, dim;
    double value;
  };
  const Expect table[] = {
      {FieldKind::curl, 1, 2, 0.790569415},  // sqrt(5/8)
      {FieldKind::curl, 2, 2, 0.626335769},
      {FieldKind::curl, 3, 2, 0.495862021},
      {FieldKind::div, 1, 2, 0.790569415},
      {FieldKind::div, 2, 2, 0.626335769},
      {FieldKind::div, 3, 2, 0.495862021},
      {FieldKind::curl, 1, 3, 0.724568837},  // sqrt(21/40), same as div r=1
      {FieldKind::curl, 2, 3, 0.548772515},
      {FieldKind::curl, 3, 3, 0.401784068},
      {FieldKind::div, 1, 3, 0.724568837},
      {FieldKind::div, 2, 3, 0.566211522},
      {FieldKind::div, 3, 3, 0.449175112},
  };
  for (const Expect& e : table) {
    InfSupResult res = estimate_infsup(e.kind, e.r, e.dim);
    CHECK(res.constant == doctest::Approx(e.value).epsilon(1e-7));
    CHECK(res.constant > 1e-3);
    CHECK(res.gram_condition > 1.0);
  }
  CHECK(estimate_infsup(FieldKind::curl, 1, 2).constant ==
        doctest::Approx(std::sqrt(5.0 / 8.0)).epsilon(1e-12));
}

TEST_CASE("modified interpolant orthogonality and reproduction") {
  SimplicialMesh mesh = build_structured_mesh(2, 3);
  FeSpace space(mesh, FieldKind::curl, 1, false);

  // fields already in the space get a vanishing correction
  auto affine = [](const Vec3& x) {
    return Vec3(0.2 + x[0] - 0.5 * x[1], 1.0 - x[0], 0);
  };
  Eigen::VectorXd ih = space.interpolate(affine);
  ModifiedInterpolant flat = build_modified_interpolant(affine, ih, 2, space);
  CHECK(flat.defect_norm < 1e-12);
  CHECK(flat.correction_norm < 1e-11);

  // smooth field: correction is orthogonal and bounded by the defect
  auto smooth = [](const Vec3& x) {
    return Vec3(std::sin(x[0]) * std::cos(x[1]), std::exp(x[0]) * x[1] * x[1], 0);
  };
  ih = space.interpolate(smooth);
  for (int c : {0, 5, 9}) {
    ModifiedInterpolant m = build_modified_interpolant(smooth, ih, c, space);
    CHECK(m.orthogonality_residual < 1e-11);
    CHECK(m.cell_infsup > 1e-3);
    CHECK(m.correction_norm <= m.defect_norm / m.cell_infsup * (1 + 1e-10));
    // evaluation agrees with i_h plus the bubble correction
    Vec3 jh = modified_interpolant_value(m, ih, c, space, Vec3(0.25, 0.25, 0));
    Vec3 ihv = space.eval(ih, c, Vec3(0.25, 0.25, 0));
    CHECK((jh - ihv).norm() <= m.correction_norm * 50 + 1e-12);
  }

  // the enriched space is the wrong home for i_h here
  FeSpace enriched(mesh, FieldKind::curl, 1, true);
  Eigen::VectorXd ih2 = enriched.interpolate(smooth);
  CHECK_THROWS_WITH_AS((void)build_modified_interpolant(smooth, ih2, 0, enriched),
                       doctest::Contains("configuration-error"),
                       std::runtime_error);
}

TEST_CASE("modified interpolant converges at the interpolation rate") {
  auto smooth = [](const Vec3& x) {
    return Vec3(std::sin(x[0]) * std::cos(x[1]), std::exp(x[0]) * x[1] * x[1], 0);
  };
  std::vector<double> errs;
  for (int n : {2, 4, 8}) {
    SimplicialMesh mesh = build_structured_mesh(2, n);
    FeSpace space(mesh, FieldKind::curl, 1, false);
    Eigen::VectorXd ih = space.interpolate(smooth);
    const QuadratureRule& rule = simplex_rule(2, 8);
    double err2 = 0;
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
      ModifiedInterpolant m =
          build_modified_interpolant(smooth, ih, static_cast<int>(c), space);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        Vec3 x = mesh.cell_maps[c].to_physical(rule.points[q]);
        Vec3 jh = modified_interpolant_value(m, ih, static_cast<int>(c), space,
                                             rule.points[q]);
        err2 += rule.weights[q] * mesh.cell_maps[c].det * (smooth(x) - jh).squaredNorm();
      }
    }
    errs.push_back(std::sqrt(err2));
  }
  CHECK(std::log2(errs[0] / errs[1]) > 1.7);
  CHECK(std::log2(errs[1] / errs[2]) > 1.8);
}

TEST_CASE("pointwise well-posedness eigenvalue") {
  // rotation: the symmetric part of the gradient vanishes, rho = gamma = 1
  AdvectionProblem rot = example_problem("example1", FieldKind::curl);
  SimplicialMesh mesh = build_structured_mesh(2, 4);
  CHECK(check_wellposedness(rot, mesh, 4) == doctest::Approx(1.0).epsilon(1e-12));

  // beta = 0: rho = gamma
  AdvectionProblem still = rot;
  still.beta = [](const Vec3&) { return Vec3::Zero(); };
  still.beta_jacobian = [](const Vec3&) { return Mat3::Zero(); };
  still.gamma = [](const Vec3&) { return 2.5; };
  CHECK(check_wellposedness(still, mesh, 4) == doctest::Approx(2.5).epsilon(1e-12));

  // the 3D benchmark problem claims positivity; confirm on a sampled mesh
  AdvectionProblem p3 = example_problem("example2", FieldKind::curl);
  SimplicialMesh mesh3 = build_structured_mesh(3, 2);
  CHECK(check_wellposedness(p3, mesh3, 4) > 0.0);

  // the discontinuous-data layer problem does not
  AdvectionProblem p6 = example_problem("example6", FieldKind::curl);
  CHECK(p6.claims_coercive == false);
  CHECK(check_wellposedness(p6, mesh, 4) < 0.5);
}

TEST_CASE("structural suite passes and prints one line per check") {
  StructuralReport report = run_structural_suite(20260823u);
  CHECK(report.all_passed());
  CHECK(report.checks.size() >= 17);
  std::ostringstream os;
  report.print(os);
  std::string text = os.str();
  std::size_t lines = 0;
  for (char ch : text)
    if (ch == '\n') ++lines;
  CHECK(lines >= report.checks.size());
  CHECK(text.find("pass") != std::string::npos);

  // a different seed passes too
  CHECK(run_structural_suite(7u).all_passed());
}
