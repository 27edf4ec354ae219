#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lps/solver.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace lps;

namespace {

double max_entry_diff(const Eigen::SparseMatrix<double>& a,
                      const Eigen::SparseMatrix<double>& b) {
  Eigen::SparseMatrix<double> d = a - b;
  double m = 0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

}  // namespace

TEST_CASE("parallel assembly agrees with the serial reference") {
  struct Case {
    const char* example;
    FieldKind kind;
    int n, r;
  };
  const Case cases[] = {
      {"example1", FieldKind::curl, 6, 1},
      {"example1", FieldKind::div, 4, 2},
      {"example2", FieldKind::curl, 2, 1},
      {"example2", FieldKind::div, 2, 1},
  };
  for (const Case& c : cases) {
    AdvectionProblem p = example_problem(c.example, c.kind);
    SimplicialMesh mesh = build_structured_mesh(p.dim, c.n);
    LpsConfig cfg;
    cfg.r = c.r;
    FeSpace space(mesh, p.kind, cfg.r, cfg.enriched);
    SparseSystem par = assemble(p, mesh, space, cfg);
    SparseSystem ser = assemble_serial(p, mesh, space, cfg);
    double scale = 1.0;
    for (int k = 0; k < par.matrix.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(par.matrix, k); it; ++it)
        scale = std::max(scale, std::abs(it.value()));
    CHECK(max_entry_diff(par.matrix, ser.matrix) < 1e-12 * scale);
    CHECK((par.rhs - ser.rhs).cwiseAbs().maxCoeff() < 1e-12 * scale);
  }
}

TEST_CASE("assembly is bit-identical for any thread count") {
  AdvectionProblem p = example_problem("example1", FieldKind::curl);
  SimplicialMesh mesh = build_structured_mesh(2, 8);
  LpsConfig cfg;
  FeSpace space(mesh, p.kind, cfg.r, cfg.enriched);

#ifdef _OPENMP
  int saved = omp_get_max_threads();
  omp_set_num_threads(1);
#endif
  SparseSystem one = assemble(p, mesh, space, cfg);
#ifdef _OPENMP
  omp_set_num_threads(4);
#endif
  SparseSystem four = assemble(p, mesh, space, cfg);
#ifdef _OPENMP
  omp_set_num_threads(saved);
#endif

  CHECK(max_entry_diff(one.matrix, four.matrix) == 0.0);
  CHECK((one.rhs - four.rhs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solutions from either assembly path agree") {
  AdvectionProblem p = example_problem("example1", FieldKind::div);
  SimplicialMesh mesh = build_structured_mesh(2, 6);
  LpsConfig cfg;
  FeSpace space(mesh, p.kind, cfg.r, cfg.enriched);
  Eigen::VectorXd a = solve(assemble(p, mesh, space, cfg)).solution;
  Eigen::VectorXd b = solve(assemble_serial(p, mesh, space, cfg)).solution;
  CHECK((a - b).norm() / a.norm() < 1e-10);
}
