#include "lps/assembly.hpp"
#include "lps/problem.hpp"

#include <chrono>
#include <cstdio>
#include <string>

// Times the parallel assembly path against the serial reference on the 2D and
// 3D registry problems and reports the max entrywise deviation (tiny but not
// exactly zero: the two paths accumulate facet terms in different orders).

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_diff(const lps::SparseSystem& a, const lps::SparseSystem& b) {
  Eigen::SparseMatrix<double> d = a.matrix - b.matrix;
  double m = (a.rhs - b.rhs).cwiseAbs().maxCoeff();
  for (int k = 0; k < d.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

void bench(const std::string& example, lps::FieldKind kind, int n, int r) {
  lps::AdvectionProblem p = lps::example_problem(example, kind);
  lps::SimplicialMesh mesh = lps::build_structured_mesh(p.dim, n);
  lps::LpsConfig cfg;
  cfg.r = r;
  lps::FeSpace space(mesh, p.kind, cfg.r, cfg.enriched);

  auto t0 = std::chrono::steady_clock::now();
  lps::SparseSystem serial = lps::assemble_serial(p, mesh, space, cfg);
  double ts = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  lps::SparseSystem parallel = lps::assemble(p, mesh, space, cfg);
  double tp = seconds_since(t0);

  std::printf("%-9s %-4s r=%d n=%-3d dofs=%-8d serial %7.3fs  parallel %7.3fs  "
              "speedup %.2fx  maxdiff %.2e\n",
              example.c_str(), p.kind == lps::FieldKind::curl ? "curl" : "div", r,
              n, serial.dof_count, ts, tp, ts / tp, max_diff(serial, parallel));
}

}  // namespace

int main() {
  bench("example1", lps::FieldKind::curl, 64, 1);
  bench("example1", lps::FieldKind::div, 64, 1);
  bench("example1", lps::FieldKind::curl, 32, 2);
  bench("example2", lps::FieldKind::curl, 8, 1);
  bench("example2", lps::FieldKind::div, 8, 1);
  return 0;
}
