#include "lps/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <stdexcept>

namespace lps {

namespace {

constexpr int kDirectLimit = 90000;

double rel_residual(const SparseSystem& sys, const Eigen::VectorXd& x) {
  double denom = sys.rhs.norm();
  if (denom == 0) return (sys.matrix * x).norm();
  return (sys.matrix * x - sys.rhs).norm() / denom;
}

}  // namespace

SolveReport solve(const SparseSystem& system, double tol) {
  SolveReport rep;
  if (system.dof_count <= kDirectLimit) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(system.matrix);
    if (lu.info() == Eigen::Success) {
      rep.solution = lu.solve(system.rhs);
      rep.method = "sparselu";
      rep.relative_residual = rel_residual(system, rep.solution);
      if (rep.relative_residual <= tol) return rep;
    }
  }
  // Light incomplete factorization first; a denser (much slower to build)
  // one only if the first fails to reach the tolerance.
  struct IlutSetting {
    double droptol;
    int fillfactor;
  };
  for (IlutSetting s : {IlutSetting{1e-4, 10}, IlutSetting{1e-6, 40}}) {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
    it.preconditioner().setDroptol(s.droptol);
    it.preconditioner().setFillfactor(s.fillfactor);
    it.setTolerance(tol * 1e-2);
    it.setMaxIterations(2000);
    it.compute(system.matrix);
    rep.solution = it.solve(system.rhs);
    rep.method = "bicgstab-ilut";
    rep.iterations = static_cast<int>(it.iterations());
    rep.relative_residual = rel_residual(system, rep.solution);
    if (rep.relative_residual <= tol) return rep;
  }
  throw std::runtime_error("residual-failure: achieved relative residual " +
                           std::to_string(rep.relative_residual));
}

}  // namespace lps
