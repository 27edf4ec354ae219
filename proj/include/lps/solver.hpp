#pragma once

#include "lps/assembly.hpp"

#include <string>

namespace lps {

struct SolveReport {
  Eigen::VectorXd solution;
  std::string method;        // "sparselu" or "bicgstab-ilut"
  int iterations = 0;        // 0 for the direct solver
  double relative_residual = 0;
};

/// Solve the assembled system. Small and medium systems use a direct sparse
/// LU factorization; large ones fall back to ILUT-preconditioned BiCGSTAB.
/// Throws solver-failure when the relative residual exceeds `tol`.
SolveReport solve(const SparseSystem& system, double tol = 1e-10);

}  // namespace lps
