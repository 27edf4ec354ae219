#pragma once

#include "lps/fe_space.hpp"
#include "lps/problem.hpp"

#include <Eigen/Sparse>

namespace lps {

struct LpsConfig {
  int r = 1;
  bool enriched = true;
  bool enable_s1 = true;
  bool enable_s2 = true;
  double solver_tol = 1e-10;
  // Extra quadrature degree, applied when the problem's coefficients are not
  // polynomial.
  int quadrature_bump = 2;

  int volume_degree(const AdvectionProblem& p) const;
  int facet_degree(const AdvectionProblem& p) const;
};

struct SparseSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  int dof_count = 0;
};

/// Componentwise quadrature average of beta over a cell.
Vec3 beta_bar(const AdvectionProblem& problem, const SimplicialMesh& mesh,
              int cell, int quad_degree = 6);

/// Facewise stabilization sign: sgn of the facet integral of beta . n_f,
/// +1 on characteristic facets where the integral is below the tolerance.
double cf_value(const SimplicialMesh& mesh, int facet, const VectorFieldFn& beta,
                int quad_degree = 6);

/// Fluctuation operator kappa_h = id - pi_h applied to field samples at the
/// points of a reference-cell quadrature rule; samples are stacked 3-vectors
/// (size 3 nq, possibly several columns). The physical cell drops out: the
/// affine map turns the local projection into the reference projection.
Eigen::MatrixXd fluctuation_apply(int r, int dim, const QuadratureRule& rule,
                                  const Eigen::MatrixXd& samples);

/// Assemble the stabilized system: a(u, v) + s1 S_h1 + s2 S_h2 = l(v).
/// Cell and facet blocks are computed in parallel and inserted in a fixed
/// order, so the result is bit-identical for any thread count.
SparseSystem assemble(const AdvectionProblem& problem, const SimplicialMesh& mesh,
                      const FeSpace& space, const LpsConfig& config);

/// Straightforward single-threaded assembly, kept as a reference
/// implementation for testing and benchmarking the parallel path.
SparseSystem assemble_serial(const AdvectionProblem& problem,
                             const SimplicialMesh& mesh, const FeSpace& space,
                             const LpsConfig& config);

}  // namespace lps
