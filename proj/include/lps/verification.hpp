#pragma once

#include "lps/fe_space.hpp"
#include "lps/problem.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lps {

/// Discrete inf-sup constant between the element bubble space and the
/// projection space [P_{r-1}]^dim on the reference element.
struct InfSupResult {
  FieldKind kind = FieldKind::curl;
  int r = 1;
  int dim = 2;
  double constant = 0;        // sqrt of the smallest coupling eigenvalue
  double gram_condition = 0;  // condition number of the bubble Gram matrix
};

/// Smallest singular value of M_D^{-1/2} C^T M_B^{-1} C M_D^{-1/2} where C
/// couples the bubble span with the orthonormal projection basis. Throws
/// "ill-conditioned-basis" when the bubble Gram matrix is numerically rank
/// deficient below the coupling rank.
InfSupResult estimate_infsup(FieldKind kind, int r, int dim);

/// Local correction m_h(v) in the element bubble space such that
/// j_h v = i_h v + m_h(v) satisfies (v - j_h v, q)_K = 0 for all q in
/// [P_{r-1}(K)]^dim. i_h is the canonical interpolant onto the unenriched
/// space, passed in as a precomputed global coefficient vector.
struct ModifiedInterpolant {
  Eigen::VectorXd bubble_coefficients;  // in the full bubble product basis
  double orthogonality_residual = 0;    // max_j |(v - j_h v, q_j)_K|
  double defect_norm = 0;               // ||v - i_h v||_{0,K}
  double correction_norm = 0;           // ||m_h(v)||_{0,K}
  double cell_infsup = 0;               // inf-sup constant of this cell's pairing
};

ModifiedInterpolant build_modified_interpolant(const VectorField& v,
                                               const Eigen::VectorXd& ih_coefficients,
                                               int cell, const FeSpace& w_space);

/// Evaluate j_h v = i_h v + m_h(v) at a reference point of the cell the
/// interpolant was built on.
Vec3 modified_interpolant_value(const ModifiedInterpolant& m,
                                const Eigen::VectorXd& ih_coefficients, int cell,
                                const FeSpace& w_space, const Vec3& xref);

/// Minimum over all cells and volume quadrature points of the well-posedness
/// eigenvalue rho^+/- (sign chosen by the problem kind). Positive values
/// certify the coercivity assumption on the sampled set.
double check_wellposedness(const AdvectionProblem& problem,
                           const SimplicialMesh& mesh, int quad_degree);

/// One line of the structural verification suite.
struct StructuralCheck {
  std::string name;
  bool passed = false;
  double observed = 0;
  double bound = 0;
};

struct StructuralReport {
  std::vector<StructuralCheck> checks;
  bool all_passed() const;
  void print(std::ostream& os) const;
};

/// Runs the full structural suite: reference inf-sup constants, modified
/// interpolant orthogonality on a batch of cells, the coercivity bound for
/// random discrete fields, and the integration-by-parts / operator adjoint
/// identities for polynomial data.
StructuralReport run_structural_suite(unsigned seed);

}  // namespace lps
