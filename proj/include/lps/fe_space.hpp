#pragma once

#include "lps/mesh.hpp"
#include "lps/reference_basis.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <tuple>
#include <mutex>
#include <vector>

namespace lps {

/// Reference span functions evaluated at a fixed set of reference points.
/// values is (3 nq) x n_span; jacobians is (9 nq) x n_span with the 3x3
/// Jacobian of point q stored column-major in rows [9q, 9q+9).
struct BasisTabulation {
  Eigen::MatrixXd values;
  Eigen::MatrixXd jacobians;
};

/// Conforming finite element space on a simplicial mesh: full [P_r]^dim with
/// tangential (curl) or normal (div) continuity, optionally enriched by the
/// element bubble space. Local bases are built per cell from global entity
/// moments, so shared traces match across cells without orientation flags.
class FeSpace {
 public:
  FeSpace(const SimplicialMesh& mesh, FieldKind kind, int r, bool enriched);

  const SimplicialMesh& mesh() const { return *mesh_; }
  FieldKind kind() const { return kind_; }
  int order() const { return r_; }
  bool enriched() const { return enriched_; }
  int dim() const { return dim_; }

  int n_dofs() const { return n_global_; }
  /// Local (= per cell) basis size: shared entity dofs + interior dofs.
  int n_local() const { return n_span_; }
  int n_shared_local() const { return n_shared_; }
  int n_interior_local() const { return n_span_ - n_shared_; }
  int dofs_per_edge() const { return r_ + 1; }
  int dofs_per_face() const { return r_ * r_ - 1; }  // curl, 3D
  int dofs_per_facet() const;                        // div

  const std::vector<int>& cell_dofs(int c) const { return cell_dofs_[c]; }
  /// Nodal coefficients: local basis i on cell c is
  /// sum_j C(j, i) Piola(span[j]).
  const Eigen::MatrixXd& cell_coefficients(int c) const {
    return *cell_coeff_[c];
  }
  const std::vector<VectorPoly>& span() const { return span_; }

  /// Evaluate reference span functions at arbitrary reference points.
  BasisTabulation tabulate_span(const std::vector<Vec3>& ref_points) const;
  /// Cached tabulation at the reference preimages of the quadrature points
  /// of facet `local_facet_pos` (tuple position) of `cell`. The q-th point
  /// matches the q-th point of facet_quadrature built from the same rule.
  const BasisTabulation& facet_span_tabulation(int cell, int local_facet_pos,
                                               const QuadratureRule& param_rule) const;

  /// Canonical interpolant: applies the global degree-of-freedom functionals
  /// to a smooth field.
  Eigen::VectorXd interpolate(const VectorField& v) const;

  /// Value / physical Jacobian of the discrete field with coefficient
  /// vector u at a reference point of a cell.
  Vec3 eval(const Eigen::VectorXd& u, int cell, const Vec3& xref) const;
  Mat3 eval_jacobian(const Eigen::VectorXd& u, int cell, const Vec3& xref) const;

 private:
  void build_dof_map();
  void build_cell_coefficients();
  double shared_functional(int row, int cell, const VectorPoly& shat) const;
  double shared_functional_field(int row, int cell, const VectorField& v) const;

  const SimplicialMesh* mesh_;
  FieldKind kind_;
  int r_;
  bool enriched_;
  int dim_;

  std::vector<VectorPoly> span_;             // W dual basis + retained bubbles
  std::vector<VectorPoly> interior_weights_; // orthonormal interior moment weights
  std::vector<TraceSignature> shared_signature_;
  int n_span_ = 0;
  int n_shared_ = 0;
  int n_global_ = 0;

  std::vector<std::vector<int>> cell_dofs_;
  std::vector<std::shared_ptr<Eigen::MatrixXd>> cell_coeff_;

  mutable std::map<std::tuple<int, int, int, int>, BasisTabulation> facet_tab_cache_;
  mutable std::mutex facet_tab_mutex_;
};

}  // namespace lps
