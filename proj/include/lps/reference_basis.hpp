#pragma once

#include "lps/geometry.hpp"
#include "lps/polynomial.hpp"

#include <vector>

namespace lps {

/// pi/2 rotation; in 2D the curl-kind space is this rotation applied to the
/// BDM space.
inline Eigen::Matrix2d rotation_2d() {
  Eigen::Matrix2d R;
  R << 0, 1, -1, 0;
  return R;
}

struct TraceSignature {
  enum class Entity { edge, facet, face, interior };
  Entity entity = Entity::interior;
  int entity_index = 0;  // local edge/facet/face index, 0 for interior
  int moment = 0;
};

/// Dual basis of the full vector polynomial space [P_r]^dim on the reference
/// simplex with conforming trace moments: edge tangential moments (curl),
/// facet normal moments (div), face tangential moments (curl, 3D, r >= 2),
/// plus interior moments. The leading n_shared functions carry the moments
/// shared across cells.
struct ReferenceBasis {
  FieldKind kind = FieldKind::div;
  int order = 1;
  int dim = 2;
  std::vector<VectorPoly> functions;
  std::vector<TraceSignature> trace_signature;
  int n_shared = 0;
};

const ReferenceBasis& reference_basis(FieldKind kind, int r, int dim);

/// Element bubble space: products q * b_i with q ranging over monomials of
/// P_{r-1} and b_i the barycentric bubble directions. `retained` lists the
/// functions kept after removing the overlap with [P_r]^dim (rank-revealing
/// QR, relative pivot > 1e-10).
struct BubbleBasis {
  FieldKind kind = FieldKind::div;
  int order = 1;
  int dim = 2;
  std::vector<VectorPoly> functions;
  std::vector<int> retained;
};

const BubbleBasis& bubble_basis(FieldKind kind, int r, int dim);

/// L2-orthonormal basis of the projection space [P_{r-1}]^dim on the
/// reference simplex.
struct ProjectionBasis {
  int order = 0;  // r - 1
  int dim = 2;
  std::vector<VectorPoly> functions;
};

const ProjectionBasis& projection_basis(int r, int dim);

// Shared moment machinery, also used for the global degrees of freedom.

/// Orthonormal (shifted Legendre) basis of P_r on [0,1], evaluated at t.
double legendre01(int k, double t);

/// L2-orthonormal scalar basis of P_r on the reference triangle.
const std::vector<Polynomial>& face_scalar_basis(int r);

/// L2-orthonormal basis of the subspace of [P_r(triangle)]^2 whose
/// edge-tangential components vanish on all three edges (dimension r^2 - 1).
/// Components are stored in the x/y slots of the VectorPoly.
const std::vector<VectorPoly>& face_interior_tangential_basis(int r);

/// Gram-Schmidt of vector polynomial fields in L2 of the reference simplex.
std::vector<VectorPoly> orthonormalize_fields(const std::vector<VectorPoly>& fields,
                                              int dim, int quad_degree);

/// Number of scalar monomials of total degree <= r in `dim` variables.
int poly_space_dim(int r, int dim);

}  // namespace lps
