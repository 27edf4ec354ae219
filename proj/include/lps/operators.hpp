#pragma once

#include "lps/geometry.hpp"

namespace lps {

// First-order advection operators for tangential (curl) and normal (div)
// vector transport, written with full Jacobians J(i,j) = d u_i / d x_j:
//   curl:  L u = (J_beta)^T u + (J_u) beta
//   div:   L u = (div beta) u - (J_beta) u + (J_u) beta
// and their formal L2 adjoints
//   curl:  L* v = (J_beta) v - (J_v) beta - (div beta) v
//   div:   L* v = -(J_beta)^T v - (J_v) beta.

inline Vec3 advection_apply(FieldKind kind, const Vec3& u, const Mat3& ju,
                            const Vec3& beta, const Mat3& jbeta) {
  if (kind == FieldKind::curl) return jbeta.transpose() * u + ju * beta;
  return jbeta.trace() * u - jbeta * u + ju * beta;
}

inline Vec3 adjoint_advection_apply(FieldKind kind, const Vec3& v, const Mat3& jv,
                                    const Vec3& beta, const Mat3& jbeta) {
  if (kind == FieldKind::curl)
    return jbeta * v - jv * beta - jbeta.trace() * v;
  return -(jbeta.transpose() * v) - jv * beta;
}

}  // namespace lps
