#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>

namespace lps {

// All geometry lives in R^3. Two-dimensional problems are embedded in the
// z = 0 plane; the third row/column of every linear map is the identity, so
// the same kernels serve both dimensions.
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class FieldKind { curl, div };

/// Affine map F(x̂) = B x̂ + b from the reference simplex onto a cell.
struct AffineCellMap {
  Mat3 linear = Mat3::Identity();             // B
  Vec3 offset = Vec3::Zero();                 // b
  double det = 1.0;                           // det of the dim x dim block, > 0
  Mat3 inverse = Mat3::Identity();            // B^{-1}
  Mat3 inverse_transpose = Mat3::Identity();  // B^{-T}

  Vec3 to_physical(const Vec3& ref) const { return linear * ref + offset; }
  Vec3 to_reference(const Vec3& x) const { return inverse * (x - offset); }
};

inline AffineCellMap make_affine_map(int dim, const Vec3& v0, const Vec3& v1,
                                     const Vec3& v2, const Vec3& v3 = Vec3::UnitZ()) {
  AffineCellMap m;
  m.linear.col(0) = v1 - v0;
  m.linear.col(1) = v2 - v0;
  m.linear.col(2) = (dim == 3) ? Vec3(v3 - v0) : Vec3::UnitZ();
  m.offset = v0;
  m.det = m.linear.determinant();
  if (m.det <= 0.0)
    throw std::runtime_error("degenerate-cell: affine map has non-positive determinant");
  m.inverse = m.linear.inverse();
  m.inverse_transpose = m.inverse.transpose();
  return m;
}

// Piola transforms. Covariant H preserves tangential traces (curl-type
// fields), contravariant G preserves normal traces (div-type fields), and
// the pair preserves the L2 product: (G q̂, H v̂)_K = (q̂, v̂)_K̂.
inline Vec3 piola_covariant(const AffineCellMap& m, const Vec3& ref_value) {
  return m.inverse_transpose * ref_value;
}
inline Vec3 piola_contravariant(const AffineCellMap& m, const Vec3& ref_value) {
  return m.linear * ref_value / m.det;
}
inline Mat3 piola_covariant_jacobian(const AffineCellMap& m, const Mat3& ref_jac) {
  return m.inverse_transpose * ref_jac * m.inverse;
}
inline Mat3 piola_contravariant_jacobian(const AffineCellMap& m, const Mat3& ref_jac) {
  return m.linear * ref_jac * m.inverse / m.det;
}

inline Vec3 piola_value(FieldKind kind, const AffineCellMap& m, const Vec3& v) {
  return kind == FieldKind::curl ? piola_covariant(m, v) : piola_contravariant(m, v);
}
inline Mat3 piola_jacobian(FieldKind kind, const AffineCellMap& m, const Mat3& j) {
  return kind == FieldKind::curl ? piola_covariant_jacobian(m, j)
                                 : piola_contravariant_jacobian(m, j);
}

}  // namespace lps
