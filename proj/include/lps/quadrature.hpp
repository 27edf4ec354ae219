#pragma once

#include "lps/geometry.hpp"

#include <array>
#include <string>
#include <vector>

namespace lps {

inline constexpr int kMaxQuadratureDegree = 14;

/// Quadrature rule on the reference simplex of dimension `dim`
/// (segment [0,1], unit triangle, unit tetrahedron).
struct QuadratureRule {
  int dim = 0;
  int exactness_degree = 0;
  std::vector<Vec3> points;       // reference cartesian coordinates
  std::vector<double> weights;    // positive, sum to reference measure

  std::size_t size() const { return points.size(); }
  /// Barycentric coordinates of point i.
  std::array<double, 4> barycentric(std::size_t i) const;
};

/// Rule exact for all polynomials of total degree <= degree.
/// Throws std::invalid_argument for degree > kMaxQuadratureDegree.
const QuadratureRule& simplex_rule(int dim, int degree);

enum class IntegralPurpose { mass, advection, facet, stabilization };

/// Quadrature degree guaranteeing exact integration of the corresponding
/// bilinear-form integrand for polynomial velocity and the bubble-enriched
/// space of order r (local degree r + 2).
int required_degree(int r, IntegralPurpose purpose);

}  // namespace lps
