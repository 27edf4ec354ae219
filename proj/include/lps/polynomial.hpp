#pragma once

#include "lps/geometry.hpp"

#include <array>
#include <vector>

namespace lps {

/// Sparse polynomial in up to three variables, used only for reference-basis
/// construction and tabulation (never in assembly inner loops).
class Polynomial {
 public:
  struct Term {
    std::array<int, 3> exponents;
    double coeff;
  };

  Polynomial() = default;
  static Polynomial constant(double c);
  static Polynomial monomial(const std::array<int, 3>& exps, double c = 1.0);
  /// Affine polynomial c0 + g.x
  static Polynomial affine(double c0, const Vec3& g);

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;
  Polynomial& operator+=(const Polynomial& o);

  Polynomial derivative(int var) const;
  double evaluate(const Vec3& x) const;
  Vec3 gradient_at(const Vec3& x) const;
  int total_degree() const;
  bool empty() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

 private:
  void compress();
  std::vector<Term> terms_;
};

/// Vector-valued polynomial field on the reference simplex.
struct VectorPoly {
  std::array<Polynomial, 3> comp;

  Vec3 value(const Vec3& x) const {
    return Vec3(comp[0].evaluate(x), comp[1].evaluate(x), comp[2].evaluate(x));
  }
  // J(i,j) = d comp_i / d x_j
  Mat3 jacobian(const Vec3& x) const {
    Mat3 J;
    for (int i = 0; i < 3; ++i) J.row(i) = comp[i].gradient_at(x).transpose();
    return J;
  }
  VectorPoly operator*(const Polynomial& q) const {
    return {{comp[0] * q, comp[1] * q, comp[2] * q}};
  }
  VectorPoly operator*(double s) const {
    return {{comp[0] * s, comp[1] * s, comp[2] * s}};
  }
  VectorPoly operator+(const VectorPoly& o) const {
    return {{comp[0] + o.comp[0], comp[1] + o.comp[1], comp[2] + o.comp[2]}};
  }
};

/// Barycentric coordinates of the reference simplex as affine polynomials:
/// lambda_0 = 1 - x - y (- z), lambda_i = x_i.
std::vector<Polynomial> barycentric_polynomials(int dim);

/// Monomial exponent multi-indices of total degree <= degree in `dim` vars,
/// graded lexicographic order.
std::vector<std::array<int, 3>> monomial_exponents(int dim, int degree);

/// Exact integral of a barycentric monomial prod lambda_i^{a_i} over the
/// reference simplex (the independent quadrature oracle):
///   (prod a_i!) * dim! / (|a| + dim)! * |ref simplex|.
double barycentric_monomial_integral(int dim, const std::array<int, 4>& powers);

}  // namespace lps
