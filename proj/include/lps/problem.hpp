#pragma once

#include "lps/geometry.hpp"

#include <functional>
#include <string>
#include <vector>

namespace lps {

using ScalarField = std::function<double(const Vec3&)>;
using VectorFieldFn = std::function<Vec3(const Vec3&)>;
using MatrixFieldFn = std::function<Mat3(const Vec3&)>;

/// Pure advection problem in the unified first-order form: find u with
/// L_beta u + gamma u = f in Omega, u = g on the inflow boundary.
struct AdvectionProblem {
  std::string name;
  FieldKind kind = FieldKind::curl;
  int dim = 2;

  VectorFieldFn beta;
  MatrixFieldFn beta_jacobian;  // J(i,j) = d beta_i / d x_j
  ScalarField gamma;
  VectorFieldFn source;
  VectorFieldFn inflow;

  bool has_exact = false;
  VectorFieldFn exact;
  MatrixFieldFn exact_jacobian;

  bool polynomial_coefficients = false;
  // Whether the problem claims the positive-eigenvalue well-posedness
  // condition; checked at runtime, not trusted.
  bool claims_coercive = true;
};

/// Smallest eigenvalue of gamma I +/- (sym grad beta - (div beta / 2) I) at
/// a point, restricted to the leading dim x dim block. The sign is + for
/// curl problems and - for div problems.
double pointwise_rho(const AdvectionProblem& p, const Vec3& x);

struct ExampleInfo {
  std::string id;
  std::string description;
  bool kind_selectable;
  FieldKind default_kind;
  int dim;
};

const std::vector<ExampleInfo>& example_registry();

/// Build one of the six registry problems. `kind` is honored only where the
/// registry marks the kind selectable.
AdvectionProblem example_problem(const std::string& id, FieldKind kind);

/// Problem with the given exact solution and manufactured source
/// f = L_beta u + gamma u.
AdvectionProblem manufactured_problem(std::string name, FieldKind kind, int dim,
                                      VectorFieldFn beta, MatrixFieldFn beta_jac,
                                      ScalarField gamma, VectorFieldFn exact,
                                      MatrixFieldFn exact_jac,
                                      bool polynomial_coefficients);

}  // namespace lps
