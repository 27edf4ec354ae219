#include "lps/problem.hpp"

#include "lps/operators.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace lps {

double pointwise_rho(const AdvectionProblem& p, const Vec3& x) {
  Mat3 jb = p.beta_jacobian(x);
  Mat3 sym = 0.5 * (jb + jb.transpose()) - 0.5 * jb.trace() * Mat3::Identity();
  double sign = (p.kind == FieldKind::curl) ? 1.0 : -1.0;
  Mat3 A = p.gamma(x) * Mat3::Identity() + sign * sym;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      A.topLeftCorner(p.dim, p.dim));
  return es.eigenvalues().minCoeff();
}

AdvectionProblem manufactured_problem(std::string name, FieldKind kind, int dim,
                                      VectorFieldFn beta, MatrixFieldFn beta_jac,
                                      ScalarField gamma, VectorFieldFn exact,
                                      MatrixFieldFn exact_jac,
                                      bool polynomial_coefficients) {
  AdvectionProblem p;
  p.name = std::move(name);
  p.kind = kind;
  p.dim = dim;
  p.beta = beta;
  p.beta_jacobian = beta_jac;
  p.gamma = gamma;
  p.has_exact = true;
  p.exact = exact;
  p.exact_jacobian = exact_jac;
  p.polynomial_coefficients = polynomial_coefficients;
  p.source = [kind, beta, beta_jac, gamma, exact, exact_jac](const Vec3& x) {
    Vec3 Lu = advection_apply(kind, exact(x), exact_jac(x), beta(x), beta_jac(x));
    return Vec3(Lu + gamma(x) * exact(x));
  };
  p.inflow = exact;
  return p;
}

namespace {

// Example 1 / 4 / 5 velocity: rigid rotation about the square's center.
Vec3 rot_beta(const Vec3& x) { return Vec3(x[1] - 0.5, 0.5 - x[0], 0); }
Mat3 rot_beta_jac(const Vec3&) {
  Mat3 j = Mat3::Zero();
  j(0, 1) = 1;
  j(1, 0) = -1;
  return j;
}

Vec3 ex1_u(const Vec3& x) {
  return Vec3(std::sin(x[0]) * std::cos(x[1]), std::exp(x[0]) * x[1] * x[1], 0);
}
Mat3 ex1_ju(const Vec3& x) {
  Mat3 j = Mat3::Zero();
  j(0, 0) = std::cos(x[0]) * std::cos(x[1]);
  j(0, 1) = -std::sin(x[0]) * std::sin(x[1]);
  j(1, 0) = std::exp(x[0]) * x[1] * x[1];
  j(1, 1) = 2.0 * std::exp(x[0]) * x[1];
  return j;
}

Vec3 ex2_beta(const Vec3& x) {
  return Vec3(std::exp(x[0] * x[0]), x[1] * std::sin(x[2]), x[0] * x[1] * x[2]);
}
Mat3 ex2_beta_jac(const Vec3& x) {
  Mat3 j = Mat3::Zero();
  j(0, 0) = 2.0 * x[0] * std::exp(x[0] * x[0]);
  j(1, 1) = std::sin(x[2]);
  j(1, 2) = x[1] * std::cos(x[2]);
  j(2, 0) = x[1] * x[2];
  j(2, 1) = x[0] * x[2];
  j(2, 2) = x[0] * x[1];
  return j;
}
Vec3 ex2_u(const Vec3& x) {
  return Vec3(x[1] * std::exp(x[0] * x[2]), -x[0] * x[1],
              std::sin(x[0] * x[1] * x[2]));
}
Mat3 ex2_ju(const Vec3& x) {
  Mat3 j;
  double e = std::exp(x[0] * x[2]);
  double c = std::cos(x[0] * x[1] * x[2]);
  j << x[1] * x[2] * e, e, x[0] * x[1] * e,
      -x[1], -x[0], 0,
      x[1] * x[2] * c, x[0] * x[2] * c, x[0] * x[1] * c;
  return j;
}

// Example 5 layer profile: s = 1/2 + atan(200 / q) / pi with
// q = 0.25^2 - (x-1/2)^2 - (y-1/2)^2; its gradient has the smooth closed
// form ds/dx_i = -200 q_{x_i} / (pi (q^2 + 200^2)).
double ex5_q(const Vec3& x) {
  return 0.0625 - (x[0] - 0.5) * (x[0] - 0.5) - (x[1] - 0.5) * (x[1] - 0.5);
}
double ex5_s(const Vec3& x) {
  return 0.5 + std::atan(200.0 / ex5_q(x)) / M_PI;
}
Vec3 ex5_grad_s(const Vec3& x) {
  double q = ex5_q(x);
  double d = -200.0 / (M_PI * (q * q + 40000.0));
  return Vec3(d * (-2.0 * (x[0] - 0.5)), d * (-2.0 * (x[1] - 0.5)), 0);
}
double ex5_p(const Vec3& x) {
  return 16.0 * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
}
Vec3 ex5_grad_p(const Vec3& x) {
  return Vec3(16.0 * (1.0 - 2.0 * x[0]) * x[1] * (1.0 - x[1]),
              16.0 * x[0] * (1.0 - x[0]) * (1.0 - 2.0 * x[1]), 0);
}
Vec3 ex5_u(const Vec3& x) {
  double v = ex5_p(x) * ex5_s(x);
  return Vec3(v, v, 0);
}
Mat3 ex5_ju(const Vec3& x) {
  Vec3 g = ex5_grad_p(x) * ex5_s(x) + ex5_p(x) * ex5_grad_s(x);
  Mat3 j = Mat3::Zero();
  j.row(0).head(2) = g.head(2).transpose();
  j.row(1).head(2) = g.head(2).transpose();
  return j;
}

}  // namespace

const std::vector<ExampleInfo>& example_registry() {
  static const std::vector<ExampleInfo> reg = {
      {"example1", "2D smooth convergence test (rotational velocity)", true,
       FieldKind::curl, 2},
      {"example2", "3D smooth convergence test", true, FieldKind::curl, 3},
      {"example3", "3D stabilization ablation (curl, toggles s1/s2)", false,
       FieldKind::curl, 3},
      {"example4", "2D bubble ablation (curl, r=2, unenriched, s1 only)", false,
       FieldKind::curl, 2},
      {"example5", "2D circular interior layer with exact solution", false,
       FieldKind::curl, 2},
      {"example6", "2D interior layer, discontinuous inflow data (gamma=0)",
       false, FieldKind::curl, 2},
  };
  return reg;
}

AdvectionProblem example_problem(const std::string& id, FieldKind kind) {
  auto gamma1 = [](const Vec3&) { return 1.0; };
  if (id == "example1" || id == "example4") {
    AdvectionProblem p = manufactured_problem(
        id, id == "example4" ? FieldKind::curl : kind, 2, rot_beta,
        rot_beta_jac, gamma1, ex1_u, ex1_ju, false);
    return p;
  }
  if (id == "example2" || id == "example3") {
    return manufactured_problem(id, id == "example3" ? FieldKind::curl : kind,
                                3, ex2_beta, ex2_beta_jac,
                                [](const Vec3&) { return 8.0; }, ex2_u, ex2_ju,
                                false);
  }
  if (id == "example5") {
    return manufactured_problem(id, FieldKind::curl, 2, rot_beta, rot_beta_jac,
                                gamma1, ex5_u, ex5_ju, false);
  }
  if (id == "example6") {
    AdvectionProblem p;
    p.name = id;
    p.kind = FieldKind::curl;
    p.dim = 2;
    p.beta = [](const Vec3& x) { return Vec3(-x[1] - 1.0, x[0] + 1.0, 0); };
    p.beta_jacobian = [](const Vec3&) {
      Mat3 j = Mat3::Zero();
      j(0, 1) = -1;
      j(1, 0) = 1;
      return j;
    };
    p.gamma = [](const Vec3&) { return 0.0; };
    p.source = [](const Vec3&) { return Vec3::Zero(); };
    p.inflow = [](const Vec3& x) {
      return x[0] > 0.6 ? Vec3::Zero() : Vec3(1, 1, 0);
    };
    p.claims_coercive = false;
    return p;
  }
  throw std::invalid_argument("unknown example id: " + id);
}

}  // namespace lps
