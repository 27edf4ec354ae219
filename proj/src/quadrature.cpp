#include "lps/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace lps {

std::array<double, 4> QuadratureRule::barycentric(std::size_t i) const {
  const Vec3& p = points[i];
  double l0 = 1.0;
  for (int v = 0; v < dim; ++v) l0 -= p[v];
  return {l0, p[0], dim >= 2 ? p[1] : 0.0, dim >= 3 ? p[2] : 0.0};
}

namespace {

struct Rule1D {
  std::vector<double> points;   // on [0,1]
  std::vector<double> weights;  // absorb the weight (1-t)^alpha
};

// Gauss-Jacobi rule with weight (1-t)^alpha on [0,1] via Golub-Welsch:
// eigen-decomposition of the symmetric tridiagonal recurrence matrix for
// Jacobi polynomials P_n^{(alpha,0)} on [-1,1].
Rule1D gauss_jacobi01(int n, int alpha) {
  const double a = alpha, b = 0.0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double dk;
    if (k == 0)
      dk = (b - a) / (a + b + 2.0);
    else {
      double s = 2.0 * k + a + b;
      dk = (b * b - a * a) / (s * (s + 2.0));
    }
    J(k, k) = dk;
    if (k >= 1) {
      double e2;
      if (k == 1)
        e2 = 4.0 * (a + 1.0) * (b + 1.0) /
             ((a + b + 2.0) * (a + b + 2.0) * (a + b + 3.0));
      else {
        double kk = k, s = 2.0 * kk + a + b;
        e2 = 4.0 * kk * (kk + a) * (kk + b) * (kk + a + b) /
             (s * s * (s + 1.0) * (s - 1.0));
      }
      J(k, k - 1) = J(k - 1, k) = std::sqrt(e2);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  // mu0 = int_{-1}^{1} (1-x)^a dx = 2^{a+1} / (a+1)
  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);
  Rule1D r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()[i];
    double w = mu0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    // Map [-1,1] -> [0,1]: t = (1+x)/2, weight picks up (1/2)^{a+1}.
    r.points[i] = 0.5 * (1.0 + x);
    r.weights[i] = w * std::pow(0.5, a + 1.0);
  }
  return r;
}

QuadratureRule build_rule(int dim, int degree) {
  QuadratureRule rule;
  rule.dim = dim;
  rule.exactness_degree = degree;
  const int n = degree / 2 + 1;
  if (dim == 1) {
    Rule1D g = gauss_jacobi01(n, 0);
    for (int i = 0; i < n; ++i) {
      rule.points.push_back(Vec3(g.points[i], 0, 0));
      rule.weights.push_back(g.weights[i]);
    }
  } else if (dim == 2) {
    // Conical product: x = xi, y = eta (1 - xi); Jacobian (1 - xi).
    Rule1D gx = gauss_jacobi01(n, 1), gy = gauss_jacobi01(n, 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double xi = gx.points[i], eta = gy.points[j];
        rule.points.push_back(Vec3(xi, eta * (1.0 - xi), 0));
        rule.weights.push_back(gx.weights[i] * gy.weights[j]);
      }
  } else {
    // x = xi, y = eta (1 - xi), z = zeta (1 - xi)(1 - eta);
    // Jacobian (1 - xi)^2 (1 - eta).
    Rule1D gx = gauss_jacobi01(n, 2), gy = gauss_jacobi01(n, 1),
           gz = gauss_jacobi01(n, 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double xi = gx.points[i], eta = gy.points[j], zeta = gz.points[k];
          rule.points.push_back(Vec3(xi, eta * (1.0 - xi),
                                     zeta * (1.0 - xi) * (1.0 - eta)));
          rule.weights.push_back(gx.weights[i] * gy.weights[j] * gz.weights[k]);
        }
  }
  return rule;
}

}  // namespace

const QuadratureRule& simplex_rule(int dim, int degree) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("simplex_rule: dim must be 1, 2 or 3");
  if (degree < 0) throw std::invalid_argument("simplex_rule: negative degree");
  if (degree > kMaxQuadratureDegree)
    throw std::invalid_argument("unsupported-degree: quadrature degree " +
                                std::to_string(degree) + " exceeds " +
                                std::to_string(kMaxQuadratureDegree));
  static std::map<std::pair<int, int>, QuadratureRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(dim, degree);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_rule(dim, degree)).first;
  return it->second;
}

int required_degree(int r, IntegralPurpose purpose) {
  if (r < 1) throw std::invalid_argument("required_degree: r must be >= 1");
  switch (purpose) {
    case IntegralPurpose::mass:
    case IntegralPurpose::advection:
    case IntegralPurpose::facet:
      return 2 * (r + 2);
    case IntegralPurpose::stabilization:
      return 2 * (r + 1);
  }
  return 2 * (r + 2);
}

}  // namespace lps
