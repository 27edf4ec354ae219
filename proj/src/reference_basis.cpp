#include "lps/reference_basis.hpp"

#include "lps/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace lps {

namespace {

std::mutex g_cache_mutex;

Vec3 ref_vertex(int k) {
  switch (k) {
    case 0: return Vec3(0, 0, 0);
    case 1: return Vec3(1, 0, 0);
    case 2: return Vec3(0, 1, 0);
    default: return Vec3(0, 0, 1);
  }
}

// Local facet k = reference vertices except k, ascending.
std::vector<int> facet_vertices(int dim, int k) {
  std::vector<int> out;
  for (int j = 0; j <= dim; ++j)
    if (j != k) out.push_back(j);
  return out;
}

const int kEdgePairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

Vec3 ref_facet_outward_normal(int dim, int k) {
  // Reference simplex facets: facet 0 is the slanted one, facet j (j>=1)
  // lies in the plane x_{j-1} = 0.
  if (k == 0) {
    Vec3 n = Vec3::Zero();
    for (int v = 0; v < dim; ++v) n[v] = 1.0;
    return n.normalized();
  }
  Vec3 n = Vec3::Zero();
  n[k - 1] = -1.0;
  return n;
}

std::vector<VectorPoly> monomial_fields(int r, int dim) {
  std::vector<VectorPoly> out;
  for (int c = 0; c < dim; ++c)
    for (const auto& e : monomial_exponents(dim, r)) {
      VectorPoly f;
      f.comp[c] = Polynomial::monomial(e);
      out.push_back(f);
    }
  return out;
}

VectorPoly combine(const std::vector<VectorPoly>& fields, const Eigen::VectorXd& c) {
  VectorPoly out;
  for (int j = 0; j < c.size(); ++j) {
    if (c[j] == 0.0) continue;
    for (int k = 0; k < 3; ++k) out.comp[k] += fields[j].comp[k] * c[j];
  }
  return out;
}

Eigen::MatrixXd field_gram(const std::vector<VectorPoly>& fields, int dim,
                           int quad_degree) {
  const QuadratureRule& rule = simplex_rule(dim, quad_degree);
  const int n = static_cast<int>(fields.size());
  Eigen::MatrixXd vals(3 * rule.size(), n);
  for (int j = 0; j < n; ++j)
    for (std::size_t q = 0; q < rule.size(); ++q)
      vals.block<3, 1>(3 * q, j) = std::sqrt(rule.weights[q]) * fields[j].value(rule.points[q]);
  return vals.transpose() * vals;
}

}  // namespace

std::vector<VectorPoly> orthonormalize_fields(const std::vector<VectorPoly>& fields,
                                              int dim, int quad_degree) {
  Eigen::MatrixXd G = field_gram(fields, dim, quad_degree);
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("ill-conditioned-basis: Gram factorization failed");
  Eigen::MatrixXd Linv =
      llt.matrixL().solve(Eigen::MatrixXd::Identity(G.rows(), G.cols()));
  // Rows of Linv give the orthonormal combinations.
  std::vector<VectorPoly> out;
  for (int i = 0; i < G.rows(); ++i)
    out.push_back(combine(fields, Linv.row(i).transpose()));
  return out;
}

int poly_space_dim(int r, int dim) {
  if (dim == 1) return r + 1;
  if (dim == 2) return (r + 1) * (r + 2) / 2;
  return (r + 1) * (r + 2) * (r + 3) / 6;
}

double legendre01(int k, double t) {
  // Legendre on [-1,1], shifted, normalized to unit L2([0,1]) norm.
  double x = 2.0 * t - 1.0;
  double p0 = 1.0, p1 = x;
  double p = (k == 0) ? p0 : p1;
  for (int n = 1; n < k; ++n) {
    p = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
    p0 = p1;
    p1 = p;
  }
  return p * std::sqrt(2.0 * k + 1.0);
}

const std::vector<Polynomial>& face_scalar_basis(int r) {
  static std::map<int, std::vector<Polynomial>> cache;
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto it = cache.find(r);
  if (it != cache.end()) return it->second;
  std::vector<VectorPoly> fields;
  for (const auto& e : monomial_exponents(2, r)) {
    VectorPoly f;
    f.comp[0] = Polynomial::monomial(e);
    fields.push_back(f);
  }
  // Orthonormalize scalars through the x-slot of VectorPoly.
  auto on = orthonormalize_fields(fields, 2, 2 * r + 2);
  std::vector<Polynomial> out;
  for (auto& f : on) out.push_back(f.comp[0]);
  return cache.emplace(r, std::move(out)).first->second;
}

const std::vector<VectorPoly>& face_interior_tangential_basis(int r) {
  static std::map<int, std::vector<VectorPoly>> cache;
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto it = cache.find(r);
  if (it != cache.end()) return it->second;

  std::vector<VectorPoly> span;
  for (int c = 0; c < 2; ++c)
    for (const auto& e : monomial_exponents(2, r)) {
      VectorPoly f;
      f.comp[c] = Polynomial::monomial(e);
      span.push_back(f);
    }
  const int n = static_cast<int>(span.size());
  // Edge tangential moment constraints on the three reference edges.
  const QuadratureRule& rule1d = simplex_rule(1, 2 * r + 2);
  Eigen::MatrixXd C(3 * (r + 1), n);
  const Vec3 ev[3][2] = {{ref_vertex(0), ref_vertex(1)},
                         {ref_vertex(0), ref_vertex(2)},
                         {ref_vertex(1), ref_vertex(2)}};
  for (int e = 0; e < 3; ++e) {
    Vec3 a = ev[e][0], b = ev[e][1];
    for (int m = 0; m <= r; ++m)
      for (int j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t q = 0; q < rule1d.size(); ++q) {
          double t = rule1d.points[q][0];
          s += rule1d.weights[q] * span[j].value(a + t * (b - a)).dot(b - a) *
               legendre01(m, t);
        }
        C(e * (r + 1) + m, j) = s;
      }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
  const int expected = r * r - 1;
  std::vector<VectorPoly> kernel;
  for (int j = n - expected; j < n; ++j) {
    double sv = (j < svd.singularValues().size()) ? svd.singularValues()[j] : 0.0;
    if (sv > 1e-8 * svd.singularValues()[0])
      throw std::runtime_error("face tangential kernel has unexpected dimension");
    kernel.push_back(combine(span, svd.matrixV().col(j)));
  }
  auto out = kernel.empty() ? kernel : orthonormalize_fields(kernel, 2, 2 * r + 2);
  return cache.emplace(r, std::move(out)).first->second;
}

namespace {

using Functional = std::function<double(const VectorPoly&)>;

struct FunctionalSet {
  std::vector<Functional> items;
  std::vector<TraceSignature> signatures;
  int n_shared = 0;
};

FunctionalSet shared_functionals(FieldKind kind, int r, int dim) {
  FunctionalSet fs;
  const QuadratureRule& rule1d = simplex_rule(1, 2 * r + 6);
  auto edge_moment = [&rule1d](const Vec3& a, const Vec3& b, int m) {
    return [&rule1d, a, b, m](const VectorPoly& v) {
      double s = 0;
      for (std::size_t q = 0; q < rule1d.size(); ++q) {
        double t = rule1d.points[q][0];
        s += rule1d.weights[q] * v.value(a + t * (b - a)).dot(b - a) * legendre01(m, t);
      }
      return s;
    };
  };
  if (kind == FieldKind::curl) {
    if (dim == 2) {
      for (int k = 0; k < 3; ++k) {
        auto fv = facet_vertices(2, k);
        for (int m = 0; m <= r; ++m) {
          fs.items.push_back(edge_moment(ref_vertex(fv[0]), ref_vertex(fv[1]), m));
          fs.signatures.push_back({TraceSignature::Entity::facet, k, m});
        }
      }
    } else {
      for (int e = 0; e < 6; ++e) {
        for (int m = 0; m <= r; ++m) {
          fs.items.push_back(edge_moment(ref_vertex(kEdgePairs[e][0]),
                                         ref_vertex(kEdgePairs[e][1]), m));
          fs.signatures.push_back({TraceSignature::Entity::edge, e, m});
        }
      }
      const int nface = r * r - 1;
      if (nface > 0) {
        const auto& t0 = face_interior_tangential_basis(r);
        const QuadratureRule& rule2d = simplex_rule(2, 2 * r + 6);
        for (int k = 0; k < 4; ++k) {
          auto fv = facet_vertices(3, k);
          Vec3 a = ref_vertex(fv[0]);
          Eigen::Matrix<double, 3, 2> A;
          A.col(0) = ref_vertex(fv[1]) - a;
          A.col(1) = ref_vertex(fv[2]) - a;
          for (int m = 0; m < nface; ++m) {
            const VectorPoly* w = &t0[m];
            fs.items.push_back([&rule2d, a, A, w](const VectorPoly& v) {
              double s = 0;
              for (std::size_t q = 0; q < rule2d.size(); ++q) {
                const Vec3& xi = rule2d.points[q];
                Vec3 p = a + A * xi.head<2>();
                Eigen::Vector2d tangential = A.transpose() * v.value(p);
                s += rule2d.weights[q] * tangential.dot(w->value(xi).head<2>());
              }
              return s;
            });
            fs.signatures.push_back({TraceSignature::Entity::face, k, m});
          }
        }
      }
    }
  } else {
    for (int k = 0; k <= dim; ++k) {
      auto fv = facet_vertices(dim, k);
      Vec3 n = ref_facet_outward_normal(dim, k);
      if (dim == 2) {
        Vec3 a = ref_vertex(fv[0]), b = ref_vertex(fv[1]);
        double len = (b - a).norm();
        for (int m = 0; m <= r; ++m) {
          fs.items.push_back([&rule1d, a, b, n, len, m](const VectorPoly& v) {
            double s = 0;
            for (std::size_t q = 0; q < rule1d.size(); ++q) {
              double t = rule1d.points[q][0];
              s += rule1d.weights[q] * v.value(a + t * (b - a)).dot(n) *
                   legendre01(m, t) * len;
            }
            return s;
          });
          fs.signatures.push_back({TraceSignature::Entity::facet, k, m});
        }
      } else {
        const auto& scal = face_scalar_basis(r);
        const QuadratureRule& rule2d = simplex_rule(2, 2 * r + 6);
        Vec3 a = ref_vertex(fv[0]);
        Eigen::Matrix<double, 3, 2> A;
        A.col(0) = ref_vertex(fv[1]) - a;
        A.col(1) = ref_vertex(fv[2]) - a;
        double jac = A.col(0).cross(A.col(1)).norm();
        for (std::size_t m = 0; m < scal.size(); ++m) {
          const Polynomial* qk = &scal[m];
          fs.items.push_back([&rule2d, a, A, n, jac, qk](const VectorPoly& v) {
            double s = 0;
            for (std::size_t q = 0; q < rule2d.size(); ++q) {
              const Vec3& xi = rule2d.points[q];
              Vec3 p = a + A * xi.head<2>();
              s += rule2d.weights[q] * v.value(p).dot(n) * qk->evaluate(xi) * jac;
            }
            return s;
          });
          fs.signatures.push_back({TraceSignature::Entity::facet, k, static_cast<int>(m)});
        }
      }
    }
  }
  fs.n_shared = static_cast<int>(fs.items.size());
  return fs;
}

ReferenceBasis build_reference_basis(FieldKind kind, int r, int dim) {
  if (r < 1 || r > 3 || (dim != 2 && dim != 3))
    throw std::invalid_argument("unsupported-element: kind/order/dim combination");
  ReferenceBasis rb;
  rb.kind = kind;
  rb.order = r;
  rb.dim = dim;

  auto span = orthonormalize_fields(monomial_fields(r, dim), dim, 2 * r + 2);
  const int n = static_cast<int>(span.size());
  FunctionalSet fs = shared_functionals(kind, r, dim);

  // Interior moments against an orthonormal basis of the trace-free subspace.
  const int n_interior = n - fs.n_shared;
  if (n_interior > 0) {
    Eigen::MatrixXd T(fs.n_shared, n);
    for (int i = 0; i < fs.n_shared; ++i)
      for (int j = 0; j < n; ++j) T(i, j) = fs.items[i](span[j]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(T, Eigen::ComputeFullV);
    std::vector<VectorPoly> kernel;
    for (int j = n - n_interior; j < n; ++j)
      kernel.push_back(combine(span, svd.matrixV().col(j)));
    auto weights = orthonormalize_fields(kernel, dim, 2 * r + 2);
    const QuadratureRule& rule = simplex_rule(dim, 2 * r + 6);
    for (int m = 0; m < n_interior; ++m) {
      auto w = std::make_shared<VectorPoly>(weights[m]);
      fs.items.push_back([&rule, w](const VectorPoly& v) {
        double s = 0;
        for (std::size_t q = 0; q < rule.size(); ++q)
          s += rule.weights[q] * v.value(rule.points[q]).dot(w->value(rule.points[q]));
        return s;
      });
      fs.signatures.push_back({TraceSignature::Entity::interior, 0, m});
    }
  }

  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = fs.items[i](span[j]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  double cond = svd.singularValues()[0] / svd.singularValues()[n - 1];
  if (!(cond < 1e8))
    throw std::runtime_error("ill-conditioned-basis: reference moment matrix");
  Eigen::MatrixXd Minv = M.inverse();
  for (int k = 0; k < n; ++k) rb.functions.push_back(combine(span, Minv.col(k)));
  rb.trace_signature = fs.signatures;
  rb.n_shared = fs.n_shared;
  return rb;
}

std::vector<VectorPoly> bubble_directions(FieldKind kind, int dim) {
  auto lambda = barycentric_polynomials(dim);
  std::vector<VectorPoly> dirs;
  auto vec_poly = [](const Polynomial& p, const Vec3& d) {
    VectorPoly f;
    for (int c = 0; c < 3; ++c)
      if (d[c] != 0.0) f.comp[c] = p * d[c];
    return f;
  };
  if (dim == 3) {
    if (kind == FieldKind::curl) {
      // b_i = product of the three lambdas excluding lambda_i, times the unit
      // outward normal of the face opposite vertex i (i = 1, 2, 3).
      dirs.push_back(vec_poly(lambda[2] * lambda[3] * lambda[0], Vec3(-1, 0, 0)));
      dirs.push_back(vec_poly(lambda[3] * lambda[0] * lambda[1], Vec3(0, -1, 0)));
      dirs.push_back(vec_poly(lambda[0] * lambda[1] * lambda[2], Vec3(0, 0, -1)));
    } else {
      // b_i = lambda_0 lambda_i times the unit tangent of edge (0, i).
      dirs.push_back(vec_poly(lambda[0] * lambda[1], Vec3(1, 0, 0)));
      dirs.push_back(vec_poly(lambda[0] * lambda[2], Vec3(0, 1, 0)));
      dirs.push_back(vec_poly(lambda[0] * lambda[3], Vec3(0, 0, 1)));
    }
  } else {
    if (kind == FieldKind::curl) {
      dirs.push_back(vec_poly(lambda[2] * lambda[0], Vec3(-1, 0, 0)));
      dirs.push_back(vec_poly(lambda[0] * lambda[1], Vec3(0, -1, 0)));
    } else {
      dirs.push_back(vec_poly(lambda[0] * lambda[1], Vec3(1, 0, 0)));
      dirs.push_back(vec_poly(lambda[0] * lambda[2], Vec3(0, 1, 0)));
    }
  }
  return dirs;
}

BubbleBasis build_bubble_basis(FieldKind kind, int r, int dim) {
  if (r < 1) throw std::invalid_argument("bubble_basis: r must be >= 1");
  BubbleBasis bb;
  bb.kind = kind;
  bb.order = r;
  bb.dim = dim;
  auto dirs = bubble_directions(kind, dim);
  for (const auto& d : dirs)
    for (const auto& e : monomial_exponents(dim, r - 1))
      bb.functions.push_back(d * Polynomial::monomial(e));

  // Rank-revealing removal of the overlap with [P_r]^dim.
  const QuadratureRule& rule = simplex_rule(dim, 2 * (r + 2));
  auto wspan = monomial_fields(r, dim);
  const int nw = static_cast<int>(wspan.size());
  const int nb = static_cast<int>(bb.functions.size());
  Eigen::MatrixXd W(3 * rule.size(), nw), B(3 * rule.size(), nb);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    double sw = std::sqrt(rule.weights[q]);
    for (int j = 0; j < nw; ++j)
      W.block<3, 1>(3 * q, j) = sw * wspan[j].value(rule.points[q]);
    for (int j = 0; j < nb; ++j)
      B.block<3, 1>(3 * q, j) = sw * bb.functions[j].value(rule.points[q]);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
  Eigen::MatrixXd Qthin = qr.householderQ() * Eigen::MatrixXd::Identity(W.rows(), nw);
  Eigen::MatrixXd R = B - Qthin * (Qthin.transpose() * B);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rrqr(R);
  Eigen::MatrixXd Rmat = rrqr.matrixR();
  double pivot0 = std::abs(Rmat(0, 0));
  for (int k = 0; k < std::min<int>(nb, Rmat.rows()); ++k) {
    if (std::abs(Rmat(k, k)) > 1e-10 * pivot0)
      bb.retained.push_back(rrqr.colsPermutation().indices()[k]);
  }
  std::sort(bb.retained.begin(), bb.retained.end());
  return bb;
}

}  // namespace

const ReferenceBasis& reference_basis(FieldKind kind, int r, int dim) {
  static std::map<std::tuple<int, int, int>, ReferenceBasis> cache;
  auto key = std::make_tuple(static_cast<int>(kind), r, dim);
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  ReferenceBasis rb = build_reference_basis(kind, r, dim);
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  return cache.emplace(key, std::move(rb)).first->second;
}

const BubbleBasis& bubble_basis(FieldKind kind, int r, int dim) {
  static std::map<std::tuple<int, int, int>, BubbleBasis> cache;
  auto key = std::make_tuple(static_cast<int>(kind), r, dim);
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  BubbleBasis bb = build_bubble_basis(kind, r, dim);
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  return cache.emplace(key, std::move(bb)).first->second;
}

const ProjectionBasis& projection_basis(int r, int dim) {
  static std::map<std::pair<int, int>, ProjectionBasis> cache;
  auto key = std::make_pair(r, dim);
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  ProjectionBasis pb;
  pb.order = r - 1;
  pb.dim = dim;
  auto fields = monomial_fields(r - 1, dim);
  pb.functions = orthonormalize_fields(fields, dim, 2 * r + 2);
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  return cache.emplace(key, std::move(pb)).first->second;
}

}  // namespace lps
