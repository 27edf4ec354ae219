#include "lps/assembly.hpp"

#include "lps/operators.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace lps {

namespace {

int clamp_degree(int d) { return std::min(d, kMaxQuadratureDegree); }

int thread_count() {
#ifdef _OPENMP
  if (const char* env = std::getenv("LPS_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return std::min(n, omp_get_max_threads());
  }
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void validate(const AdvectionProblem& problem, const SimplicialMesh& mesh,
              const FeSpace& space, const LpsConfig& config) {
  if (problem.dim != mesh.dim || &space.mesh() != &mesh ||
      space.kind() != problem.kind || space.order() != config.r ||
      space.enriched() != config.enriched)
    throw std::runtime_error("configuration-error: mesh/space/config mismatch");
  if (!(config.solver_tol > 0 && config.solver_tol <= 1e-6))
    throw std::runtime_error("configuration-error: solver_tol out of range");
}

// Accumulates triplets and periodically folds them into the sparse matrix to
// bound peak memory on large 3D systems.
class TripletAccumulator {
 public:
  TripletAccumulator(int n, std::size_t limit) : A_(n, n), limit_(limit) {
    buffer_.reserve(limit);
  }
  void add(int i, int j, double v) {
    buffer_.emplace_back(i, j, v);
    if (buffer_.size() >= limit_) flush();
  }
  Eigen::SparseMatrix<double> take() {
    flush();
    A_.makeCompressed();
    return std::move(A_);
  }

 private:
  void flush() {
    if (buffer_.empty()) return;
    Eigen::SparseMatrix<double> chunk(A_.rows(), A_.cols());
    chunk.setFromTriplets(buffer_.begin(), buffer_.end());
    A_ += chunk;
    buffer_.clear();
  }
  Eigen::SparseMatrix<double> A_;
  std::vector<Eigen::Triplet<double>> buffer_;
  std::size_t limit_;
};

Mat3 value_transform(FieldKind kind, const AffineCellMap& m) {
  return kind == FieldKind::curl ? m.inverse_transpose : Mat3(m.linear / m.det);
}

struct CellBlock {
  Eigen::MatrixXd A;
  Eigen::VectorXd rhs;
};

struct FacetBlock {
  // Dense blocks over (side of v, side of u); [0][0] only on the boundary.
  Eigen::MatrixXd M[2][2];
  Eigen::VectorXd rhs[2];
  int n_sides = 1;
};

}  // namespace

int LpsConfig::volume_degree(const AdvectionProblem& p) const {
  int d = required_degree(r, IntegralPurpose::advection);
  if (!p.polynomial_coefficients) d += quadrature_bump;
  return clamp_degree(d);
}

int LpsConfig::facet_degree(const AdvectionProblem& p) const {
  int d = required_degree(r, IntegralPurpose::facet);
  if (!p.polynomial_coefficients) d += quadrature_bump;
  return clamp_degree(d);
}

Vec3 beta_bar(const AdvectionProblem& problem, const SimplicialMesh& mesh,
              int cell, int quad_degree) {
  const QuadratureRule& rule = simplex_rule(mesh.dim, quad_degree);
  const AffineCellMap& map = mesh.cell_maps[cell];
  Vec3 sum = Vec3::Zero();
  double wsum = 0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    sum += rule.weights[q] * problem.beta(map.to_physical(rule.points[q]));
    wsum += rule.weights[q];
  }
  return sum / wsum;
}

double cf_value(const SimplicialMesh& mesh, int facet, const VectorFieldFn& beta,
                int quad_degree) {
  FacetQuadrature fq = facet_quadrature(mesh, facet, quad_degree);
  Vec3 n = mesh.facet_normals[facet];
  double integral = 0, bmax = 0;
  for (std::size_t q = 0; q < fq.points.size(); ++q) {
    Vec3 b = beta(fq.points[q]);
    integral += fq.weights[q] * b.dot(n);
    bmax = std::max(bmax, b.norm());
  }
  double eps = 1e-12 * mesh.facet_areas[facet] * bmax;
  if (std::abs(integral) <= eps) return 1.0;
  return integral > 0 ? 1.0 : -1.0;
}

Eigen::MatrixXd fluctuation_apply(int r, int dim, const QuadratureRule& rule,
                                  const Eigen::MatrixXd& samples) {
  const ProjectionBasis& pb = projection_basis(r, dim);
  const int m = static_cast<int>(pb.functions.size());
  const int nq = static_cast<int>(rule.size());
  if (samples.rows() != 3 * nq)
    throw std::invalid_argument("fluctuation_apply: sample/rule size mismatch");
  Eigen::MatrixXd P(3 * nq, m), PW(3 * nq, m);
  for (int j = 0; j < m; ++j)
    for (int q = 0; q < nq; ++q) {
      Vec3 v = pb.functions[j].value(rule.points[q]);
      P.block<3, 1>(3 * q, j) = v;
      PW.block<3, 1>(3 * q, j) = rule.weights[q] * v;
    }
  return samples - P * (PW.transpose() * samples);
}

namespace {

struct AssemblyContext {
  const AdvectionProblem* problem;
  const SimplicialMesh* mesh;
  const FeSpace* space;
  const LpsConfig* config;
  const QuadratureRule* vol_rule;
  const QuadratureRule* facet_param_rule;
  BasisTabulation vol_tab;
  Eigen::MatrixXd proj_vals;    // projection basis at volume points
  Eigen::MatrixXd proj_vals_w;  // scaled by reference weights
  BoundaryClassification boundary;
  std::vector<double> cf;  // per facet, interior only meaningful
};

AssemblyContext make_context(const AdvectionProblem& problem,
                             const SimplicialMesh& mesh, const FeSpace& space,
                             const LpsConfig& config) {
  AssemblyContext ctx;
  ctx.problem = &problem;
  ctx.mesh = &mesh;
  ctx.space = &space;
  ctx.config = &config;
  ctx.vol_rule = &simplex_rule(mesh.dim, config.volume_degree(problem));
  ctx.facet_param_rule = &simplex_rule(mesh.dim - 1, config.facet_degree(problem));
  ctx.vol_tab = space.tabulate_span(ctx.vol_rule->points);

  const ProjectionBasis& pb = projection_basis(config.r, mesh.dim);
  const int m = static_cast<int>(pb.functions.size());
  const int nq = static_cast<int>(ctx.vol_rule->size());
  ctx.proj_vals.resize(3 * nq, m);
  ctx.proj_vals_w.resize(3 * nq, m);
  for (int j = 0; j < m; ++j)
    for (int q = 0; q < nq; ++q) {
      Vec3 v = pb.functions[j].value(ctx.vol_rule->points[q]);
      ctx.proj_vals.block<3, 1>(3 * q, j) = v;
      ctx.proj_vals_w.block<3, 1>(3 * q, j) = ctx.vol_rule->weights[q] * v;
    }

  ctx.boundary = classify_boundary(mesh, problem.beta,
                                   config.facet_degree(problem));
  ctx.cf.assign(mesh.n_facets(), 1.0);
  if (config.enable_s1)
    for (std::size_t f = 0; f < mesh.n_facets(); ++f)
      if (!mesh.facet_on_boundary(f))
        ctx.cf[f] = cf_value(mesh, f, problem.beta, config.facet_degree(problem));
  return ctx;
}

CellBlock cell_kernel(const AssemblyContext& ctx, int c) {
  const AdvectionProblem& p = *ctx.problem;
  const FeSpace& sp = *ctx.space;
  const QuadratureRule& rule = *ctx.vol_rule;
  const AffineCellMap& map = ctx.mesh->cell_maps[c];
  const int n = sp.n_local();
  const int nq = static_cast<int>(rule.size());
  const FieldKind kind = p.kind;

  const Eigen::MatrixXd& C = sp.cell_coefficients(c);
  Eigen::MatrixXd RefV = ctx.vol_tab.values * C;
  Eigen::MatrixXd RefJ = ctx.vol_tab.jacobians * C;
  Mat3 P = value_transform(kind, map);
  Mat3 Binv = map.inverse;

  Vec3 bbar = Vec3::Zero();
  double wsum = 0;
  for (int q = 0; q < nq; ++q) {
    bbar += rule.weights[q] * p.beta(map.to_physical(rule.points[q]));
    wsum += rule.weights[q];
  }
  bbar /= wsum;

  Eigen::MatrixXd Phi(3 * nq, n), PhiWg(3 * nq, n), LstarW(3 * nq, n),
      Lbar(3 * nq, n), LbarW(3 * nq, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int q = 0; q < nq; ++q) {
    Vec3 x = map.to_physical(rule.points[q]);
    double wphys = rule.weights[q] * map.det;
    Vec3 beta = p.beta(x);
    Mat3 jbeta = p.beta_jacobian(x);
    double gamma = p.gamma(x);
    Vec3 f = p.source(x);
    for (int i = 0; i < n; ++i) {
      Vec3 phi = P * RefV.block<3, 1>(3 * q, i);
      Mat3 jhat;
      for (int col = 0; col < 3; ++col)
        jhat.col(col) = RefJ.block<3, 1>(9 * q + 3 * col, i);
      Mat3 jphi = P * jhat * Binv;
      Phi.block<3, 1>(3 * q, i) = phi;
      PhiWg.block<3, 1>(3 * q, i) = (wphys * gamma) * phi;
      LstarW.block<3, 1>(3 * q, i) =
          wphys * adjoint_advection_apply(kind, phi, jphi, beta, jbeta);
      Vec3 lb = -(jphi * bbar);
      Lbar.block<3, 1>(3 * q, i) = lb;
      LbarW.block<3, 1>(3 * q, i) = wphys * lb;
      rhs[i] += wphys * f.dot(phi);
    }
  }

  CellBlock blk;
  blk.A = PhiWg.transpose() * Phi + LstarW.transpose() * Phi;
  blk.rhs = rhs;
  if (ctx.config->enable_s2) {
    Eigen::MatrixXd coeff = ctx.proj_vals_w.transpose() * Lbar;
    Eigen::MatrixXd kappa = Lbar - ctx.proj_vals * coeff;
    Eigen::MatrixXd kappaW = LbarW - (map.det * ctx.proj_vals_w) * coeff;
    blk.A += ctx.mesh->cell_diameters[c] * (kappaW.transpose() * kappa);
  }
  return blk;
}

FacetBlock facet_kernel(const AssemblyContext& ctx, int f) {
  const AdvectionProblem& p = *ctx.problem;
  const FeSpace& sp = *ctx.space;
  const SimplicialMesh& mesh = *ctx.mesh;
  const QuadratureRule& prule = *ctx.facet_param_rule;
  const int n = sp.n_local();
  const int nq = static_cast<int>(prule.size());

  FacetQuadrature fq = facet_quadrature(mesh, f, prule.exactness_degree);
  FacetGeometry geom = facet_geometry(mesh, f);
  const bool interior = !mesh.facet_on_boundary(f);

  FacetBlock blk;
  blk.n_sides = interior ? 2 : 1;
  Eigen::MatrixXd Psi[2];
  for (int s = 0; s < blk.n_sides; ++s) {
    int c = geom.adjacent_cells[s];
    const BasisTabulation& tab =
        sp.facet_span_tabulation(c, geom.local_facet_indices[s], prule);
    Eigen::MatrixXd ref = tab.values * sp.cell_coefficients(c);
    Mat3 P = value_transform(p.kind, mesh.cell_maps[c]);
    Psi[s].resize(3 * nq, n);
    for (int q = 0; q < nq; ++q)
      Psi[s].middleRows<3>(3 * q) = P * ref.middleRows<3>(3 * q);
  }

  Eigen::VectorXd wb(nq);
  for (int q = 0; q < nq; ++q)
    wb[q] = fq.weights[q] * p.beta(fq.points[q]).dot(geom.normal);

  auto weighted = [&](const Eigen::MatrixXd& B) {
    Eigen::MatrixXd out(3 * nq, n);
    for (int q = 0; q < nq; ++q) out.middleRows<3>(3 * q) = wb[q] * B.middleRows<3>(3 * q);
    return out;
  };

  if (interior) {
    const double sign[2] = {1.0, -1.0};
    double cf = ctx.cf[f];
    for (int s = 0; s < 2; ++s) {
      Eigen::MatrixXd PsiW = weighted(Psi[s]);
      for (int t = 0; t < 2; ++t) {
        double coeff = 0.5 * sign[s];
        if (ctx.config->enable_s1) coeff += cf * sign[s] * sign[t];
        blk.M[s][t] = coeff * (PsiW.transpose() * Psi[t]);
      }
    }
    blk.rhs[0] = Eigen::VectorXd::Zero(n);
    blk.rhs[1] = Eigen::VectorXd::Zero(n);
    return blk;
  }

  blk.rhs[0] = Eigen::VectorXd::Zero(n);
  if (ctx.boundary.is_inflow[f]) {
    blk.M[0][0] = Eigen::MatrixXd::Zero(n, n);
    for (int q = 0; q < nq; ++q) {
      Vec3 g = p.inflow(fq.points[q]);
      for (int i = 0; i < n; ++i)
        blk.rhs[0][i] -= wb[q] * g.dot(Psi[0].block<3, 1>(3 * q, i));
    }
  } else {
    Eigen::MatrixXd PsiW = weighted(Psi[0]);
    blk.M[0][0] = PsiW.transpose() * Psi[0];
  }
  return blk;
}

}  // namespace

SparseSystem assemble(const AdvectionProblem& problem, const SimplicialMesh& mesh,
                      const FeSpace& space, const LpsConfig& config) {
  validate(problem, mesh, space, config);
  AssemblyContext ctx = make_context(problem, mesh, space, config);
  const int n = space.n_local();
  const int N = space.n_dofs();
  const int nt = thread_count();

  SparseSystem sys;
  sys.dof_count = N;
  sys.rhs = Eigen::VectorXd::Zero(N);
  TripletAccumulator acc(N, std::size_t(8) << 20);

  const int cell_chunk = 1024, facet_chunk = 1024;
  std::vector<CellBlock> cell_blocks(cell_chunk);
  for (int start = 0; start < static_cast<int>(mesh.n_cells()); start += cell_chunk) {
    int end = std::min(start + cell_chunk, static_cast<int>(mesh.n_cells()));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(nt)
#endif
    for (int c = start; c < end; ++c) cell_blocks[c - start] = cell_kernel(ctx, c);
    for (int c = start; c < end; ++c) {
      const CellBlock& blk = cell_blocks[c - start];
      const auto& dofs = space.cell_dofs(c);
      for (int i = 0; i < n; ++i) {
        sys.rhs[dofs[i]] += blk.rhs[i];
        for (int j = 0; j < n; ++j) acc.add(dofs[i], dofs[j], blk.A(i, j));
      }
    }
  }

  std::vector<FacetBlock> facet_blocks(facet_chunk);
  for (int start = 0; start < static_cast<int>(mesh.n_facets()); start += facet_chunk) {
    int end = std::min(start + facet_chunk, static_cast<int>(mesh.n_facets()));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(nt)
#endif
    for (int f = start; f < end; ++f) facet_blocks[f - start] = facet_kernel(ctx, f);
    for (int f = start; f < end; ++f) {
      const FacetBlock& blk = facet_blocks[f - start];
      for (int s = 0; s < blk.n_sides; ++s) {
        const auto& rdofs = space.cell_dofs(mesh.facet_cells[f][s]);
        for (int i = 0; i < n; ++i) sys.rhs[rdofs[i]] += blk.rhs[s][i];
        for (int t = 0; t < blk.n_sides; ++t) {
          const auto& cdofs = space.cell_dofs(mesh.facet_cells[f][t]);
          const Eigen::MatrixXd& M = blk.M[s][t];
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) acc.add(rdofs[i], cdofs[j], M(i, j));
        }
      }
    }
  }
  sys.matrix = acc.take();
  return sys;
}

SparseSystem assemble_serial(const AdvectionProblem& problem,
                             const SimplicialMesh& mesh, const FeSpace& space,
                             const LpsConfig& config) {
  validate(problem, mesh, space, config);
  const int n = space.n_local();
  const int N = space.n_dofs();
  const FieldKind kind = problem.kind;
  const QuadratureRule& vrule = simplex_rule(mesh.dim, config.volume_degree(problem));
  const int facet_deg = config.facet_degree(problem);
  BoundaryClassification boundary =
      classify_boundary(mesh, problem.beta, facet_deg);

  std::vector<Eigen::Triplet<double>> trips;
  SparseSystem sys;
  sys.dof_count = N;
  sys.rhs = Eigen::VectorXd::Zero(N);

  // Local basis evaluation straight from the span polynomials.
  auto basis_value = [&](int c, int i, const Vec3& xref) {
    const Eigen::MatrixXd& C = space.cell_coefficients(c);
    Vec3 v = Vec3::Zero();
    for (int j = 0; j < n; ++j) v += C(j, i) * space.span()[j].value(xref);
    return Vec3(value_transform(kind, mesh.cell_maps[c]) * v);
  };
  auto basis_jacobian = [&](int c, int i, const Vec3& xref) {
    const Eigen::MatrixXd& C = space.cell_coefficients(c);
    Mat3 J = Mat3::Zero();
    for (int j = 0; j < n; ++j) J += C(j, i) * space.span()[j].jacobian(xref);
    const AffineCellMap& map = mesh.cell_maps[c];
    return Mat3(value_transform(kind, map) * J * map.inverse);
  };

  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const AffineCellMap& map = mesh.cell_maps[c];
    Vec3 bbar = beta_bar(problem, mesh, c, vrule.exactness_degree);
    const auto& dofs = space.cell_dofs(c);
    const int nq = static_cast<int>(vrule.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd Lbar(3 * nq, n);
    for (int q = 0; q < nq; ++q) {
      Vec3 x = map.to_physical(vrule.points[q]);
      double w = vrule.weights[q] * map.det;
      Vec3 beta = problem.beta(x);
      Mat3 jbeta = problem.beta_jacobian(x);
      double gamma = problem.gamma(x);
      Vec3 f = problem.source(x);
      for (int i = 0; i < n; ++i) {
        Vec3 phi_i = basis_value(c, i, vrule.points[q]);
        Mat3 jphi_i = basis_jacobian(c, i, vrule.points[q]);
        Vec3 lstar_i = adjoint_advection_apply(kind, phi_i, jphi_i, beta, jbeta);
        Lbar.block<3, 1>(3 * q, i) = -(jphi_i * bbar);
        sys.rhs[dofs[i]] += w * f.dot(phi_i);
        for (int j = 0; j < n; ++j) {
          Vec3 phi_j = basis_value(c, j, vrule.points[q]);
          A(i, j) += w * (gamma * phi_i.dot(phi_j) + phi_j.dot(lstar_i));
        }
      }
    }
    if (config.enable_s2) {
      Eigen::MatrixXd kappa = fluctuation_apply(config.r, mesh.dim, vrule, Lbar);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0;
          for (int q = 0; q < nq; ++q)
            s += vrule.weights[q] * map.det *
                 kappa.block<3, 1>(3 * q, i).dot(kappa.block<3, 1>(3 * q, j));
          A(i, j) += mesh.cell_diameters[c] * s;
        }
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) trips.emplace_back(dofs[i], dofs[j], A(i, j));
  }

  for (std::size_t f = 0; f < mesh.n_facets(); ++f) {
    FacetQuadrature fq = facet_quadrature(mesh, f, facet_deg);
    FacetGeometry geom = facet_geometry(mesh, f);
    const int nq = static_cast<int>(fq.points.size());
    const bool interior = !mesh.facet_on_boundary(f);
    const int nsides = interior ? 2 : 1;
    double cf = (interior && config.enable_s1)
                    ? cf_value(mesh, f, problem.beta, facet_deg)
                    : 1.0;
    std::vector<Eigen::MatrixXd> vals(nsides, Eigen::MatrixXd(3 * nq, n));
    for (int s = 0; s < nsides; ++s) {
      int c = geom.adjacent_cells[s];
      for (int q = 0; q < nq; ++q) {
        Vec3 xref = mesh.cell_maps[c].to_reference(fq.points[q]);
        for (int i = 0; i < n; ++i)
          vals[s].block<3, 1>(3 * q, i) = basis_value(c, i, xref);
      }
    }
    if (interior) {
      const double sign[2] = {1.0, -1.0};
      for (int q = 0; q < nq; ++q) {
        double wb = fq.weights[q] * problem.beta(fq.points[q]).dot(geom.normal);
        for (int s = 0; s < 2; ++s) {
          const auto& rdofs = space.cell_dofs(geom.adjacent_cells[s]);
          for (int t = 0; t < 2; ++t) {
            const auto& cdofs = space.cell_dofs(geom.adjacent_cells[t]);
            double coeff = 0.5 * sign[s] +
                           (config.enable_s1 ? cf * sign[s] * sign[t] : 0.0);
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j)
                trips.emplace_back(rdofs[i], cdofs[j],
                                   coeff * wb *
                                       vals[s].block<3, 1>(3 * q, i)
                                           .dot(vals[t].block<3, 1>(3 * q, j)));
          }
        }
      }
    } else {
      const auto& dofs = space.cell_dofs(geom.adjacent_cells[0]);
      for (int q = 0; q < nq; ++q) {
        double wb = fq.weights[q] * problem.beta(fq.points[q]).dot(geom.normal);
        if (boundary.is_inflow[f]) {
          Vec3 g = problem.inflow(fq.points[q]);
          for (int i = 0; i < n; ++i)
            sys.rhs[dofs[i]] -= wb * g.dot(vals[0].block<3, 1>(3 * q, i));
        } else {
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              trips.emplace_back(dofs[i], dofs[j],
                                 wb * vals[0].block<3, 1>(3 * q, i)
                                          .dot(vals[0].block<3, 1>(3 * q, j)));
        }
      }
    }
  }
  sys.matrix.resize(N, N);
  sys.matrix.setFromTriplets(trips.begin(), trips.end());
  sys.matrix.makeCompressed();
  return sys;
}

}  // namespace lps
