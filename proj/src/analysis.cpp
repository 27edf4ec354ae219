#include "lps/analysis.hpp"

#include "lps/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace lps {

double ErrorBreakdown::s1() const {
  return std::sqrt(std::max(0.0, energy * energy - fluctuation * fluctuation));
}

namespace {

Mat3 value_transform(FieldKind kind, const AffineCellMap& m) {
  return kind == FieldKind::curl ? m.inverse_transpose : Mat3(m.linear / m.det);
}

// Breakdown of e = reference_field - u_h; with no reference field this is
// the norm of u_h itself.
ErrorBreakdown breakdown_impl(const Eigen::VectorXd& u,
                              const AdvectionProblem& problem,
                              const SimplicialMesh& mesh, const FeSpace& space,
                              const LpsConfig& config, bool against_exact) {
  if (against_exact && !problem.has_exact)
    throw std::runtime_error("configuration-error: problem has no exact solution");
  const FieldKind kind = problem.kind;
  const int n = space.n_local();
  const QuadratureRule& vrule = simplex_rule(mesh.dim, config.volume_degree(problem));
  const int facet_deg = config.facet_degree(problem);
  const QuadratureRule& prule = simplex_rule(mesh.dim - 1, facet_deg);
  const int nq = static_cast<int>(vrule.size());
  BasisTabulation vtab = space.tabulate_span(vrule.points);
  BoundaryClassification boundary = classify_boundary(mesh, problem.beta, facet_deg);

  ErrorBreakdown out;
  double l2_sq = 0, fluct_sq = 0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const AffineCellMap& map = mesh.cell_maps[c];
    const auto& dofs = space.cell_dofs(c);
    Eigen::VectorXd local(n);
    for (int i = 0; i < n; ++i) local[i] = u[dofs[i]];
    Eigen::VectorXd span_coeff = space.cell_coefficients(c) * local;
    Eigen::VectorXd vals = vtab.values * span_coeff;
    Eigen::VectorXd jacs = vtab.jacobians * span_coeff;
    Mat3 P = value_transform(kind, map);

    Vec3 bbar = beta_bar(problem, mesh, c, vrule.exactness_degree);
    Eigen::MatrixXd lbar(3 * nq, 1);
    for (int q = 0; q < nq; ++q) {
      Vec3 x = map.to_physical(vrule.points[q]);
      Vec3 e = -(P * vals.segment<3>(3 * q));
      Mat3 jhat;
      for (int col = 0; col < 3; ++col)
        jhat.col(col) = jacs.segment<3>(9 * q + 3 * col);
      Mat3 je = -(P * jhat * map.inverse);
      if (against_exact) {
        e += problem.exact(x);
        je += problem.exact_jacobian(x);
      }
      l2_sq += vrule.weights[q] * map.det * e.squaredNorm();
      lbar.block<3, 1>(3 * q, 0) = -(je * bbar);
    }
    Eigen::MatrixXd kappa = fluctuation_apply(config.r, mesh.dim, vrule, lbar);
    double s = 0;
    for (int q = 0; q < nq; ++q)
      s += vrule.weights[q] * map.det * kappa.block<3, 1>(3 * q, 0).squaredNorm();
    fluct_sq += mesh.cell_diameters[c] * s;
  }

  double out_sq = 0, in_sq = 0, jump_sq = 0;
  const int nfq = static_cast<int>(prule.size());
  for (std::size_t f = 0; f < mesh.n_facets(); ++f) {
    FacetQuadrature fq = facet_quadrature(mesh, f, facet_deg);
    FacetGeometry geom = facet_geometry(mesh, f);
    Eigen::MatrixXd vals[2];
    int nsides = mesh.facet_on_boundary(f) ? 1 : 2;
    for (int s = 0; s < nsides; ++s) {
      int c = geom.adjacent_cells[s];
      const BasisTabulation& tab =
          space.facet_span_tabulation(c, geom.local_facet_indices[s], prule);
      const auto& dofs = space.cell_dofs(c);
      Eigen::VectorXd local(n);
      for (int i = 0; i < n; ++i) local[i] = u[dofs[i]];
      Eigen::VectorXd ref = tab.values * (space.cell_coefficients(c) * local);
      Mat3 P = value_transform(kind, mesh.cell_maps[c]);
      vals[s].resize(3, nfq);
      for (int q = 0; q < nfq; ++q) vals[s].col(q) = P * ref.segment<3>(3 * q);
    }
    for (int q = 0; q < nfq; ++q) {
      double absbn =
          std::abs(problem.beta(fq.points[q]).dot(geom.normal)) * fq.weights[q];
      if (nsides == 2) {
        // Continuous reference fields drop out of the jump.
        Vec3 jump = vals[1].col(q) - vals[0].col(q);
        if (!against_exact) jump = -jump;
        jump_sq += absbn * jump.squaredNorm();
      } else {
        Vec3 e = -vals[0].col(q);
        if (against_exact) e += problem.exact(fq.points[q]);
        double contrib = 0.5 * absbn * e.squaredNorm();
        if (boundary.is_inflow[f])
          in_sq += contrib;
        else
          out_sq += contrib;
      }
    }
  }

  out.l2 = std::sqrt(l2_sq);
  out.boundary_out = std::sqrt(out_sq);
  out.boundary_in = std::sqrt(in_sq);
  out.jump = std::sqrt(jump_sq);
  out.fluctuation = std::sqrt(fluct_sq);
  out.energy = std::sqrt(l2_sq + out_sq + in_sq + jump_sq + fluct_sq);
  return out;
}

}  // namespace

ErrorBreakdown error_breakdown(const Eigen::VectorXd& solution,
                               const AdvectionProblem& problem,
                               const SimplicialMesh& mesh, const FeSpace& space,
                               const LpsConfig& config) {
  return breakdown_impl(solution, problem, mesh, space, config, true);
}

ErrorBreakdown discrete_norm_breakdown(const Eigen::VectorXd& u,
                                       const AdvectionProblem& problem,
                                       const SimplicialMesh& mesh,
                                       const FeSpace& space,
                                       const LpsConfig& config) {
  return breakdown_impl(u, problem, mesh, space, config, false);
}

double discrete_energy_norm(const Eigen::VectorXd& u,
                            const AdvectionProblem& problem,
                            const SimplicialMesh& mesh, const FeSpace& space,
                            const LpsConfig& config) {
  return discrete_norm_breakdown(u, problem, mesh, space, config).energy;
}

std::vector<double> eoc(const std::vector<double>& errors,
                        const std::vector<int>& inverse_h) {
  if (errors.size() != inverse_h.size() || errors.size() < 2)
    throw std::invalid_argument("eoc: need matching lists of length >= 2");
  std::vector<double> orders(errors.size(),
                             std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 1; k < errors.size(); ++k) {
    if (!(errors[k] > 0) || !(errors[k - 1] > 0))
      throw std::invalid_argument("eoc: errors must be positive");
    if (inverse_h[k] <= inverse_h[k - 1])
      throw std::invalid_argument("eoc: inverse_h must be strictly increasing");
    orders[k] = std::log(errors[k - 1] / errors[k]) /
                std::log(double(inverse_h[k]) / inverse_h[k - 1]);
  }
  return orders;
}

void ConvergenceReport::write_csv(std::ostream& os) const {
  os << "inv_h,energy_err,energy_order,l2_err,l2_order\n";
  os.precision(6);
  os.setf(std::ios::scientific);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const ConvergenceRow& r = rows[k];
    os << r.inv_h << "," << r.energy_err << ",";
    if (k == 0)
      os << "--";
    else
      os << std::fixed << r.energy_order << std::scientific;
    os << "," << r.l2_err << ",";
    if (k == 0)
      os << "--";
    else
      os << std::fixed << r.l2_order << std::scientific;
    os << "\n";
  }
}

ConvergenceReport run_convergence_study(const AdvectionProblem& problem,
                                        const LpsConfig& config,
                                        const std::vector<int>& levels,
                                        NormChoice norm) {
  ConvergenceReport rep;
  rep.problem_name = problem.name;
  rep.kind = problem.kind;
  rep.config = config;
  rep.norm = norm;
  std::vector<double> primary_errors, l2_errors;
  std::vector<int> inv_h;
  for (int nlevel : levels) {
    auto t0 = std::chrono::steady_clock::now();
    SimplicialMesh mesh = build_structured_mesh(problem.dim, nlevel);
    FeSpace space(mesh, problem.kind, config.r, config.enriched);
    SparseSystem sys = assemble(problem, mesh, space, config);
    SolveReport sol = solve(sys, config.solver_tol);
    ErrorBreakdown err = error_breakdown(sol.solution, problem, mesh, space, config);
    auto t1 = std::chrono::steady_clock::now();

    ConvergenceRow row;
    row.inv_h = nlevel;
    row.dofs = space.n_dofs();
    row.energy_err = (norm == NormChoice::energy) ? err.energy : err.s1();
    row.l2_err = err.l2;
    row.seconds = std::chrono::duration<double>(t1 - t0).count();
    rep.rows.push_back(row);
    primary_errors.push_back(row.energy_err);
    l2_errors.push_back(row.l2_err);
    inv_h.push_back(nlevel);
  }
  if (rep.rows.size() >= 2) {
    auto eo = eoc(primary_errors, inv_h);
    auto lo = eoc(l2_errors, inv_h);
    for (std::size_t k = 1; k < rep.rows.size(); ++k) {
      rep.rows[k].energy_order = eo[k];
      rep.rows[k].l2_order = lo[k];
    }
  }
  return rep;
}

}  // namespace lps
