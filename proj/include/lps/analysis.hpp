#pragma once

#include "lps/assembly.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lps {

/// Five-part split of the energy norm of the error (or of a discrete field).
struct ErrorBreakdown {
  double l2 = 0;
  double boundary_out = 0;
  double boundary_in = 0;
  double jump = 0;
  double fluctuation = 0;
  double energy = 0;  // root of the sum of squares of the five parts

  /// Energy norm without the fluctuation part.
  double s1() const;
};

/// Energy-norm breakdown of u_exact - u_h. Requires the problem's exact
/// solution and its Jacobian.
ErrorBreakdown error_breakdown(const Eigen::VectorXd& solution,
                               const AdvectionProblem& problem,
                               const SimplicialMesh& mesh, const FeSpace& space,
                               const LpsConfig& config);

/// Energy norm of a discrete field given by its coefficient vector.
ErrorBreakdown discrete_norm_breakdown(const Eigen::VectorXd& u,
                                       const AdvectionProblem& problem,
                                       const SimplicialMesh& mesh,
                                       const FeSpace& space,
                                       const LpsConfig& config);
double discrete_energy_norm(const Eigen::VectorXd& u,
                            const AdvectionProblem& problem,
                            const SimplicialMesh& mesh, const FeSpace& space,
                            const LpsConfig& config);

/// Experimental orders of convergence; the first entry is NaN.
std::vector<double> eoc(const std::vector<double>& errors,
                        const std::vector<int>& inverse_h);

enum class NormChoice { energy, s1 };

struct ConvergenceRow {
  int inv_h = 0;
  int dofs = 0;
  double energy_err = 0;  // or the S1-norm error, per the report's norm choice
  double energy_order = 0;
  double l2_err = 0;
  double l2_order = 0;
  double seconds = 0;
};

struct ConvergenceReport {
  std::string problem_name;
  FieldKind kind = FieldKind::curl;
  LpsConfig config;
  NormChoice norm = NormChoice::energy;
  std::vector<ConvergenceRow> rows;

  void write_csv(std::ostream& os) const;
};

/// One assemble/solve/error cycle per level n (mesh 1/h = n).
ConvergenceReport run_convergence_study(const AdvectionProblem& problem,
                                        const LpsConfig& config,
                                        const std::vector<int>& levels,
                                        NormChoice norm = NormChoice::energy);

}  // namespace lps
