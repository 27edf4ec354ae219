// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Published reference values are from the convergence tables
// of the method being reproduced; EOC bands and budgets are fixed here.

#include "lps/runner.hpp"
#include "lps/solver.hpp"
#include "lps/verification.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

using namespace lps;

namespace {

int failures = 0;

void line(int criterion, bool pass, const std::string& what) {
  std::printf("%s  criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              what.c_str());
  if (!pass) ++failures;
}

void note(const std::string& text) { std::printf("      %s\n", text.c_str()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool in_band(double v, double lo, double hi) { return v >= lo && v <= hi; }

struct TableCheck {
  bool rates = true;
  bool absolute = true;
  std::string detail;
};

// Criteria 1-2: levels 4..64, finest-pair EOC bands plus factor-2 absolute
// agreement with the published table.
TableCheck check_2d_table(FieldKind kind, int r,
                          const std::vector<double>& ref_energy,
                          const std::vector<double>& ref_l2, double e_lo,
                          double e_hi, double l_lo, double l_hi) {
  AdvectionProblem p = example_problem("example1", kind);
  LpsConfig cfg;
  cfg.r = r;
  ConvergenceReport rep = run_convergence_study(p, cfg, {4, 8, 16, 32, 64});
  TableCheck out;
  char buf[160];
  for (std::size_t i = rep.rows.size() - 2; i < rep.rows.size(); ++i) {
    if (!in_band(rep.rows[i].energy_order, e_lo, e_hi)) out.rates = false;
    if (!in_band(rep.rows[i].l2_order, l_lo, l_hi)) out.rates = false;
  }
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    double fe = rep.rows[i].energy_err / ref_energy[i];
    double fl = rep.rows[i].l2_err / ref_l2[i];
    if (fe < 0.5 || fe > 2.0 || fl < 0.5 || fl > 2.0) out.absolute = false;
  }
  std::snprintf(buf, sizeof(buf),
                "r=%d finest orders energy %.2f/%.2f l2 %.2f/%.2f, "
                "error-to-table ratios energy %.2f..%.2f l2 %.2f..%.2f",
                r, rep.rows[3].energy_order, rep.rows[4].energy_order,
                rep.rows[3].l2_order, rep.rows[4].l2_order,
                rep.rows[0].energy_err / ref_energy[0],
                rep.rows[4].energy_err / ref_energy[4],
                rep.rows[0].l2_err / ref_l2[0], rep.rows[4].l2_err / ref_l2[4]);
  out.detail = buf;
  return out;
}

void criterion_1_2(int which, FieldKind kind) {
  const auto t0 = std::chrono::steady_clock::now();
  TableCheck r1, r2;
  if (kind == FieldKind::curl) {
    r1 = check_2d_table(kind, 1, {7.329e-2, 2.573e-2, 9.016e-3, 3.166e-3, 1.115e-3},
                        {1.873e-2, 4.866e-3, 1.251e-3, 3.196e-4, 8.116e-5}, 1.40,
                        1.60, 1.90, 2.05);
    r2 = check_2d_table(kind, 2, {6.616e-3, 1.124e-3, 1.937e-4, 3.360e-5, 5.870e-6},
                        {2.014e-3, 2.753e-4, 3.654e-5, 4.880e-6, 6.439e-7}, 2.40,
                        2.65, 2.80, 3.05);
  } else {
    r1 = check_2d_table(kind, 1, {5.823e-2, 1.986e-2, 6.905e-3, 2.418e-3, 8.502e-4},
                        {1.744e-2, 4.379e-3, 1.111e-3, 2.818e-4, 7.133e-5}, 1.40,
                        1.60, 1.90, 2.05);
    r2 = check_2d_table(kind, 2, {6.604e-3, 1.135e-3, 1.962e-4, 3.437e-5, 6.056e-6},
                        {1.802e-3, 2.458e-4, 3.133e-5, 3.974e-6, 5.029e-7}, 2.40,
                        2.65, 2.80, 3.05);
  }
  double secs = seconds_since(t0);
  bool time_ok = secs < 120.0;
  bool pass = r1.rates && r1.absolute && r2.rates && r2.absolute && time_ok;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "2D %s table, %.0f s (budget 120 s)",
                kind == FieldKind::curl ? "curl" : "div", secs);
  line(which, pass, buf);
  note((r1.rates ? "ok   " : "FAIL ") + std::string("r=1 rates: ") + r1.detail);
  note((r1.absolute ? "ok   " : "FAIL ") + std::string("r=1 absolute factor 2"));
  note((r2.rates ? "ok   " : "FAIL ") + std::string("r=2 rates: ") + r2.detail);
  note((r2.absolute ? "ok   " : "FAIL ") + std::string("r=2 absolute factor 2"));
  if (!r2.absolute && r2.rates)
    note("known upstream inconsistency: the published r=2 rows match the "
         "unenriched variant of the scheme; the enriched scheme converges "
         "with the same orders but smaller constants (2.4-3.2x), which "
         "cannot satisfy the factor-2 band. Kept failing rather than "
         "loosened; see README.");
}

void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  for (FieldKind kind : {FieldKind::curl, FieldKind::div}) {
    AdvectionProblem p = example_problem("example2", kind);
    LpsConfig cfg;
    ConvergenceReport rep = run_convergence_study(p, cfg, {1, 2, 4, 8, 16});
    const ConvergenceRow& last = rep.rows.back();
    bool ok = in_band(last.energy_order, 1.40, 1.60) &&
              in_band(last.l2_order, 1.95, 2.15);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s energy %.2f l2 %.2f%s",
                  kind == FieldKind::curl ? "curl" : "div", last.energy_order,
                  last.l2_order, ok ? "" : " OUT OF BAND");
    detail += std::string(detail.empty() ? "" : ", ") + buf;
    pass = pass && ok;
  }
  double secs = seconds_since(t0);
  pass = pass && secs < 900.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "3D r=1 tables, finest-pair %s, %.0f s (budget 900 s)",
                detail.c_str(), secs);
  line(3, pass, buf);
}

void criterion_4() {
  AdvectionProblem p = example_problem("example3", FieldKind::curl);
  std::vector<int> levels = {1, 2, 4, 8, 16};

  LpsConfig s1only;
  s1only.enable_s2 = false;
  ConvergenceReport rep1 = run_convergence_study(p, s1only, levels, NormChoice::s1);
  const ConvergenceRow& a = rep1.rows.back();
  bool ok1 = in_band(a.energy_order, 1.30, 1.50) && in_band(a.l2_order, 1.55, 1.80);

  LpsConfig s2only;
  s2only.enable_s1 = false;
  ConvergenceReport rep2 = run_convergence_study(p, s2only, levels);
  const ConvergenceRow& b = rep2.rows.back();
  bool ok2 = b.l2_order < 0.5;

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "3D ablations: s1-only norms %.2f/%.2f, s2-only l2 order %.2f",
                a.energy_order, a.l2_order, b.l2_order);
  line(4, ok1 && ok2, buf);
  if (ok1 && !ok2)
    note("known upstream inconsistency: the published S2-only column shows "
         "growing O(1) errors, which contradicts the same source's converging "
         "no-stabilization columns (S2 is a PSD weakly consistent term added "
         "to that scheme). Here S2-only converges between no-stab and full "
         "LPS, as theory predicts. Kept failing rather than loosened; see "
         "README.");
}

void criterion_5() {
  AdvectionProblem p = example_problem("example4", FieldKind::curl);
  LpsConfig cfg;
  cfg.r = 2;
  cfg.enriched = false;
  cfg.enable_s2 = false;
  ConvergenceReport rep =
      run_convergence_study(p, cfg, {4, 8, 16, 32, 64}, NormChoice::s1);
  // The published table itself shows 2.52 on the second-finest pair, so the
  // [1.85, 2.25] band is judged on the finest pair.
  const ConvergenceRow& last = rep.rows.back();
  bool pass = in_band(last.l2_order, 1.85, 2.25) && last.l2_order < 2.80;
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "unenriched r=2 degrades: finest l2 orders %.2f/%.2f (enriched: ~2.9)",
                rep.rows[3].l2_order, rep.rows[4].l2_order);
  line(5, pass, buf);
  if (!pass && last.l2_order > 2.25)
    note("degradation onset is mesh dependent: on this mesh the unenriched "
         "L2 order falls 3.32 -> 2.84 -> 2.51 -> 2.45 over 1/h = 32..256, "
         "clearly suboptimal (enriched: ~2.9) but still above the published "
         "~2 at the levels fixed here. The no-stabilization column of the "
         "same published table is matched within 1.1-1.6x. Kept failing "
         "rather than loosened; see README.");
}

void criterion_6() {
  bool pass = true;
  double worst = 0;
  for (int dim : {2, 3})
    for (FieldKind kind : {FieldKind::curl, FieldKind::div}) {
      Vec3 beta(0.4, -0.7, dim == 3 ? 0.3 : 0.0);
      auto exact = [dim](const Vec3& x) {
        Vec3 u(1.0 + 2.0 * x[0] - x[1], -0.5 + x[0] + 3.0 * x[1], 0);
        if (dim == 3) {
          u[0] += 0.5 * x[2];
          u[2] = 0.25 - x[0] + x[2];
        }
        return u;
      };
      auto exact_jac = [dim](const Vec3&) {
        Mat3 j = Mat3::Zero();
        j(0, 0) = 2;
        j(0, 1) = -1;
        j(1, 0) = 1;
        j(1, 1) = 3;
        if (dim == 3) {
          j(0, 2) = 0.5;
          j(2, 0) = -1;
          j(2, 2) = 1;
        }
        return j;
      };
      AdvectionProblem p = manufactured_problem(
          "affine", kind, dim, [beta](const Vec3&) { return beta; },
          [](const Vec3&) { return Mat3::Zero(); },
          [](const Vec3&) { return 1.0; }, exact, exact_jac, true);
      for (int n : (dim == 2 ? std::vector<int>{4, 8, 16, 32}
                             : std::vector<int>{1, 2, 4})) {
        SimplicialMesh mesh = build_structured_mesh(dim, n);
        LpsConfig cfg;
        FeSpace space(mesh, p.kind, cfg.r, cfg.enriched);
        SolveReport sol = solve(assemble(p, mesh, space, cfg));
        ErrorBreakdown err = error_breakdown(sol.solution, p, mesh, space, cfg);
        worst = std::max(worst, err.energy);
        pass = pass && err.energy <= 1e-9;
      }
    }
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "affine exactness, worst energy error %.2e (bound 1e-9)", worst);
  line(6, pass, buf);
}

void criterion_7() {
  StructuralReport report = run_structural_suite(20260823u);
  int failed = 0;
  for (const auto& c : report.checks)
    if (!c.passed) ++failed;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "structural suite: %zu checks, %d failed",
                report.checks.size(), failed);
  line(7, report.all_passed(), buf);
  if (!report.all_passed())
    for (const auto& c : report.checks)
      if (!c.passed)
        note("FAIL " + c.name + " observed " + std::to_string(c.observed));
}

void criterion_8() {
  bool pass = true;
  for (const char* id : {"example5", "example6"}) {
    AdvectionProblem p = example_problem(id, FieldKind::curl);
    SimplicialMesh mesh = build_structured_mesh(2, 32);
    double delta[2] = {0, 0};
    bool finite = true;
    for (int scheme = 0; scheme < 2; ++scheme) {  // 0 = LPS, 1 = Galerkin
      LpsConfig cfg;
      cfg.enable_s1 = cfg.enable_s2 = (scheme == 0);
      FeSpace space(mesh, p.kind, cfg.r, cfg.enriched);
      SolveReport sol = solve(assemble(p, mesh, space, cfg));
      FieldDump dump = sample_field(sol.solution, mesh, space, 64);
      double ref_min = 0.0, ref_max = 1.0;
      if (p.has_exact) {
        ref_min = std::numeric_limits<double>::infinity();
        ref_max = -ref_min;
        for (const Vec3& pt : dump.points) {
          double e = p.exact(pt)[0];
          ref_min = std::min(ref_min, e);
          ref_max = std::max(ref_max, e);
        }
      }
      set_reference_range(dump, ref_min, ref_max);
      delta[scheme] = std::max(dump.overshoot, dump.undershoot);
      for (const Vec3& v : dump.values)
        finite = finite && v.allFinite();
    }
    bool ok = finite && delta[0] < delta[1];
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s overshoot: stabilized %.3e %s galerkin %.3e%s",
                  id, delta[0], ok ? "<" : "NOT <", delta[1],
                  finite ? "" : " (non-finite values!)");
    note(buf);
    pass = pass && ok;
  }
  line(8, pass, "interior layers at 1/h=32: stabilized overshoot below galerkin");
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);  // progress visible under ctest
  configure_threads(false);
  const auto t0 = std::chrono::steady_clock::now();
  criterion_1_2(1, FieldKind::curl);
  criterion_1_2(2, FieldKind::div);
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  std::printf("acceptance: %d criteria failed, %.0f s total\n", failures,
              seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
