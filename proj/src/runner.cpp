#include "lps/runner.hpp"

#include "lps/problem.hpp"
#include "lps/solver.hpp"
#include "lps/verification.hpp"

#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace lps {

namespace {

using nlohmann::json;

std::string kind_name(FieldKind k) { return k == FieldKind::curl ? "curl" : "div"; }

FieldKind parse_kind(const std::string& s) {
  if (s == "curl") return FieldKind::curl;
  if (s == "div") return FieldKind::div;
  throw std::invalid_argument("unknown field kind: " + s + " (expected curl|div)");
}

std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  if (out.empty()) throw std::invalid_argument("levels list is empty");
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("expected a boolean, got: " + s);
}

struct Variant {
  std::string name;
  bool s1;
  bool s2;
  bool enriched;
  NormChoice norm;
};

// Default level ladders; the 3D ones stop at 1/h = 16 unless --large.
std::vector<int> default_levels(int dim, bool large) {
  if (dim == 2) return {4, 8, 16, 32, 64};
  std::vector<int> l = {1, 2, 4, 8, 16};
  if (large) l.push_back(32);
  return l;
}

std::ofstream open_file(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open output file: " + p.string());
  return os;
}

json report_to_json(const ConvergenceReport& rep) {
  json rows = json::array();
  for (const auto& row : rep.rows)
    rows.push_back({{"inv_h", row.inv_h},
                    {"dofs", row.dofs},
                    {"energy_err", row.energy_err},
                    {"energy_order", row.energy_order},
                    {"l2_err", row.l2_err},
                    {"l2_order", row.l2_order},
                    {"seconds", row.seconds}});
  return rows;
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string trimmed = line;
    auto hash = trimmed.find('#');
    if (hash != std::string::npos) trimmed.erase(hash);
    auto notspace = [](unsigned char c) { return !std::isspace(c); };
    trimmed.erase(trimmed.begin(),
                  std::find_if(trimmed.begin(), trimmed.end(), notspace));
    trimmed.erase(std::find_if(trimmed.rbegin(), trimmed.rend(), notspace).base(),
                  trimmed.end());
    if (trimmed.empty()) continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key=value, got: " + trimmed);
    std::string key = trimmed.substr(0, eq);
    std::string value = trimmed.substr(eq + 1);
    key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
    value.erase(value.begin(),
                std::find_if(value.begin(), value.end(), notspace));
    if (key.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": empty key");
    if (!entries.emplace(key, value).second)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": duplicate key: " + key);
    static const std::vector<std::string> known = {
        "example", "kind", "r",   "levels",        "s1",   "s2",
        "enrich",  "n",    "out", "deterministic", "large"};
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": unknown key: " + key);
  }
  return entries;
}

void apply_config_entries(ExperimentConfig& cfg,
                          const std::map<std::string, std::string>& entries) {
  auto get = [&](const char* key) -> const std::string* {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };
  if (auto* v = get("example"); v && cfg.example.empty()) cfg.example = *v;
  if (auto* v = get("kind"); v && !cfg.kind) cfg.kind = parse_kind(*v);
  if (auto* v = get("r"); v && !cfg.r) cfg.r = std::stoi(*v);
  if (auto* v = get("levels"); v && !cfg.levels) cfg.levels = parse_levels(*v);
  if (auto* v = get("n"); v && !cfg.n) cfg.n = std::stoi(*v);
  if (auto* v = get("s1"); v && !cfg.no_s1) cfg.no_s1 = !parse_bool(*v);
  if (auto* v = get("s2"); v && !cfg.no_s2) cfg.no_s2 = !parse_bool(*v);
  if (auto* v = get("enrich"); v && !cfg.no_enrich) cfg.no_enrich = !parse_bool(*v);
  if (auto* v = get("out"); v && cfg.out_dir == ".") cfg.out_dir = *v;
  if (auto* v = get("deterministic"); v && !cfg.deterministic)
    cfg.deterministic = parse_bool(*v);
  if (auto* v = get("large"); v && !cfg.large) cfg.large = parse_bool(*v);
}

void configure_threads(bool deterministic) {
#ifdef _OPENMP
  if (deterministic) {
    // Assembly is bit-identical for any thread count; one thread just makes
    // the run's timing behavior reproducible as well.
    omp_set_num_threads(1);
    return;
  }
  if (const char* env = std::getenv("LPS_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#else
  (void)deterministic;
#endif
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  configure_threads(cfg.deterministic);

  const auto& registry = example_registry();
  auto info = std::find_if(registry.begin(), registry.end(),
                           [&](const ExampleInfo& e) { return e.id == cfg.example; });
  if (info == registry.end())
    throw std::invalid_argument("unknown example id: " + cfg.example);

  RunSummary summary;
  summary.config = cfg;
  summary.kind = info->kind_selectable ? cfg.kind.value_or(info->default_kind)
                                       : info->default_kind;
  if (!info->kind_selectable && cfg.kind && *cfg.kind != info->default_kind)
    std::cerr << "note: " << cfg.example << " fixes the form kind to "
              << kind_name(info->default_kind) << "; --kind ignored\n";

  AdvectionProblem problem = example_problem(cfg.example, summary.kind);
  const bool layer = cfg.example == "example5" || cfg.example == "example6";
  const bool ablation_s = cfg.example == "example3";
  const bool ablation_b = cfg.example == "example4";

  summary.r = ablation_b ? 2 : cfg.r.value_or(1);
  if (ablation_b && cfg.r && *cfg.r != 2)
    std::cerr << "note: example4 fixes r = 2; --r ignored\n";
  if (summary.r < 1 || summary.r > 3)
    throw std::invalid_argument("r must be 1, 2, or 3");

  std::filesystem::create_directories(cfg.out_dir);
  const std::filesystem::path out(cfg.out_dir);
  const std::string stem =
      cfg.example + "_" + kind_name(summary.kind) + "_r" + std::to_string(summary.r);

  {
    // Coercivity assumption check; a warning, not a gate (example6 runs with
    // gamma = 0 on purpose).
    SimplicialMesh probe = build_structured_mesh(problem.dim, problem.dim == 2 ? 8 : 2);
    summary.wellposedness_rho = check_wellposedness(problem, probe, 4);
    if (summary.wellposedness_rho <= 0.0)
      std::cerr << "warning: " << cfg.example
                << " violates the positivity assumption (min rho = "
                << summary.wellposedness_rho << "); running anyway\n";
  }

  json j;
  j["example"] = cfg.example;
  j["kind"] = kind_name(summary.kind);
  j["r"] = summary.r;
  j["deterministic"] = cfg.deterministic;
  j["wellposedness_rho"] = summary.wellposedness_rho;

  if (layer) {
    const int n = cfg.n.value_or(32);
    SimplicialMesh mesh = build_structured_mesh(problem.dim, n);
    j["n"] = n;
    // Exact-solution layers are judged against the exact range; the
    // discontinuous-data layer against its known [0, 1] profile.
    double ref_min = 0.0, ref_max = 1.0;
    for (const char* scheme : {"lps", "galerkin"}) {
      LpsConfig lc;
      lc.r = summary.r;
      lc.enriched = !cfg.no_enrich;
      const bool stabilized = std::string(scheme) == "lps";
      lc.enable_s1 = stabilized && !cfg.no_s1;
      lc.enable_s2 = stabilized && !cfg.no_s2;
      FeSpace space(mesh, problem.kind, lc.r, lc.enriched);
      SparseSystem sys = assemble(problem, mesh, space, lc);
      SolveReport sol = solve(sys, lc.solver_tol);
      FieldDump dump = sample_field(sol.solution, mesh, space, 2 * n);
      if (problem.has_exact) {
        ref_min = std::numeric_limits<double>::infinity();
        ref_max = -ref_min;
        for (const Vec3& p : dump.points) {
          double e = problem.exact(p)[0];
          ref_min = std::min(ref_min, e);
          ref_max = std::max(ref_max, e);
        }
      }
      set_reference_range(dump, ref_min, ref_max);

      VariantResult vr;
      vr.variant = scheme;
      vr.dump = dump;
      vr.vtk_path = (out / (stem + "_" + scheme + ".vtk")).string();
      auto os = open_file(vr.vtk_path);
      write_vtk(dump, "u", os);

      j["variants"][scheme] = {{"vtk", vr.vtk_path},
                               {"dofs", static_cast<int>(space.n_dofs())},
                               {"solver", sol.method},
                               {"iterations", sol.iterations},
                               {"min", dump.min_value},
                               {"max", dump.max_value},
                               {"ref_min", dump.ref_min},
                               {"ref_max", dump.ref_max},
                               {"overshoot", dump.overshoot},
                               {"undershoot", dump.undershoot}};
      summary.variants.push_back(std::move(vr));
    }
  } else {
    std::vector<int> levels = cfg.levels.value_or(default_levels(problem.dim, cfg.large));
    if (problem.dim == 3 && !cfg.large)
      for (int n : levels)
        if (n > 16)
          throw std::invalid_argument(
              "3D levels beyond 1/h = 16 need --large (requested " +
              std::to_string(n) + ")");
    j["levels"] = levels;

    std::vector<Variant> variants;
    const bool enriched = !cfg.no_enrich && !ablation_b;
    if (ablation_s) {
      variants = {{"s1s2", true, true, enriched, NormChoice::energy},
                  {"s1only", true, false, enriched, NormChoice::s1},
                  {"s2only", false, true, enriched, NormChoice::energy}};
    } else if (ablation_b) {
      variants = {{"s1only", true, false, false, NormChoice::s1}};
    } else {
      variants = {{"lps", !cfg.no_s1, !cfg.no_s2, enriched, NormChoice::energy},
                  {"nostab", false, false, enriched, NormChoice::energy}};
    }

    for (const Variant& v : variants) {
      LpsConfig lc;
      lc.r = summary.r;
      lc.enriched = v.enriched;
      lc.enable_s1 = v.s1;
      lc.enable_s2 = v.s2;
      VariantResult vr;
      vr.variant = v.name;
      vr.report = run_convergence_study(problem, lc, levels, v.norm);
      vr.csv_path = (out / (stem + "_" + v.name + ".csv")).string();
      auto os = open_file(vr.csv_path);
      vr.report.write_csv(os);
      j["variants"][v.name] = {{"csv", vr.csv_path},
                               {"norm", v.norm == NormChoice::s1 ? "s1" : "energy"},
                               {"rows", report_to_json(vr.report)}};
      summary.variants.push_back(std::move(vr));
    }
  }

  summary.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  j["total_seconds"] = summary.total_seconds;
  summary.json_path = (out / (stem + "_summary.json")).string();
  auto os = open_file(summary.json_path);
  os << j.dump(2) << '\n';
  return summary;
}

}  // namespace lps
