#pragma once

#include "lps/analysis.hpp"
#include "lps/vtk_writer.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lps {

/// Declarative description of one experiment run; filled from a config file
/// and/or command-line flags (flags win).
struct ExperimentConfig {
  std::string example;  // example1..example6
  std::optional<FieldKind> kind;
  std::optional<int> r;
  std::optional<std::vector<int>> levels;
  bool no_s1 = false;
  bool no_s2 = false;
  bool no_enrich = false;
  std::optional<int> n;  // layer-example mesh resolution
  std::string out_dir = ".";
  bool deterministic = false;
  bool large = false;  // allow 1/h = 32 in 3D
};

/// Flat key=value file (# comments, blank lines allowed). Unknown keys and
/// malformed lines raise errors that carry the line number.
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// Apply a parsed config file underneath an already flag-filled config:
/// only fields the flags left unset are taken from the file.
void apply_config_entries(ExperimentConfig& cfg,
                          const std::map<std::string, std::string>& entries);

struct VariantResult {
  std::string variant;  // lps / nostab / s1only / s2only / galerkin
  ConvergenceReport report;                // convergence examples
  std::optional<FieldDump> dump;           // layer examples
  std::string csv_path;
  std::string vtk_path;
};

struct RunSummary {
  ExperimentConfig config;
  FieldKind kind = FieldKind::curl;
  int r = 1;
  std::vector<VariantResult> variants;
  double wellposedness_rho = 0;  // min sampled coercivity eigenvalue
  double total_seconds = 0;
  std::string json_path;
};

/// Execute the experiment: convergence tables for examples 1-4 (CSV per
/// variant), lattice field dumps with overshoot statistics for examples 5-6
/// (VTK per scheme), and a JSON summary either way.
RunSummary run_experiment(const ExperimentConfig& cfg);

/// Honor LPS_THREADS (and the deterministic flag) before any parallel region.
void configure_threads(bool deterministic);

}  // namespace lps
