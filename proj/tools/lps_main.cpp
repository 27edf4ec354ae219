#include "lps/runner.hpp"
#include "lps/verification.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <random>

int main(int argc, char** argv) {
  CLI::App app{"Stabilized finite element solver for H(curl)/H(div) advection"};
  app.require_subcommand(1);

  lps::ExperimentConfig cfg;
  std::string kind_str, levels_str, config_path;
  int r = 0, n = 0;

  CLI::App* run = app.add_subcommand("run", "Run an experiment from the registry");
  run->add_option("example", cfg.example, "example id (see `list`)");
  run->add_option("--config", config_path, "key=value config file");
  run->add_option("--kind", kind_str, "form kind: curl or div")
      ->check(CLI::IsMember({"curl", "div"}));
  run->add_option("--r", r, "polynomial order (1-3)");
  run->add_option("--levels", levels_str, "comma-separated mesh levels 1/h");
  run->add_option("--n", n, "mesh resolution for the layer examples");
  run->add_flag("--no-s1", cfg.no_s1, "disable the jump stabilization term");
  run->add_flag("--no-s2", cfg.no_s2, "disable the fluctuation stabilization term");
  run->add_flag("--no-enrich", cfg.no_enrich, "use the unenriched space");
  run->add_option("--out", cfg.out_dir, "output directory");
  run->add_flag("--deterministic", cfg.deterministic,
                "byte-reproducible output (single thread)");
  run->add_flag("--large", cfg.large, "allow 3D levels beyond 1/h = 16");

  unsigned seed = 0;
  CLI::App* verify = app.add_subcommand("verify", "Run the structural check suite");
  verify->add_option("--seed", seed, "seed for the randomized checks (0 = random)");

  CLI::App* list = app.add_subcommand("list", "List registry examples");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (!kind_str.empty())
        cfg.kind = kind_str == "curl" ? lps::FieldKind::curl : lps::FieldKind::div;
      if (run->count("--r")) cfg.r = r;
      if (run->count("--n")) cfg.n = n;
      if (!levels_str.empty()) {
        std::vector<int> levels;
        for (std::size_t pos = 0; pos < levels_str.size();) {
          auto comma = levels_str.find(',', pos);
          if (comma == std::string::npos) comma = levels_str.size();
          levels.push_back(std::stoi(levels_str.substr(pos, comma - pos)));
          pos = comma + 1;
        }
        cfg.levels = levels;
      }
      if (!config_path.empty())
        lps::apply_config_entries(cfg, lps::parse_config_file(config_path));
      if (cfg.example.empty()) {
        std::cerr << "error: no example selected (argument or config file)\n";
        return 2;
      }
      lps::RunSummary summary = lps::run_experiment(cfg);
      std::cout << "wrote " << summary.json_path << '\n';
      for (const auto& v : summary.variants)
        std::cout << "  " << v.variant << ": "
                  << (v.csv_path.empty() ? v.vtk_path : v.csv_path) << '\n';
      return 0;
    }
    if (verify->parsed()) {
      if (seed == 0) seed = std::random_device{}();
      std::cout << "structural suite, seed " << seed << "\n";
      lps::StructuralReport report = lps::run_structural_suite(seed);
      report.print(std::cout);
      return report.all_passed() ? 0 : 1;
    }
    if (list->parsed()) {
      for (const auto& e : lps::example_registry())
        std::cout << e.id << "  [" << (e.dim == 2 ? "2D" : "3D") << ", "
                  << (e.kind_selectable
                          ? "curl|div"
                          : (e.default_kind == lps::FieldKind::curl ? "curl" : "div"))
                  << "]  " << e.description << '\n';
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
