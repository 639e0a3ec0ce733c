#include "rodlimit/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument(item);
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Limit models of thin elastic rod structures"};
  app.require_subcommand(1);
  rodlimit::CliOptions opts;
  std::optional<double> kappa;
  std::optional<int> level;
  std::optional<unsigned> seed;
  std::string deltas;
  std::optional<std::string> family;

  auto common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", opts.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    if (config_required) c->required();
    sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "random seed recorded in the reports");
  };
  auto* validate = app.add_subcommand("validate", "check a structure, its loads and junction conditions");
  common(validate, true);
  auto* cross = app.add_subcommand("cross-section", "bending-torsion matrix A of the unit disk");
  common(cross, true);
  cross->add_option("--mesh-level", level, "disk mesh refinement level (0-8)");
  auto* solve = app.add_subcommand("solve", "minimize the limit energy (kappa = 2 or kappa in (1, 2))");
  common(solve, true);
  solve->add_option("--kappa", kappa, "force scaling exponent");
  solve->add_option("--mesh-level", level, "disk mesh level used for A");
  auto* decompose = app.add_subcommand("decompose", "elementary-deformation decomposition and 3D energy");
  common(decompose, true);
  decompose->add_option("--field", opts.field_path, "CSV of sampled deformation values")->check(CLI::ExistingFile);
  decompose->add_option("--mesh-level", level, "disk mesh level used for A");
  auto* scaling = app.add_subcommand("scaling-study", "thickness scaling of the decomposition estimates");
  common(scaling, false);
  scaling->add_option("--family", family, "twist, bend, mixed or rigid");
  scaling->add_option("--kappa", kappa, "scaling exponent of the family");
  scaling->add_option("--deltas", deltas, "comma-separated thickness list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return rodlimit::kExitUsage;
  }
  opts.subcommand = app.get_subcommands().front()->get_name();
  opts.kappa = kappa;
  opts.mesh_level = level;
  opts.seed = seed;
  opts.family = family;
  if (!deltas.empty()) {
    try {
      opts.deltas = parse_list(deltas);
    } catch (const std::exception&) {
      std::cerr << "usage error: --deltas expects a comma-separated list of numbers\n";
      return rodlimit::kExitUsage;
    }
  }
  return rodlimit::run(opts, std::cout, std::cerr);
}
