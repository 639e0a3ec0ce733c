#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace rodlimit {

struct CliOptions {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<double> kappa;
  std::optional<int> mesh_level;
  std::optional<unsigned> seed;
  std::vector<double> deltas;
  std::optional<std::string> family;
  std::string field_path;
};

enum ExitCode { kExitOk = 0, kExitDomain = 1, kExitUsage = 2 };

// Runs one subcommand, writing artifacts into out_dir and a summary to `out`;
// diagnostics go to `err`.
int run(const CliOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace rodlimit
