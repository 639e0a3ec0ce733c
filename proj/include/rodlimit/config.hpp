#pragma once

#include "rodlimit/cross_section.hpp"
#include "rodlimit/decompose.hpp"
#include "rodlimit/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rodlimit {

// All problems found in a configuration, each prefixed with its JSON location.
// `schema` is false when every problem is a domain validation failure.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::vector<std::string> errors, bool schema);
  const std::vector<std::string>& errors() const { return errors_; }
  bool schema() const { return schema_; }

private:
  std::vector<std::string> errors_;
  bool schema_;
};

struct MaterialConfig {
  std::optional<SvkMaterial> svk;
  QForm6 q;
};

struct DecomposeConfig {
  double delta = 0.0;  // 0 selects the skeleton's delta0
  GridSpec grid;
};

struct ScalingConfig {
  FamilySpec family;
  std::vector<double> deltas = {0.2, 0.1, 0.05, 0.025};
  double tolerance = 0.2;
};

struct RunConfig {
  Skeleton skeleton;
  MaterialConfig material;
  LoadSet loads;
  SolveOptions solver;
  int mesh_level = 4;
  DecomposeConfig decompose;
  ScalingConfig scaling;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

// The optional "scaling" block alone (used when scaling-study runs without a structure).
ScalingConfig parse_scaling_text(const std::string& text);

}  // namespace rodlimit
