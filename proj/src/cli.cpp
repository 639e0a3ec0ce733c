#include "rodlimit/cli.hpp"
#include "rodlimit/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace rodlimit {

using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Output {
  std::filesystem::path dir;
  std::vector<std::string> files;

  explicit Output(const std::string& d) : dir(d) { std::filesystem::create_directories(dir); }

  template <class F>
  void write(const std::string& name, F&& fill) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw DomainError("cannot write " + (dir / name).string());
    fill(f);
    files.push_back(name);
  }

  void json_file(const std::string& name, json j) {
    j["files"] = files;
    write(name, [&](std::ostream& o) { o << dump_json(j); });
  }
};

json header(const std::string& command) { return {{"schema_version", kSchemaVersion}, {"command", command}}; }

BendTorsionMatrix stiffness(const RunConfig& cfg, int level) { return compute_A(cfg.material.q, build_disk_mesh(level)); }

int cmd_validate(const RunConfig& cfg, Output& out, std::ostream& os, std::ostream& err) {
  const Skeleton& sk = cfg.skeleton;
  const JunctionReport jr = validate_junctions(sk, sk.delta0);
  json j = header("validate");
  json clamped = json::array();
  for (int e : sk.clamped)
    clamped.push_back({{"segment", sk.extremities[e].id.segment},
                       {"end", sk.extremities[e].id.at_end ? "end" : "start"}});
  j["structure"] = {{"segments", sk.segments.size()},  {"knots", sk.knots.size()},
                    {"extremities", sk.extremities.size()}, {"vertices", sk.vertices.size()},
                    {"edges", sk.edge_count()},        {"cycles", sk.independent_cycle_count()},
                    {"rho0", sk.rho0},                 {"delta0", sk.delta0},
                    {"clamped", clamped}};
  j["junctions"] = to_json(jr);
  j["loads"] = {{"kappa", cfg.loads.kappa},
                {"kappa_prime", cfg.loads.kappa_prime()},
                {"node_loads", cfg.loads.nodes.size()},
                {"segment_tables", std::count_if(cfg.loads.segments.begin(), cfg.loads.segments.end(),
                                                 [](const LoadTable& t) { return !t.empty(); })}};
  j["material"] = cfg.material.svk ? json{{"lambda", cfg.material.svk->lambda}, {"mu", cfg.material.svk->mu}}
                                   : json{{"Q", "general"}};
  out.json_file("validate.json", j);
  os << "structure: " << sk.segments.size() << " segments, " << sk.knots.size() << " knots, "
     << sk.independent_cycle_count() << " independent cycles, delta0 = " << sk.delta0 << "\n";
  if (!jr.ok()) {
    for (const auto& v : jr.violations) err << "error: " << v << "\n";
    return kExitDomain;
  }
  os << "junction conditions hold at delta0\n";
  return kExitOk;
}

int cmd_cross_section(const RunConfig& cfg, int level, Output& out, std::ostream& os) {
  const DiskMesh mesh = build_disk_mesh(level);
  const BendTorsionMatrix bt = compute_A(cfg.material.q, mesh);
  json j = header("cross-section");
  j["mesh_level"] = level;
  j["mesh"] = {{"nodes", mesh.node_count()}, {"triangles", mesh.triangles.size()}};
  j["A"] = to_json(bt.A);
  j["corrector_residuals"] = bt.residuals;
  if (cfg.material.svk) {
    const double mu = cfg.material.svk->mu, E = cfg.material.svk->young(), pi = std::numbers::pi;
    const Vec3 ref(pi * mu / 4.0, pi * E / 4.0, pi * E / 4.0);
    double rel = 0.0;
    for (int k = 0; k < 3; ++k) rel = std::max(rel, std::abs(bt.A(k, k) / ref(k) - 1.0));
    j["reference_diagonal"] = to_json(ref);
    j["max_relative_error"] = rel;
    j["material"] = {{"lambda", cfg.material.svk->lambda}, {"mu", mu}, {"young", E}, {"poisson", cfg.material.svk->poisson()}};
  } else {
    j["reference_diagonal"] = nullptr;
    j["max_relative_error"] = nullptr;
    j["material"] = {{"Q", "general"}};
  }
  out.json_file("cross_section.json", j);
  os << "A diagonal: " << bt.A(0, 0) << " " << bt.A(1, 1) << " " << bt.A(2, 2) << "\n";
  return kExitOk;
}

int cmd_solve(const RunConfig& cfg, double kappa, int level, Output& out, std::ostream& os) {
  LoadSet loads = cfg.loads;
  loads.kappa = kappa;
  json j = header("solve");
  j["kappa"] = kappa;
  j["kappa_prime"] = loads.kappa_prime();
  j["seed"] = cfg.solver.seed;
  if (std::abs(kappa - 2.0) < 1e-12) {
    loads.kappa = 2.0;
    const BendTorsionMatrix bt = stiffness(cfg, level);
    const Kappa2Solution sol = minimize_kappa2(cfg.skeleton, bt.A, loads, cfg.solver);
    out.write("solve_nodes.csv", [&](std::ostream& o) { write_solve_nodes_csv(o, sol.V, sol.R); });
    out.write("solve_gamma.csv", [&](std::ostream& o) { write_gamma_csv(o, sol.R, cfg.skeleton); });
    j["problem"] = "J2";
    j["A"] = to_json(bt.A);
    j["mesh_level"] = level;
    j["mesh"] = {{"intervals_per_edge", cfg.solver.intervals_per_edge},
                 {"nodes", sol.R.mesh.node_count},
                 {"intervals", sol.R.mesh.interval_count()}};
    j["report"] = to_json(sol.report);
    out.json_file("solve.json", j);
    os << "J2 = " << sol.report.energy << (sol.report.converged ? "" : " (not converged)") << "\n";
  } else if (kappa > 1.0 && kappa < 2.0) {
    const Kappa1Solution sol = minimize_kappa1(cfg.skeleton, loads, cfg.solver);
    out.write("solve_intervals.csv", [&](std::ostream& o) { write_kappa1_csv(o, sol); });
    j["problem"] = "minus_L_conv";
    j["sample_count"] = cfg.solver.sample_count;
    j["mesh"] = {{"intervals_per_edge", cfg.solver.intervals_per_edge},
                 {"nodes", sol.R.mesh.node_count},
                 {"intervals", sol.R.mesh.interval_count()}};
    j["report"] = to_json(sol.report);
    out.json_file("solve.json", j);
    os << "min -L = " << sol.report.energy << "\n";
  } else {
    throw DomainError("solve: kappa must equal 2 or lie in (1, 2); kappa > 2 is outside the limit models");
  }
  return kExitOk;
}

int cmd_decompose(const RunConfig& cfg, int level, const std::string& field, Output& out, std::ostream& os) {
  const Skeleton& sk = cfg.skeleton;
  const double delta = cfg.decompose.delta > 0.0 ? cfg.decompose.delta : sk.delta0;
  json j = header("decompose");
  j["delta"] = delta;
  RodFieldSamples samples;
  LoadSet loads = cfg.loads;
  if (!field.empty()) {
    samples = sample_field(sk, delta, cfg.decompose.grid, [](int, double, const Vec3& x) { return x; });
    std::ifstream in(field, std::ios::binary);
    if (!in) throw DomainError("cannot open field file '" + field + "'");
    read_samples_csv(in, samples, sk);
    j["source"] = "field";
    j["J2"] = nullptr;
  } else {
    loads.kappa = 2.0;
    const BendTorsionMatrix bt = stiffness(cfg, level);
    const Kappa2Solution sol = minimize_kappa2(sk, bt.A, loads, cfg.solver);
    const auto [V, R] = squeeze_to_junction_form(sol.V, sol.R, sk, delta);
    samples = sample_elementary_deformation(V, R, sk, delta, cfg.decompose.grid);
    j["source"] = "solver";
    j["J2"] = sol.report.energy;
  }
  const DecompositionResult res = decompose_structure(samples, sk);
  j["grid"] = {{"radial", samples.grid.radial},
               {"angular", samples.grid.angular},
               {"stations", [&] {
                  json a = json::array();
                  for (const auto& r : samples.rods) a.push_back(r.s.size());
                  return a;
                }()}};
  j["norms"] = to_json(res.norms);
  j["reconstruction_error"] = res.reconstruction_error;
  j["flags"] = res.flags;
  if (cfg.material.svk) {
    const Energy3D e = evaluate_3d_energy(samples, sk, *cfg.material.svk, loads);
    j["energy_3d"] = to_json(e);
  } else {
    j["energy_3d"] = nullptr;
  }
  out.write("decompose_stations.csv", [&](std::ostream& o) { write_stations_csv(o, samples, res); });
  out.write("decompose_samples.csv", [&](std::ostream& o) { write_samples_csv(o, samples, sk); });
  out.json_file("decompose.json", j);
  os << "||vbar|| = " << res.norms.vbar_L2 << ", ||dist(grad v, SO(3))|| = " << res.norms.dist_L2 << "\n";
  return kExitOk;
}

int cmd_scaling(const ScalingConfig& base, const CliOptions& opts, Output& out, std::ostream& os) {
  ScalingConfig sc = base;
  if (opts.family) sc.family.family = parse_family(*opts.family);
  if (opts.kappa) sc.family.kappa = *opts.kappa;
  if (!opts.deltas.empty()) sc.deltas = opts.deltas;
  const ScalingReport rep = scaling_study(sc.family, sc.deltas, GridSpec{}, sc.tolerance);
  out.write("scaling.csv", [&](std::ostream& o) { write_scaling_csv(o, rep); });
  json j = header("scaling-study");
  j["tolerance"] = sc.tolerance;
  j["study"] = to_json(rep);
  out.json_file("scaling.json", j);
  for (const auto& e : rep.entries)
    os << e.quantity << ": slope " << e.slope << " (predicted " << e.predicted << ") "
       << (e.degenerate ? "degenerate-pass" : e.pass ? "pass" : "fail") << "\n";
  return kExitOk;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot open configuration file '" + path + "'"}, true);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int run(const CliOptions& opts, std::ostream& os, std::ostream& err) {
  try {
    const std::string& cmd = opts.subcommand;
    if (cmd != "validate" && cmd != "cross-section" && cmd != "solve" && cmd != "decompose" && cmd != "scaling-study")
      throw UsageError("unknown subcommand '" + cmd + "'");
    if (opts.mesh_level && (*opts.mesh_level < 0 || *opts.mesh_level > 8))
      throw UsageError("--mesh-level must be in [0, 8]");

    if (cmd == "scaling-study") {
      const ScalingConfig sc = opts.config_path.empty() ? ScalingConfig{} : parse_scaling_text(read_file(opts.config_path));
      Output out(opts.out_dir);
      return cmd_scaling(sc, opts, out, os);
    }
    if (opts.config_path.empty()) throw UsageError(cmd + " requires --config");
    RunConfig cfg = parse_config(opts.config_path);
    if (opts.seed) cfg.solver.seed = *opts.seed;
    const int level = opts.mesh_level.value_or(cfg.mesh_level);
    Output out(opts.out_dir);
    if (cmd == "validate") return cmd_validate(cfg, out, os, err);
    if (cmd == "cross-section") return cmd_cross_section(cfg, level, out, os);
    if (cmd == "solve") return cmd_solve(cfg, opts.kappa.value_or(cfg.loads.kappa), level, out, os);
    return cmd_decompose(cfg, level, opts.field_path, out, os);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    for (const auto& m : e.errors()) err << "config error: " << m << "\n";
    return e.schema() ? kExitUsage : kExitDomain;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}

}  // namespace rodlimit
