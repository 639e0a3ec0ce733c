#include "rodlimit/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace rodlimit {

using nlohmann::json;

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json to_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

json to_json(const Mat3& M) {
  json a = json::array();
  for (int r = 0; r < 3; ++r) a.push_back(json::array({M(r, 0), M(r, 1), M(r, 2)}));
  return a;
}

json to_json(const SolveReport& r) {
  json j;
  j["kappa"] = r.kappa;
  j["energy"] = number_or_null(r.energy);
  j["L"] = number_or_null(r.L);
  j["iterations"] = r.iterations;
  j["outer_iterations"] = r.outer_iterations;
  j["gradient_norm"] = r.gradient_norm;
  j["max_closure"] = r.max_closure;
  j["feasibility_residual"] = r.feasibility_residual;
  j["converged"] = r.converged;
  j["flags"] = r.flags;
  json trace = json::array();
  for (const auto& [outer, value] : r.trace) trace.push_back(json::array({outer, value}));
  j["trace"] = trace;
  return j;
}

json to_json(const NormTable& n) {
  return {{"vbar_L2", n.vbar_L2},   {"grad_vbar_L2", n.grad_vbar_L2}, {"dR_ds_L2", n.dR_ds_L2},
          {"dV_ds_L2", n.dV_ds_L2}, {"dist_L2", n.dist_L2},           {"korn_H1", n.korn_H1}};
}

json to_json(const Energy3D& e) {
  return {{"J", number_or_null(e.J)},
          {"elastic", number_or_null(e.elastic)},
          {"work", e.work},
          {"scaled", number_or_null(e.scaled)},
          {"dist_L2", e.dist_L2},
          {"infinite", e.infinite},
          {"location", e.location}};
}

json to_json(const ScalingReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"quantity", e.quantity},
                       {"predicted", e.predicted},
                       {"slope", e.slope},
                       {"pass", e.pass},
                       {"degenerate", e.degenerate},
                       {"values", e.values}});
  return {{"family", family_name(r.family.family)},
          {"kappa", r.family.kappa},
          {"amplitude", r.family.amplitude},
          {"length", r.family.length},
          {"deltas", r.deltas},
          {"entries", entries},
          {"all_pass", r.all_pass}};
}

json to_json(const JunctionReport& r) {
  return {{"ok", r.ok()},
          {"violations", r.violations},
          {"max_diameter", r.max_diameter},
          {"diameter_bound", r.diameter_bound}};
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_solve_nodes_csv(std::ostream& out, const CenterlineField& V, const RotationField& R) {
  out << "segment,k,s,Vx,Vy,Vz,qw,qx,qy,qz\n";
  const auto& mesh = R.mesh;
  for (int i = 0; i < mesh.segment_count(); ++i)
    for (std::size_t k = 0; k < mesh.s[i].size(); ++k) {
      const Vec3& v = V.at(i, static_cast<int>(k));
      const Eigen::Quaterniond q = to_quaternion(R.at(i, static_cast<int>(k)));
      out << i << ',' << k << ',' << csv_number(mesh.s[i][k]);
      for (double x : {v(0), v(1), v(2), q.w(), q.x(), q.y(), q.z()}) out << ',' << csv_number(x);
      out << '\n';
    }
}

void write_gamma_csv(std::ostream& out, const RotationField& R, const Skeleton& sk) {
  out << "segment,interval,s0,s1,Gamma1,Gamma2,Gamma3\n";
  const auto& mesh = R.mesh;
  for (int i = 0; i < mesh.segment_count(); ++i) {
    const auto g = gamma_strains(R, sk, i);
    for (std::size_t k = 0; k < g.size(); ++k) {
      out << i << ',' << k << ',' << csv_number(mesh.s[i][k]) << ',' << csv_number(mesh.s[i][k + 1]);
      for (int c = 0; c < 3; ++c) out << ',' << csv_number(g[k](c));
      out << '\n';
    }
  }
}

void write_kappa1_csv(std::ostream& out, const Kappa1Solution& sol) {
  out << "segment,interval,s0,s1,V0x,V0y,V0z,M00,M01,M02,M10,M11,M12,M20,M21,M22,support\n";
  const auto& mesh = sol.R.mesh;
  for (int i = 0; i < mesh.segment_count(); ++i)
    for (int k = 0; k < mesh.intervals_on(i); ++k) {
      const auto& cr = sol.R.interval[mesh.interval_offset[i] + k];
      const Vec3& v = sol.V.at(i, k);
      out << i << ',' << k << ',' << csv_number(mesh.s[i][k]) << ',' << csv_number(mesh.s[i][k + 1]);
      for (int c = 0; c < 3; ++c) out << ',' << csv_number(v(c));
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out << ',' << csv_number(cr.M(r, c));
      out << ',' << cr.weights.size() << '\n';
    }
}

void write_stations_csv(std::ostream& out, const RodFieldSamples& samples, const DecompositionResult& res) {
  out << "segment,station,s,Vx,Vy,Vz,qw,qx,qy,qz\n";
  for (std::size_t i = 0; i < res.V.size(); ++i)
    for (std::size_t k = 0; k < res.V[i].size(); ++k) {
      const Eigen::Quaterniond q = to_quaternion(res.R[i][k]);
      const Vec3& v = res.V[i][k];
      out << i << ',' << k << ',' << csv_number(samples.rods[i].s[k]);
      for (double x : {v(0), v(1), v(2), q.w(), q.x(), q.y(), q.z()}) out << ',' << csv_number(x);
      out << '\n';
    }
}

void write_samples_csv(std::ostream& out, const RodFieldSamples& samples, const Skeleton& sk) {
  out << "segment,station,q,s,x,y,z,vx,vy,vz\n";
  const int nq = samples.grid.size();
  for (std::size_t i = 0; i < samples.rods.size(); ++i) {
    const auto& rs = samples.rods[i];
    for (std::size_t k = 0; k < rs.s.size(); ++k)
      for (int q = 0; q < nq; ++q) {
        const Vec3 x = samples.point(sk, static_cast<int>(i), static_cast<int>(k), q);
        const Vec3& v = rs.v[k * nq + q];
        out << i << ',' << k << ',' << q << ',' << csv_number(rs.s[k]);
        for (double c : {x(0), x(1), x(2), v(0), v(1), v(2)}) out << ',' << csv_number(c);
        out << '\n';
      }
  }
}

void write_scaling_csv(std::ostream& out, const ScalingReport& r) {
  out << "quantity,delta,value,predicted_slope,fitted_slope\n";
  for (const auto& e : r.entries)
    for (std::size_t k = 0; k < r.deltas.size(); ++k)
      out << e.quantity << ',' << csv_number(r.deltas[k]) << ',' << csv_number(e.values[k]) << ','
          << csv_number(e.predicted) << ',' << csv_number(e.slope) << '\n';
}

void read_samples_csv(std::istream& in, RodFieldSamples& samples, const Skeleton& sk) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("segment,station,q,s,x,y,z,vx,vy,vz", 0) != 0)
    throw DomainError("field CSV: expected header segment,station,q,s,x,y,z,vx,vy,vz");
  const int nq = samples.grid.size();
  std::size_t expected = 0;
  for (const auto& rs : samples.rods) expected += rs.v.size();
  std::vector<bool> seen;
  for (const auto& rs : samples.rods) seen.resize(seen.size() + rs.v.size(), false);
  std::size_t count = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    if (cols.size() != 10) throw DomainError("field CSV line " + std::to_string(lineno) + ": expected 10 columns");
    int i, k, q;
    double val[7];
    try {
      i = std::stoi(cols[0]);
      k = std::stoi(cols[1]);
      q = std::stoi(cols[2]);
      for (int m = 0; m < 7; ++m) val[m] = std::stod(cols[3 + m]);
    } catch (const std::exception&) {
      throw DomainError("field CSV line " + std::to_string(lineno) + ": malformed number");
    }
    if (i < 0 || i >= static_cast<int>(samples.rods.size()) || k < 0 ||
        k >= static_cast<int>(samples.rods[i].s.size()) || q < 0 || q >= nq)
      throw DomainError("field CSV line " + std::to_string(lineno) + ": sample index outside the grid");
    const Vec3 x = samples.point(sk, i, k, q);
    const double scale = 1.0 + x.norm();
    if (std::abs(val[0] - samples.rods[i].s[k]) > 1e-9 * scale || (Vec3(val[1], val[2], val[3]) - x).norm() > 1e-9 * scale)
      throw DomainError("field CSV line " + std::to_string(lineno) + ": sample position does not match the grid");
    samples.rods[i].v[static_cast<std::size_t>(k) * nq + q] = Vec3(val[4], val[5], val[6]);
    std::size_t flat = static_cast<std::size_t>(k) * nq + q;
    for (int m = 0; m < i; ++m) flat += samples.rods[m].v.size();
    if (!seen[flat]) ++count;
    seen[flat] = true;
  }
  if (count != expected)
    throw DomainError("field CSV: " + std::to_string(count) + " of " + std::to_string(expected) + " samples given");
  // Knot clouds copy rod values; refresh them.
  for (auto& cloud : samples.knots) {
    cloud.v.clear();
    const double reach = (sk.rho0 + 1.0) * samples.delta;
    for (const auto& inc : sk.knots[cloud.knot].incidences) {
      const auto& rs = samples.rods[inc.segment];
      for (std::size_t kk = 0; kk < rs.s.size(); ++kk) {
        if (std::abs(rs.s[kk] - inc.arc) > reach * (1.0 + 1e-12)) continue;
        for (int qq = 0; qq < nq; ++qq) cloud.v.push_back(rs.v[kk * nq + qq]);
      }
    }
  }
}

}  // namespace rodlimit
