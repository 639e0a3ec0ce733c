#include "oracles.hpp"
#include "rodlimit/decompose.hpp"
#include "rodlimit/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace rodlimit;

namespace {

// Pinned tolerances.
constexpr double kStiffnessRelTol = 0.01;
constexpr double kStiffnessOffDiagTol = 1e-3;
constexpr double kStiffnessSeconds = 60.0;
constexpr double kCorrectorRelTol = 0.02;
constexpr double kCorrectorZeroTol = 1e-8;
constexpr double kCellOracleTol = 1e-8;
constexpr double kRodOracleRelTol = 1e-4;
constexpr double kGammaVarianceTol = 1e-6;
constexpr double kHullRelTol = 0.02;
constexpr double kUpperBoundRelTol = 0.10;
constexpr double kSlopeTol = 0.2;
constexpr double kScalingSeconds = 300.0;
constexpr double kRoundTripTol = 1e-9;
constexpr double kFrameTol = 1e-12;
constexpr double kFeasibilityTol = 1e-9;
constexpr double kReconstructionTol = 1e-9;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Mat3 random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  return Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng)).normalized().toRotationMatrix();
}

Vec3 random_vec(std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return scale * Vec3(u(rng), u(rng), u(rng));
}

Skeleton single_rod() {
  return build_skeleton({SegmentSpec::from_endpoints(Vec3::Zero(), Vec3::UnitX())}, {EndId{0, false}});
}

Skeleton l_frame() {
  return build_skeleton({SegmentSpec::from_endpoints(Vec3::Zero(), Vec3::UnitX()),
                         SegmentSpec::from_endpoints(Vec3::UnitX(), Vec3(1, 1, 0))},
                        {EndId{0, false}});
}

void stiffness(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const DiskMesh mesh = build_disk_mesh(4);
  double worst = 0.0, worst_off = 0.0;
  for (const auto& [lam, mu] : std::vector<std::pair<double, double>>{{1, 1}, {2, 1}, {0, 1}}) {
    const SvkMaterial mat{lam, mu};
    const Mat3 A = compute_A(isotropic_q6(mat), mesh).A;
    const Vec3 ref(M_PI * mu / 4, M_PI * mat.young() / 4, M_PI * mat.young() / 4);
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(A(k, k) / ref(k) - 1.0));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        if (r != c) worst_off = std::max(worst_off, std::abs(A(r, c)) / A.norm());
  }
  const double sec = seconds_since(t0);
  o.pass = worst <= kStiffnessRelTol && worst_off <= kStiffnessOffDiagTol && sec < kStiffnessSeconds;
  o.detail << "max diagonal error " << worst << ", max off-diagonal " << worst_off << ", " << sec << " s";
}

double l2_error(const DiskMesh& mesh, const NodalField& chi, const std::function<Vec2(const Vec2&)>& exact,
                double* norm_exact) {
  double num = 0.0, den = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const double w = mesh.triangle_area(t) / 3.0;
    for (const Vec2& y : mesh.quadrature_points(t)) {
      const Vec3 v = field_value(mesh, chi, t, y);
      const Vec2 e = exact(y);
      num += w * (Vec2(v(1), v(2)) - e).squaredNorm() + w * v(0) * v(0);
      den += w * e.squaredNorm();
    }
  }
  if (norm_exact) *norm_exact = std::sqrt(den);
  return std::sqrt(num);
}

void correctors(Outcome& o) {
  const SvkMaterial mat{1.0, 1.0};
  const double nu = mat.poisson();
  const QForm6 q = isotropic_q6(mat);
  std::vector<double> e2s, e3s;
  double chi1 = 0.0;
  for (int level = 1; level <= 4; ++level) {
    const DiskMesh mesh = build_disk_mesh(level);
    const CorrectorSolution sol = solve_correctors(q, mesh);
    double n2 = 0.0, n3 = 0.0;
    const double e2 = l2_error(mesh, sol.chi[1], [&](const Vec2& y) {
      return Vec2(-nu * y.x() * y.y(), -nu * (y.y() * y.y() - y.x() * y.x()) / 2);
    }, &n2);
    const double e3 = l2_error(mesh, sol.chi[2], [&](const Vec2& y) {
      return Vec2(nu * (y.x() * y.x() - y.y() * y.y()) / 2, nu * y.x() * y.y());
    }, &n3);
    e2s.push_back(e2 / n2);
    e3s.push_back(e3 / n3);
    if (level == 4) chi1 = l2_error(mesh, sol.chi[0], [](const Vec2&) { return Vec2::Zero(); }, nullptr) / n2;
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < e2s.size(); ++k) decreasing = decreasing && e2s[k] < e2s[k - 1] && e3s[k] < e3s[k - 1];
  o.pass = decreasing && e2s.back() <= kCorrectorRelTol && e3s.back() <= kCorrectorRelTol && chi1 <= kCorrectorZeroTol;
  o.detail << "chi1 " << chi1 << ", chi2 errors";
  for (double e : e2s) o.detail << ' ' << e;
  o.detail << ", chi3 errors";
  for (double e : e3s) o.detail << ' ' << e;
}

void cell_oracle(Outcome& o) {
  const QForm6 q = isotropic_q6({1.0, 1.0});
  const DiskMesh mesh = build_disk_mesh(3);
  const Mat3 A = compute_A(q, mesh).A;
  std::mt19937 rng(2024);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Vec3 g = random_vec(rng, 2.0);
    const double a = g.dot(A * g);
    worst = std::max(worst, std::abs(brute_force_cell_min(q, mesh, g) - a) / (1.0 + std::abs(a)));
  }
  o.pass = worst <= kCellOracleTol;
  o.detail << "max scaled difference " << worst << " over 20 strains (mesh level 3)";
}

double variance(const std::vector<Vec3>& g) {
  Vec3 mean = Vec3::Zero();
  for (const Vec3& v : g) mean += v / static_cast<double>(g.size());
  double var = 0.0;
  for (const Vec3& v : g) var += (v - mean).squaredNorm() / static_cast<double>(g.size());
  return var;
}

void rod_oracle(Outcome& o) {
  const Skeleton sk = single_rod();
  const Mat3 A = compute_A(isotropic_q6({1.0, 1.0}), build_disk_mesh(4)).A(1, 1) * Mat3::Identity();
  const Mat3 M = 0.5 * skew(Vec3(1.0, 0.5, 0.3).normalized());
  LoadSet loads;
  loads.nodes.push_back({sk.vertex_at_end({0, true}), Vec3::Zero(), M});
  SolveOptions opts;
  opts.intervals_per_edge = 64;
  const Kappa2Solution sol = minimize_kappa2(sk, A, loads, opts);
  oracle::CantileverProblem p;
  p.frame = sk.segments[0].frame();
  p.A = A;
  p.M = M;
  const oracle::OracleResult ref = oracle::dense_rod_minimizer(p, 200, 3);
  const double rel = std::abs(sol.report.energy - ref.value) / std::abs(ref.value);
  const double var = variance(sol.report.gamma[0]);
  const double var_ref = variance(ref.gamma);
  o.pass = sol.report.converged && !ref.flagged && rel <= kRodOracleRelTol && var <= kGammaVarianceTol &&
           var_ref <= kGammaVarianceTol;
  o.detail << "solver " << sol.report.energy << " vs oracle " << ref.value << " (" << ref.resolution << "), rel "
           << rel << ", Gamma variance " << var << " (oracle " << var_ref << ")";
}

void hull_limit(Outcome& o) {
  const Skeleton sk = single_rod();
  for (const Vec3& Phi : {Vec3(0, 1, 0), Vec3(-0.5, 0.7, 0.2)}) {
    LoadSet loads;
    loads.kappa = 1.5;
    loads.nodes.push_back({sk.vertex_at_end({0, true}), Phi, Mat3::Zero()});
    const double exact = -(Phi.norm() - Phi.dot(sk.segments[0].t));
    double prev_gap = std::numeric_limits<double>::infinity();
    bool monotone = true;
    double gap60 = 0.0;
    o.detail << "Phi (" << Phi.transpose() << "): ";
    for (int count : {24, 60, 120, 240}) {
      SolveOptions opts;
      opts.intervals_per_edge = 4;
      opts.sample_count = count;
      const Kappa1Solution sol = minimize_kappa1(sk, loads, opts);
      const double gap = std::abs(sol.report.energy - exact) / std::abs(exact);
      monotone = monotone && gap <= prev_gap + 1e-12;
      prev_gap = gap;
      if (count == 60) gap60 = gap;
      o.detail << count << ":" << gap << ' ';
    }
    o.pass = o.pass && monotone && gap60 <= kHullRelTol;
  }
}

void upper_bound(Outcome& o) {
  const Skeleton sk = l_frame();
  const SvkMaterial mat{1.0, 1.0};
  const Mat3 A = compute_A(isotropic_q6(mat), build_disk_mesh(4)).A;
  LoadSet loads;
  loads.nodes.push_back({sk.vertex_at_end({1, true}), Vec3(0, 0, 0.3), Mat3::Zero()});
  const Kappa2Solution sol = minimize_kappa2(sk, A, loads, SolveOptions{});
  const double J2 = sol.report.energy;
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  double last = 0.0;
  o.detail << "J2 " << J2 << "; J/delta^4:";
  for (double delta : {1e-1, 1e-2, 1e-3}) {
    const auto [V, R] = squeeze_to_junction_form(sol.V, sol.R, sk, delta);
    const RodFieldSamples s = sample_elementary_deformation(V, R, sk, delta);
    const Energy3D e = evaluate_3d_energy(s, sk, mat, loads);
    const double gap = std::abs(e.scaled / J2 - 1.0);
    o.detail << ' ' << delta << ":" << e.scaled << " (gap " << gap << ")";
    monotone = monotone && gap < prev;
    prev = gap;
    last = gap;
  }
  o.pass = sol.report.converged && last <= kUpperBoundRelTol && monotone;
  if (!monotone) o.detail << "; gap not monotone";
}

void scaling(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> deltas = {0.2, 0.1, 0.05, 0.025};
  for (double kappa : {1.5, 2.0})
    for (Family f : {Family::Twist, Family::Bend, Family::Mixed}) {
      const ScalingReport r = scaling_study({f, kappa, 0.5, 1.0}, deltas, GridSpec{}, kSlopeTol);
      for (const auto& e : r.entries) {
        if (e.quantity == "dist_L2") continue;
        if (!e.pass) {
          o.pass = false;
          o.detail << family_name(f) << " kappa " << kappa << ' ' << e.quantity << " slope " << e.slope
                   << " vs " << e.predicted << "; ";
        }
      }
    }
  const double sec = seconds_since(t0);
  if (sec >= kScalingSeconds) o.pass = false;
  o.detail << "6 families x 5 norms over " << deltas.size() << " deltas, " << sec << " s";
}

void invariants(Outcome& o) {
  std::mt19937 rng(7);
  double rt = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Vec3 w = random_vec(rng, 1.0);
    w *= (M_PI - 0.1) * std::uniform_real_distribution<double>(0.0, 1.0)(rng) / w.norm();
    rt = std::max(rt, (log_so3(exp_so3(w)) - w).norm());
  }

  const Mat3 Q = random_rotation(rng);
  const Skeleton a = l_frame();
  std::vector<SegmentSpec> rotated;
  for (const auto& s : a.segments) {
    SegmentSpec sp;
    sp.origin = Q * s.origin;
    sp.direction = Q * s.t;
    sp.length = s.length;
    sp.normal = Q * s.n;
    rotated.push_back(sp);
  }
  const Skeleton b = build_skeleton(rotated, {EndId{0, false}});
  const RodMesh mesh = make_rod_mesh(a, 8);
  RotationField Ra = RotationField::identity(mesh);
  for (Mat3& r : Ra.R) r = exp_so3(random_vec(rng, 0.5));
  RotationField Rb = Ra;
  for (Mat3& r : Rb.R) r = Q * r * Q.transpose();
  double frame = 0.0;
  for (int i = 0; i < 2; ++i) {
    const auto ga = gamma_strains(Ra, a, i), gb = gamma_strains(Rb, b, i);
    for (std::size_t k = 0; k < ga.size(); ++k) frame = std::max(frame, (ga[k] - gb[k]).norm());
  }

  const Mat3 A = Vec3(0.8, 2.0, 2.0).asDiagonal();
  const CenterlineField phi{mesh, reference_positions(a, mesh)};
  bool nonneg = assemble_J2(phi, RotationField::identity(mesh), A, LoadSet{}, a).total == 0.0;
  for (int k = 0; k < 20; ++k) {
    RotationField R = RotationField::identity(mesh);
    for (Mat3& r : R.R) r = exp_so3(random_vec(rng, 0.5));
    nonneg = nonneg && assemble_J2(phi, R, A, LoadSet{}, a).total > 0.0;
  }

  const Skeleton loop = build_skeleton(
      {SegmentSpec::from_endpoints(Vec3(0, 0, 0), Vec3(1, 0, 0)), SegmentSpec::from_endpoints(Vec3(1, 0, 0), Vec3(1, 1, 0)),
       SegmentSpec::from_endpoints(Vec3(1, 1, 0), Vec3(0, 1, 0)), SegmentSpec::from_endpoints(Vec3(0, 1, 0), Vec3(0, 0, 0)),
       SegmentSpec::from_endpoints(Vec3(0, 0, 0), Vec3(-1, 0, 0))},
      {EndId{4, true}});
  LoadSet lp;
  lp.kappa = 1.5;
  lp.nodes.push_back({loop.find_vertex(Vec3(1, 1, 0)), Vec3(0.1, 0.2, 0.3), Mat3::Zero()});
  SolveOptions opts;
  opts.intervals_per_edge = 2;
  const Kappa1Solution k1 = minimize_kappa1(loop, lp, opts);
  const double feas = std::max(k1.report.feasibility_residual, k1.report.max_closure);

  const double delta = 0.05;
  const RodFieldSamples s = sample_field(a, delta, GridSpec{}, [](int, double, const Vec3& x) {
    return Vec3(exp_so3(Vec3(0.4 * x(0), -0.3 * x(1), 0.2 * x(0) * x(1))) * x + 1e-3 * Vec3(x(1) * x(2), 0, x(0)));
  });
  const double recon = decompose_structure(s, a).reconstruction_error;

  o.pass = rt <= kRoundTripTol && frame <= kFrameTol && nonneg && feas <= kFeasibilityTol &&
           recon <= kReconstructionTol;
  o.detail << "round trip " << rt << ", frame " << frame << ", J2 >= 0 " << (nonneg ? "yes" : "no")
           << ", LP feasibility " << feas << ", reconstruction " << recon;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    void (*run)(Outcome&);
  };
  const Criterion criteria[] = {
      {"homogenized stiffness matrix", stiffness},
      {"corrector closed forms", correctors},
      {"cell-problem oracle equality", cell_oracle},
      {"kappa = 2 solver vs dense rod oracle", rod_oracle},
      {"kappa in (1,2) limit value under sample refinement", hull_limit},
      {"upper-bound consistency on the L-frame", upper_bound},
      {"scaling slopes of the decomposition", scaling},
      {"invariant suites", invariants},
  };
  int failed = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::printf("[%s] criterion %d: %s -- %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", index, c.name,
                o.detail.str().c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
