#pragma once

#include "rodlimit/loads.hpp"
#include "rodlimit/material.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace rodlimit {

// Polar layout of the unit cross-section: Gauss-Legendre radii (weight r) and
// uniform angles. Sample q = ir * angular + ith sits at r[ir] (cos, sin)(theta).
struct CrossSectionGrid {
  int radial = 0;
  int angular = 0;
  std::vector<double> r, theta;
  std::vector<Vec2> Y;
  std::vector<double> w;     // area weights, summing to pi
  Eigen::MatrixXd Dr, Dth;   // differentiation along r and theta

  int size() const { return static_cast<int>(Y.size()); }
};

CrossSectionGrid make_cross_section_grid(int radial, int angular);

struct GridSpec {
  int radial = 6;
  int angular = 32;
  double near_factor = 0.25;  // station spacing near vertices, in units of delta
  double far_spacing = 0.0;   // spacing away from vertices; 0 picks min segment length / 64

  void validate() const;
};

// Values of a deformation on one rod: station k, section sample q at index
// k * grid.size() + q.
struct RodSamples {
  std::vector<double> s;
  std::vector<Vec3> v;
  std::vector<double> weight;  // volume weight; zero where a lower-index rod owns the point
};

struct KnotCloud {
  int knot = -1;
  std::vector<Vec3> x, v;
  std::vector<double> w;
};

struct RodFieldSamples {
  double delta = 0.0;
  CrossSectionGrid grid;
  std::vector<RodSamples> rods;
  std::vector<KnotCloud> knots;  // points with |s - a| <= (rho0 + 1) delta

  Vec3 point(const Skeleton& sk, int segment, int k, int q) const;
};

// Station arc-lengths: graded refinement near vertices, breakpoints at
// a +- rho0 delta and a +- (rho0 + 1) delta for every knot.
std::vector<std::vector<double>> station_layout(const Skeleton& sk, double delta, const GridSpec& spec);

using FieldFunction = std::function<Vec3(int segment, double s, const Vec3& x)>;

RodFieldSamples sample_field(const Skeleton& sk, double delta, const GridSpec& spec, const FieldFunction& v);

// Centerline at arc s: exact integral of dV/ds = R t on the geodesic interval
// plus the linear share of any nodal mismatch.
Vec3 eval_centerline(const CenterlineField& V, const RotationField& R, const Skeleton& sk, int segment, double s);

// Reparametrize each segment so that R = R(A) and V is affine on every knot
// core [a - rho0 delta, a + rho0 delta]; V is re-integrated from the clamped ends.
std::pair<CenterlineField, RotationField> squeeze_to_junction_form(const CenterlineField& V, const RotationField& R,
                                                                   const Skeleton& sk, double delta);

RodFieldSamples sample_elementary_deformation(const CenterlineField& V, const RotationField& R, const Skeleton& sk,
                                              double delta, const GridSpec& spec = {}, double tol = 1e-9);

// Full gradient of a sampled field on one rod (finite differences along s,
// spectral in the section).
std::vector<Mat3> rod_gradient(const RodFieldSamples& samples, const Skeleton& sk, int segment,
                               const std::vector<Vec3>& u);

struct RodDecomposition {
  std::vector<Vec3> V;
  std::vector<Mat3> R;
  std::vector<Vec3> vbar;
  std::vector<int> flagged;  // stations with a degenerate section moment
};

RodDecomposition decompose_rod(const RodFieldSamples& samples, const Skeleton& sk, int segment);

struct RigidFit {
  Vec3 a = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  bool flagged = false;
};

// Weighted least-squares rigid motion v(x) ~ a + R (x - A).
RigidFit junction_rigid_fit(const std::vector<Vec3>& x, const std::vector<Vec3>& v, const std::vector<double>& w,
                            const Vec3& A);

struct NormTable {
  double vbar_L2 = 0.0;
  double grad_vbar_L2 = 0.0;
  double dR_ds_L2 = 0.0;
  double dV_ds_L2 = 0.0;  // || dV/ds - R t ||
  double dist_L2 = 0.0;   // || dist(grad v, SO(3)) ||
  double korn_H1 = 0.0;   // || v - I_d ||_{H1}
};

struct DecompositionResult {
  std::vector<std::vector<Vec3>> V;  // per segment, per station
  std::vector<std::vector<Mat3>> R;
  std::vector<std::vector<Vec3>> vbar;  // same layout as the samples
  NormTable norms;
  double reconstruction_error = 0.0;  // max |v - v_e - vbar|
  std::vector<std::string> flags;
};

DecompositionResult blend_structure_decomposition(const RodFieldSamples& samples,
                                                  const std::vector<RodDecomposition>& rods,
                                                  const std::vector<RigidFit>& junctions, const Skeleton& sk);

// decompose_rod on every segment, junction_rigid_fit on every knot, then blend.
DecompositionResult decompose_structure(const RodFieldSamples& samples, const Skeleton& sk);

struct Energy3D {
  double J = 0.0;
  double elastic = 0.0;
  double work = 0.0;  // int f . (v - I_d)
  double dist_L2 = 0.0;
  double scaled = 0.0;  // J / delta^(2 kappa)
  bool infinite = false;
  std::string location;
};

// Nodal loads (Phi, M) are spread over the core of their vertex as the
// canonical fields F = Phi / vol and G = M K^{-1} (z - c).
Energy3D evaluate_3d_energy(const RodFieldSamples& samples, const Skeleton& sk, const SvkMaterial& mat,
                            const LoadSet& loads);

enum class Family { Rigid, Twist, Bend, Mixed };

Family parse_family(const std::string& name);
std::string family_name(Family f);

struct FamilySpec {
  Family family = Family::Twist;
  double kappa = 2.0;
  double amplitude = 0.5;  // rotation rate c delta^(kappa - 2)
  double length = 1.0;
};

// Single rod along e1 clamped at s = 0 and the family member at thickness delta.
Skeleton family_skeleton(const FamilySpec& spec);
FieldFunction family_field(const FamilySpec& spec, double delta);

struct SlopeEntry {
  std::string quantity;
  double predicted = 0.0;
  double slope = 0.0;
  bool pass = false;
  bool degenerate = false;
  std::vector<double> values;
};

struct ScalingReport {
  FamilySpec family;
  std::vector<double> deltas;
  std::vector<SlopeEntry> entries;
  bool all_pass = false;
};

ScalingReport scaling_study(const FamilySpec& spec, const std::vector<double>& deltas, const GridSpec& grid = {},
                            double tolerance = 0.2);

}  // namespace rodlimit
