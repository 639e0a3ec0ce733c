#pragma once

#include "rodlimit/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rodlimit {

struct SegmentSpec {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  double length = 1.0;
  std::optional<Vec3> normal;

  static SegmentSpec from_endpoints(const Vec3& a, const Vec3& b);
};

struct Segment {
  Vec3 origin;
  Vec3 t, n, b;
  double length = 0.0;
  std::vector<double> knot_arcs;

  Vec3 point(double s) const { return origin + s * t; }
  Mat3 frame() const {
    Mat3 F;
    F << t, n, b;
    return F;
  }
};

struct Incidence {
  int segment;
  double arc;
};

struct Knot {
  Vec3 position;
  std::vector<Incidence> incidences;
  bool extremity_of_all = false;  // member of Gamma_K
};

// A segment end is identified by the segment index and which end it is.
struct EndId {
  int segment = 0;
  bool at_end = false;  // false: s = 0, true: s = L
  bool operator==(const EndId&) const = default;
};

struct Extremity {
  EndId id;
  Vec3 position;
};

// Graph vertices are the knots followed by the free extremities.
struct Vertex {
  Vec3 position;
  std::vector<Incidence> incidences;
  int knot = -1;
  int extremity = -1;
  bool clamped = false;
};

struct Skeleton {
  std::vector<Segment> segments;
  std::vector<Knot> knots;
  std::vector<Extremity> extremities;
  std::vector<int> clamped;  // indices into extremities
  std::vector<Vertex> vertices;
  double rho0 = 2.0;
  double delta0 = 0.0;
  double tolerance = 1e-9;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int knot_vertex(int k) const { return k; }
  int extremity_vertex(int e) const { return static_cast<int>(knots.size()) + e; }
  // Vertex at a segment end (knot or extremity).
  int vertex_at_end(const EndId& id) const;
  // Vertex at the given position, or -1.
  int find_vertex(const Vec3& p) const;
  // Sorted (arc, vertex) pairs along a segment, including both ends.
  std::vector<std::pair<double, int>> vertices_on(int segment) const;
  int edge_count() const;
  int independent_cycle_count() const;
};

std::pair<Vec3, Vec3> default_frame(const Vec3& t);

Skeleton build_skeleton(const std::vector<SegmentSpec>& specs,
                        const std::vector<EndId>& clamped, double rho0 = 2.0,
                        std::optional<double> delta0 = std::nullopt);

struct JunctionReport {
  std::vector<std::string> violations;
  double max_diameter = 0.0;
  double diameter_bound = 0.0;
  bool ok() const { return violations.empty(); }
};

JunctionReport validate_junctions(const Skeleton& sk, double delta);

// Membership of x in the rod piece union J_{A, h delta} around knot k.
bool in_junction(const Skeleton& sk, int knot, double h, double delta, const Vec3& x);
// Membership of x in the closed cylinder of radius delta around segment i.
bool in_rod(const Skeleton& sk, int segment, double delta, const Vec3& x);

}  // namespace rodlimit
