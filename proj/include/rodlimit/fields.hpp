#pragma once

#include "rodlimit/rotation.hpp"
#include "rodlimit/skeleton.hpp"

#include <vector>

namespace rodlimit {

// Nodal discretization of the skeleton. Every graph vertex is a node (with the
// vertex index as node index) and every segment carries an increasing list of
// arc-lengths that contains all vertex arcs on it.
struct RodMesh {
  std::vector<std::vector<double>> s;
  std::vector<std::vector<int>> node;
  std::vector<int> interval_offset;  // global index of the first interval per segment
  int node_count = 0;
  int vertex_count = 0;

  int segment_count() const { return static_cast<int>(s.size()); }
  int interval_count() const { return interval_offset.empty() ? 0 : interval_offset.back(); }
  int intervals_on(int i) const { return static_cast<int>(s[i].size()) - 1; }
  double h(int i, int k) const { return s[i][k + 1] - s[i][k]; }
};

// Each edge between consecutive vertices is split into `per_edge` equal intervals.
RodMesh make_rod_mesh(const Skeleton& sk, int per_edge);
// Custom arc-lengths per segment (vertex arcs are inserted if missing).
RodMesh make_rod_mesh(const Skeleton& sk, const std::vector<std::vector<double>>& arcs);

// Reference position phi of each node.
std::vector<Vec3> reference_positions(const Skeleton& sk, const RodMesh& mesh);

struct RotationField {
  RodMesh mesh;
  std::vector<Mat3> R;  // per node

  static RotationField identity(const RodMesh& mesh) {
    return {mesh, std::vector<Mat3>(mesh.node_count, Mat3::Identity())};
  }
  const Mat3& at(int segment, int k) const { return R[mesh.node[segment][k]]; }
  // Geodesic interpolation at arc-length s on a segment.
  Mat3 eval(int segment, double s) const;
};

struct CenterlineField {
  RodMesh mesh;
  std::vector<Vec3> V;  // per node

  const Vec3& at(int segment, int k) const { return V[mesh.node[segment][k]]; }
};

// Piecewise-constant conv(SO(3))-valued field with separate vertex values.
struct ConvexRotationField {
  RodMesh mesh;
  std::vector<ConvexRotation> interval;  // per global interval
  std::vector<ConvexRotation> vertex;    // per vertex
};

}  // namespace rodlimit
