#include "rodlimit/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace rodlimit {

SegmentSpec SegmentSpec::from_endpoints(const Vec3& a, const Vec3& b) {
  SegmentSpec s;
  s.origin = a;
  s.length = (b - a).norm();
  if (!(s.length > 0.0)) throw DomainError("segment endpoints coincide");
  s.direction = (b - a) / s.length;
  return s;
}

std::pair<Vec3, Vec3> default_frame(const Vec3& t) {
  Vec3 n = std::abs(t.dot(Vec3::UnitZ())) < 0.9 ? Vec3(Vec3::UnitZ().cross(t)) : Vec3(Vec3::UnitX().cross(t));
  n.normalize();
  return {n, t.cross(n)};
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

struct Hit {
  Vec3 point;
  int i, j;
};

// Intersection of two segments, if any. Throws for collinear overlap.
std::optional<Vec3> intersect(const Segment& A, const Segment& B, double tol, int ia, int ib) {
  const Vec3 d = B.origin - A.origin;
  const Vec3 c = A.t.cross(B.t);
  if (c.norm() < 1e-12) {
    const double off = (d - d.dot(A.t) * A.t).norm();
    if (off > tol) return std::nullopt;
    const double u0 = d.dot(A.t);
    const double u1 = u0 + B.length * B.t.dot(A.t);
    const double lo = std::max(0.0, std::min(u0, u1));
    const double hi = std::min(A.length, std::max(u0, u1));
    if (hi - lo > tol) {
      std::ostringstream os;
      os << "segments " << ia << " and " << ib << " overlap along a line (at most one knot allowed)";
      throw DomainError(os.str());
    }
    if (hi - lo < -tol) return std::nullopt;
    return A.point(0.5 * (lo + hi));
  }
  // Closest points of the two lines.
  const double tt = A.t.dot(B.t);
  const double den = 1.0 - tt * tt;
  const double s = (d.dot(A.t) - tt * d.dot(B.t)) / den;
  const double u = (tt * d.dot(A.t) - d.dot(B.t)) / den;
  if (s < -tol || s > A.length + tol || u < -tol || u > B.length + tol) return std::nullopt;
  const Vec3 pa = A.point(s), pb = B.point(u);
  if ((pa - pb).norm() > tol) return std::nullopt;
  return 0.5 * (pa + pb);
}

double snap_arc(const Segment& s, const Vec3& p, double tol) {
  double a = (p - s.origin).dot(s.t);
  if (std::abs(a) <= tol) a = 0.0;
  if (std::abs(a - s.length) <= tol) a = s.length;
  return std::clamp(a, 0.0, s.length);
}

}  // namespace

Skeleton build_skeleton(const std::vector<SegmentSpec>& specs, const std::vector<EndId>& clamped,
                        double rho0, std::optional<double> delta0) {
  if (specs.empty()) throw DomainError("skeleton needs at least one segment");
  if (!(rho0 >= 1.0)) throw DomainError("rho0 must be >= 1");
  Skeleton sk;
  sk.rho0 = rho0;

  double scale = 1.0;
  for (const auto& sp : specs) scale = std::max({scale, sp.origin.cwiseAbs().maxCoeff(), sp.length});
  sk.tolerance = 1e-9 * scale;
  const double tol = sk.tolerance;

  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& sp = specs[i];
    if (!(sp.length > 0.0)) throw DomainError("segment " + std::to_string(i) + ": length must be positive");
    const double dn = sp.direction.norm();
    if (!(dn > 0.0) || std::abs(dn - 1.0) > 1e-6)
      throw DomainError("segment " + std::to_string(i) + ": direction is not a unit vector");
    Segment seg;
    seg.origin = sp.origin;
    seg.length = sp.length;
    seg.t = sp.direction / dn;
    if (sp.normal) {
      Vec3 n = *sp.normal - sp.normal->dot(seg.t) * seg.t;
      if (n.norm() < 1e-6) throw DomainError("segment " + std::to_string(i) + ": normal is parallel to the direction");
      seg.n = n.normalized();
      seg.b = seg.t.cross(seg.n);
    } else {
      std::tie(seg.n, seg.b) = default_frame(seg.t);
    }
    sk.segments.push_back(seg);
  }

  const int N = static_cast<int>(sk.segments.size());
  std::vector<Hit> hits;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      if (auto p = intersect(sk.segments[i], sk.segments[j], tol, i, j)) hits.push_back({*p, i, j});

  // Merge coincident intersection points into knots.
  for (const auto& h : hits) {
    int found = -1;
    for (std::size_t k = 0; k < sk.knots.size(); ++k)
      if ((sk.knots[k].position - h.point).norm() <= 10.0 * tol) found = static_cast<int>(k);
    if (found < 0) {
      sk.knots.push_back({h.point, {}, false});
      found = static_cast<int>(sk.knots.size()) - 1;
    }
    auto& kn = sk.knots[found];
    for (int s : {h.i, h.j}) {
      const bool present = std::any_of(kn.incidences.begin(), kn.incidences.end(),
                                       [&](const Incidence& in) { return in.segment == s; });
      if (!present) kn.incidences.push_back({s, 0.0});
    }
  }
  for (auto& kn : sk.knots) {
    std::sort(kn.incidences.begin(), kn.incidences.end(),
              [](const Incidence& a, const Incidence& b) { return a.segment < b.segment; });
    Vec3 mean = Vec3::Zero();
    for (auto& in : kn.incidences) {
      const auto& seg = sk.segments[in.segment];
      in.arc = snap_arc(seg, kn.position, tol);
      mean += seg.point(in.arc);
    }
    kn.position = mean / kn.incidences.size();
    kn.extremity_of_all = true;
    for (const auto& in : kn.incidences) {
      const auto& seg = sk.segments[in.segment];
      if (in.arc != 0.0 && in.arc != seg.length) kn.extremity_of_all = false;
      if ((seg.point(in.arc) - kn.position).norm() > 1e-9 * std::max(1.0, kn.position.norm()))
        throw DomainError("knot detection: inconsistent incidence");
    }
  }
  // Order knots deterministically by position.
  std::sort(sk.knots.begin(), sk.knots.end(), [](const Knot& a, const Knot& b) {
    return std::lexicographical_compare(a.position.data(), a.position.data() + 3, b.position.data(),
                                        b.position.data() + 3);
  });
  for (const auto& kn : sk.knots)
    for (const auto& in : kn.incidences) sk.segments[in.segment].knot_arcs.push_back(in.arc);
  for (auto& seg : sk.segments) {
    std::sort(seg.knot_arcs.begin(), seg.knot_arcs.end());
    for (std::size_t k = 1; k < seg.knot_arcs.size(); ++k)
      if (seg.knot_arcs[k] - seg.knot_arcs[k - 1] <= tol) throw DomainError("two knots coincide on a segment");
  }

  UnionFind uf(N);
  for (const auto& kn : sk.knots)
    for (const auto& in : kn.incidences) uf.unite(in.segment, kn.incidences.front().segment);
  for (int i = 1; i < N; ++i)
    if (uf.find(i) != uf.find(0)) throw DomainError("skeleton is not connected");

  for (int i = 0; i < N; ++i) {
    const auto& seg = sk.segments[i];
    for (bool at_end : {false, true}) {
      const double a = at_end ? seg.length : 0.0;
      const bool is_knot = std::find(seg.knot_arcs.begin(), seg.knot_arcs.end(), a) != seg.knot_arcs.end();
      if (!is_knot) sk.extremities.push_back({{i, at_end}, seg.point(a)});
    }
  }

  for (const auto& id : clamped) {
    if (id.segment < 0 || id.segment >= N)
      throw DomainError("clamped extremity references unknown segment " + std::to_string(id.segment));
    int found = -1;
    for (std::size_t e = 0; e < sk.extremities.size(); ++e)
      if (sk.extremities[e].id == id) found = static_cast<int>(e);
    if (found < 0)
      throw DomainError("clamped end of segment " + std::to_string(id.segment) + " is a knot, not an extremity");
    if (std::find(sk.clamped.begin(), sk.clamped.end(), found) == sk.clamped.end()) sk.clamped.push_back(found);
  }
  std::sort(sk.clamped.begin(), sk.clamped.end());

  for (std::size_t k = 0; k < sk.knots.size(); ++k) {
    Vertex v;
    v.position = sk.knots[k].position;
    v.incidences = sk.knots[k].incidences;
    v.knot = static_cast<int>(k);
    sk.vertices.push_back(v);
  }
  for (std::size_t e = 0; e < sk.extremities.size(); ++e) {
    const auto& ex = sk.extremities[e];
    Vertex v;
    v.position = ex.position;
    v.incidences = {{ex.id.segment, ex.id.at_end ? sk.segments[ex.id.segment].length : 0.0}};
    v.extremity = static_cast<int>(e);
    v.clamped = std::find(sk.clamped.begin(), sk.clamped.end(), static_cast<int>(e)) != sk.clamped.end();
    sk.vertices.push_back(v);
  }

  if (delta0) {
    if (!(*delta0 > 0.0)) throw DomainError("delta0 must be positive");
    sk.delta0 = *delta0;
  } else {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < sk.knots.size(); ++a)
      for (std::size_t b = a + 1; b < sk.knots.size(); ++b)
        dmin = std::min(dmin, (sk.knots[a].position - sk.knots[b].position).norm());
    if (sk.knots.size() < 2)
      for (const auto& seg : sk.segments) dmin = std::min(dmin, seg.length);
    sk.delta0 = 0.25 * dmin / rho0;
  }
  return sk;
}

int Skeleton::vertex_at_end(const EndId& id) const {
  const auto& seg = segments.at(id.segment);
  const double a = id.at_end ? seg.length : 0.0;
  for (const auto& v : vertices)
    for (const auto& in : v.incidences)
      if (in.segment == id.segment && in.arc == a) return static_cast<int>(&v - vertices.data());
  return -1;
}

int Skeleton::find_vertex(const Vec3& p) const {
  for (std::size_t k = 0; k < vertices.size(); ++k)
    if ((vertices[k].position - p).norm() <= 1e-9 * std::max(1.0, p.norm())) return static_cast<int>(k);
  return -1;
}

std::vector<std::pair<double, int>> Skeleton::vertices_on(int segment) const {
  std::vector<std::pair<double, int>> out;
  for (std::size_t k = 0; k < vertices.size(); ++k)
    for (const auto& in : vertices[k].incidences)
      if (in.segment == segment) out.emplace_back(in.arc, static_cast<int>(k));
  std::sort(out.begin(), out.end());
  return out;
}

int Skeleton::edge_count() const {
  int e = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) e += static_cast<int>(vertices_on(static_cast<int>(i)).size()) - 1;
  return e;
}

int Skeleton::independent_cycle_count() const { return edge_count() - vertex_count() + 1; }

bool in_rod(const Skeleton& sk, int segment, double delta, const Vec3& x) {
  const auto& seg = sk.segments[segment];
  const Vec3 d = x - seg.origin;
  const double u = d.dot(seg.t);
  const double margin = 1e-9 * delta;
  if (u < margin || u > seg.length - margin) return false;
  return (d - u * seg.t).norm() < delta - margin;
}

bool in_junction(const Skeleton& sk, int knot, double h, double delta, const Vec3& x) {
  const double margin = 1e-9 * delta;
  for (const auto& in : sk.knots[knot].incidences) {
    const auto& seg = sk.segments[in.segment];
    const Vec3 d = x - seg.origin;
    const double u = d.dot(seg.t);
    if (u < -margin || u > seg.length + margin) continue;
    if (std::abs(u - in.arc) >= h * delta - margin) continue;
    if ((d - u * seg.t).norm() < delta - margin) return true;
  }
  return false;
}

namespace {

// Sample points of rod piece (segment, s in [lo, hi]) on a small polar grid.
std::vector<Vec3> sample_piece(const Segment& seg, double lo, double hi, double delta, int ns = 9) {
  std::vector<Vec3> out;
  for (int a = 0; a < ns; ++a) {
    const double s = lo + (hi - lo) * a / (ns - 1);
    out.push_back(seg.point(s));
    for (double r : {0.5 * delta, delta}) {
      for (int k = 0; k < 8; ++k) {
        const double th = 2.0 * M_PI * k / 8;
        out.push_back(seg.point(s) + r * (std::cos(th) * seg.n + std::sin(th) * seg.b));
      }
    }
  }
  return out;
}

std::vector<Vec3> sample_junction(const Skeleton& sk, int knot, double h, double delta) {
  std::vector<Vec3> out;
  for (const auto& in : sk.knots[knot].incidences) {
    const auto& seg = sk.segments[in.segment];
    auto pts = sample_piece(seg, std::max(0.0, in.arc - h * delta), std::min(seg.length, in.arc + h * delta), delta);
    out.insert(out.end(), pts.begin(), pts.end());
  }
  return out;
}

}  // namespace

JunctionReport validate_junctions(const Skeleton& sk, double delta) {
  JunctionReport rep;
  const double rho = sk.rho0;
  const double h = rho + 1.0;
  rep.diameter_bound = (2.0 * rho + 5.0) * delta;
  if (!(delta > 0.0)) {
    rep.violations.push_back("delta must be positive");
    return rep;
  }
  const int K = static_cast<int>(sk.knots.size());
  std::vector<std::vector<Vec3>> clouds(K);
  for (int k = 0; k < K; ++k) clouds[k] = sample_junction(sk, k, h, delta);

  // (a) enlarged junctions pairwise disjoint, and not reaching a free extremity.
  for (int a = 0; a < K; ++a) {
    for (int b = a + 1; b < K; ++b) {
      const bool hit = std::any_of(clouds[a].begin(), clouds[a].end(),
                                   [&](const Vec3& x) { return in_junction(sk, b, h, delta, x); }) ||
                       std::any_of(clouds[b].begin(), clouds[b].end(),
                                   [&](const Vec3& x) { return in_junction(sk, a, h, delta, x); });
      if (hit) {
        std::ostringstream os;
        os << "disjointness: junctions of knots " << a << " and " << b << " overlap";
        rep.violations.push_back(os.str());
      }
    }
    for (const auto& in : sk.knots[a].incidences) {
      const auto& seg = sk.segments[in.segment];
      const bool low = in.arc > 0.0 && in.arc - h * delta <= 0.0;
      const bool high = in.arc < seg.length && in.arc + h * delta >= seg.length;
      if (low || high) {
        std::ostringstream os;
        os << "disjointness: junction of knot " << a << " reaches the end of segment " << in.segment;
        rep.violations.push_back(os.str());
      }
    }
  }

  // (b) rods minus the junction cores are pairwise disjoint cylinders.
  const int N = static_cast<int>(sk.segments.size());
  for (int i = 0; i < N; ++i) {
    const auto pts = sample_piece(sk.segments[i], 0.0, sk.segments[i].length, delta,
                                  std::max(9, static_cast<int>(std::ceil(4.0 * sk.segments[i].length / delta)) + 1));
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      for (const auto& x : pts) {
        bool in_core = false;
        for (int k = 0; k < K && !in_core; ++k) in_core = in_junction(sk, k, rho, delta, x);
        if (!in_core && in_rod(sk, j, delta, x)) {
          std::ostringstream os;
          os << "cylinders: rods " << i << " and " << j << " intersect outside the junctions";
          rep.violations.push_back(os.str());
          break;
        }
      }
    }
  }

  // (c) diameter of each enlarged junction.
  for (int k = 0; k < K; ++k) {
    double d = 0.0;
    for (std::size_t p = 0; p < clouds[k].size(); ++p)
      for (std::size_t q = p + 1; q < clouds[k].size(); ++q) d = std::max(d, (clouds[k][p] - clouds[k][q]).norm());
    rep.max_diameter = std::max(rep.max_diameter, d);
    if (d > rep.diameter_bound) {
      std::ostringstream os;
      os << "diameter: junction of knot " << k << " has diameter " << d << " > " << rep.diameter_bound;
      rep.violations.push_back(os.str());
    }
  }
  return rep;
}

}  // namespace rodlimit
