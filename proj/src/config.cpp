#include "rodlimit/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace rodlimit {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& e : v) s += (s.empty() ? "" : "\n") + e;
  return s;
}

class Reader {
public:
  std::vector<std::string> errors;
  bool schema = false;

  void fail(const std::string& path, const std::string& msg, bool is_schema = true) {
    errors.push_back((path.empty() ? "/" : path) + ": " + msg);
    schema = schema || is_schema;
  }

  bool object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    for (const auto& [key, val] : j.items())
      if (!allowed.count(key)) fail(path + "/" + key, "unknown key '" + key + "'");
    return true;
  }

  std::optional<double> number(const json& j, const std::string& path) {
    if (!j.is_number()) {
      fail(path, "expected a number");
      return std::nullopt;
    }
    return j.get<double>();
  }

  std::optional<int> integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) {
      fail(path, "expected an integer");
      return std::nullopt;
    }
    return j.get<int>();
  }

  std::optional<Vec3> vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) {
      fail(path, "expected an array of 3 numbers");
      return std::nullopt;
    }
    Vec3 v;
    for (int k = 0; k < 3; ++k) {
      auto x = number(j[k], path + "/" + std::to_string(k));
      if (!x) return std::nullopt;
      v(k) = *x;
    }
    return v;
  }

  std::optional<Mat3> mat3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) {
      fail(path, "expected a 3x3 array");
      return std::nullopt;
    }
    Mat3 M;
    for (int r = 0; r < 3; ++r) {
      auto row = vec3(j[r], path + "/" + std::to_string(r));
      if (!row) return std::nullopt;
      M.row(r) = row->transpose();
    }
    return M;
  }

  template <class T, class F>
  void optional_field(const json& obj, const char* key, const std::string& path, T& target, F read) {
    if (!obj.contains(key)) return;
    if (auto v = (this->*read)(obj.at(key), path + "/" + key)) target = *v;
  }
};

std::optional<EndId> read_end(Reader& rd, const json& j, const std::string& path, int nseg) {
  if (!rd.object(j, path, {"segment", "end"})) return std::nullopt;
  if (!j.contains("segment") || !j.contains("end")) {
    rd.fail(path, "expected keys 'segment' and 'end'");
    return std::nullopt;
  }
  auto seg = rd.integer(j["segment"], path + "/segment");
  if (!seg) return std::nullopt;
  if (*seg < 0 || *seg >= nseg) {
    rd.fail(path + "/segment", "dangling reference to segment " + std::to_string(*seg));
    return std::nullopt;
  }
  const json& e = j["end"];
  if (!e.is_string() || (e != "start" && e != "end")) {
    rd.fail(path + "/end", "expected \"start\" or \"end\"");
    return std::nullopt;
  }
  return EndId{*seg, e == "end"};
}

std::optional<SegmentSpec> read_segment(Reader& rd, const json& j, const std::string& path) {
  if (!rd.object(j, path, {"from", "to", "origin", "direction", "length", "normal"})) return std::nullopt;
  SegmentSpec spec;
  if (j.contains("from") || j.contains("to")) {
    if (j.contains("origin") || j.contains("direction") || j.contains("length")) {
      rd.fail(path, "use either from/to or origin/direction/length");
      return std::nullopt;
    }
    if (!j.contains("from") || !j.contains("to")) {
      rd.fail(path, "both 'from' and 'to' are required");
      return std::nullopt;
    }
    auto a = rd.vec3(j["from"], path + "/from");
    auto b = rd.vec3(j["to"], path + "/to");
    if (!a || !b) return std::nullopt;
    try {
      spec = SegmentSpec::from_endpoints(*a, *b);
    } catch (const DomainError& e) {
      rd.fail(path, e.what(), false);
      return std::nullopt;
    }
  } else {
    if (!j.contains("origin") || !j.contains("direction") || !j.contains("length")) {
      rd.fail(path, "expected from/to or origin/direction/length");
      return std::nullopt;
    }
    auto o = rd.vec3(j["origin"], path + "/origin");
    auto d = rd.vec3(j["direction"], path + "/direction");
    auto l = rd.number(j["length"], path + "/length");
    if (!o || !d || !l) return std::nullopt;
    spec.origin = *o;
    spec.direction = *d;
    spec.length = *l;
  }
  if (j.contains("normal")) {
    if (auto n = rd.vec3(j["normal"], path + "/normal")) spec.normal = *n;
  }
  return spec;
}

void read_material(Reader& rd, const json& j, MaterialConfig& mc) {
  const std::string path = "/material";
  if (!rd.object(j, path, {"lambda", "mu", "Q"})) return;
  if (j.contains("Q")) {
    if (j.contains("lambda") || j.contains("mu")) {
      rd.fail(path, "give either lambda/mu or Q, not both");
      return;
    }
    const json& q = j["Q"];
    if (!q.is_array() || q.size() != 36) {
      rd.fail(path + "/Q", "expected 36 numbers (row-major 6x6)");
      return;
    }
    Mat6 Q;
    for (int k = 0; k < 36; ++k) {
      auto x = rd.number(q[k], path + "/Q/" + std::to_string(k));
      if (!x) return;
      Q(k / 6, k % 6) = *x;
    }
    try {
      mc.q = QForm6::from_matrix(Q);
    } catch (const DomainError& e) {
      rd.fail(path + "/Q", e.what(), false);
    }
    return;
  }
  if (!j.contains("lambda") || !j.contains("mu")) {
    rd.fail(path, "expected keys 'lambda' and 'mu' (or 'Q')");
    return;
  }
  auto l = rd.number(j["lambda"], path + "/lambda");
  auto m = rd.number(j["mu"], path + "/mu");
  if (!l || !m) return;
  SvkMaterial mat{*l, *m};
  try {
    mat.validate();
    mc.svk = mat;
    mc.q = isotropic_q6(mat);
  } catch (const DomainError& e) {
    rd.fail(path, e.what(), false);
  }
}

int resolve_vertex(Reader& rd, const Skeleton& sk, const json& at, const std::string& path) {
  if (!rd.object(at, path, {"segment", "end", "point"})) return -1;
  if (at.contains("point")) {
    if (at.contains("segment") || at.contains("end")) {
      rd.fail(path, "give either 'point' or 'segment'/'end'");
      return -1;
    }
    auto p = rd.vec3(at["point"], path + "/point");
    if (!p) return -1;
    const int v = sk.find_vertex(*p);
    if (v < 0) rd.fail(path + "/point", "dangling reference: no knot or extremity at this point");
    return v;
  }
  auto e = read_end(rd, at, path, static_cast<int>(sk.segments.size()));
  return e ? sk.vertex_at_end(*e) : -1;
}

void read_loads(Reader& rd, const json& j, const Skeleton& sk, LoadSet& loads) {
  const std::string path = "/loads";
  if (!rd.object(j, path, {"kappa", "segments", "nodes"})) return;
  rd.optional_field(j, "kappa", path, loads.kappa, &Reader::number);
  const int nseg = static_cast<int>(sk.segments.size());
  if (j.contains("segments")) {
    const json& arr = j["segments"];
    if (!arr.is_array()) rd.fail(path + "/segments", "expected an array");
    else {
      loads.segments.assign(nseg, LoadTable{});
      for (std::size_t e = 0; e < arr.size(); ++e) {
        const std::string p = path + "/segments/" + std::to_string(e);
        if (!rd.object(arr[e], p, {"segment", "rows"})) continue;
        if (!arr[e].contains("segment") || !arr[e].contains("rows")) {
          rd.fail(p, "expected keys 'segment' and 'rows'");
          continue;
        }
        auto seg = rd.integer(arr[e]["segment"], p + "/segment");
        if (!seg) continue;
        if (*seg < 0 || *seg >= nseg) {
          rd.fail(p + "/segment", "dangling reference to segment " + std::to_string(*seg));
          continue;
        }
        const json& rows = arr[e]["rows"];
        if (!rows.is_array() || rows.empty()) {
          rd.fail(p + "/rows", "expected a non-empty array of rows [s, f(3), g_n(3), g_b(3)]");
          continue;
        }
        LoadTable tab;
        bool ok = true;
        for (std::size_t r = 0; r < rows.size() && ok; ++r) {
          const std::string pr = p + "/rows/" + std::to_string(r);
          if (!rows[r].is_array() || rows[r].size() != 10) {
            rd.fail(pr, "expected 10 numbers [s, f(3), g_n(3), g_b(3)]");
            ok = false;
            break;
          }
          double x[10];
          for (int k = 0; k < 10 && ok; ++k) {
            auto v = rd.number(rows[r][k], pr + "/" + std::to_string(k));
            ok = v.has_value();
            if (ok) x[k] = *v;
          }
          if (!ok) break;
          tab.s.push_back(x[0]);
          tab.f.emplace_back(x[1], x[2], x[3]);
          tab.gn.emplace_back(x[4], x[5], x[6]);
          tab.gb.emplace_back(x[7], x[8], x[9]);
        }
        if (ok) loads.segments[*seg] = std::move(tab);
      }
    }
  }
  if (j.contains("nodes")) {
    const json& arr = j["nodes"];
    if (!arr.is_array()) {
      rd.fail(path + "/nodes", "expected an array");
      return;
    }
    for (std::size_t e = 0; e < arr.size(); ++e) {
      const std::string p = path + "/nodes/" + std::to_string(e);
      if (!rd.object(arr[e], p, {"at", "Phi", "M", "samples"})) continue;
      if (!arr[e].contains("at")) {
        rd.fail(p, "expected key 'at'");
        continue;
      }
      NodeLoad nl;
      nl.vertex = resolve_vertex(rd, sk, arr[e]["at"], p + "/at");
      if (nl.vertex < 0) continue;
      if (arr[e].contains("samples")) {
        if (arr[e].contains("Phi") || arr[e].contains("M")) {
          rd.fail(p, "give either Phi/M or samples, not both");
          continue;
        }
        const json& sm = arr[e]["samples"];
        const std::string ps = p + "/samples";
        if (!rd.object(sm, ps, {"ns", "nr", "nth", "F", "G"})) continue;
        const int knot = sk.vertices[nl.vertex].knot;
        if (knot < 0) {
          rd.fail(ps, "sampled junction loads need a knot", false);
          continue;
        }
        int ns = 16, nr = 6, nth = 24;
        rd.optional_field(sm, "ns", ps, ns, &Reader::integer);
        rd.optional_field(sm, "nr", ps, nr, &Reader::integer);
        rd.optional_field(sm, "nth", ps, nth, &Reader::integer);
        try {
          const JunctionQuadrature quad = junction_quadrature(sk, knot, ns, nr, nth);
          std::vector<Vec3> F(quad.points.size(), Vec3::Zero()), G(quad.points.size(), Vec3::Zero());
          bool ok = true;
          for (const char* key : {"F", "G"}) {
            if (!sm.contains(key)) continue;
            const json& a = sm[key];
            if (!a.is_array() || a.size() != quad.points.size()) {
              rd.fail(ps + "/" + key, "expected " + std::to_string(quad.points.size()) + " 3-vectors");
              ok = false;
              continue;
            }
            auto& dst = key[0] == 'F' ? F : G;
            for (std::size_t k = 0; k < a.size() && ok; ++k) {
              auto v = rd.vec3(a[k], ps + "/" + key + "/" + std::to_string(k));
              ok = v.has_value();
              if (ok) dst[k] = *v;
            }
          }
          if (!ok) continue;
          const ReducedJunctionLoad red = reduce_junction_loads(quad, F, G, sk.knots[knot].position);
          nl.Phi = red.Phi;
          nl.M = red.M;
        } catch (const DomainError& ex) {
          rd.fail(ps, ex.what(), false);
          continue;
        }
      } else {
        if (arr[e].contains("Phi"))
          if (auto v = rd.vec3(arr[e]["Phi"], p + "/Phi")) nl.Phi = *v;
        if (arr[e].contains("M"))
          if (auto m = rd.mat3(arr[e]["M"], p + "/M")) nl.M = *m;
      }
      loads.nodes.push_back(nl);
    }
  }
}

void read_solver(Reader& rd, const json& j, SolveOptions& o) {
  const std::string path = "/solver";
  if (!rd.object(j, path,
                 {"max_iterations", "max_outer", "gradient_tolerance", "closure_tolerance", "penalty",
                  "intervals_per_edge", "sample_count", "seed"}))
    return;
  rd.optional_field(j, "max_iterations", path, o.max_iterations, &Reader::integer);
  rd.optional_field(j, "max_outer", path, o.max_outer, &Reader::integer);
  rd.optional_field(j, "gradient_tolerance", path, o.gradient_tolerance, &Reader::number);
  rd.optional_field(j, "closure_tolerance", path, o.closure_tolerance, &Reader::number);
  rd.optional_field(j, "penalty", path, o.penalty, &Reader::number);
  rd.optional_field(j, "intervals_per_edge", path, o.intervals_per_edge, &Reader::integer);
  rd.optional_field(j, "sample_count", path, o.sample_count, &Reader::integer);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) rd.fail(path + "/seed", "expected a non-negative integer");
    else o.seed = j["seed"].get<unsigned>();
  }
  try {
    o.validate();
  } catch (const DomainError& e) {
    rd.fail(path, e.what(), false);
  }
}

void read_decompose(Reader& rd, const json& j, DecomposeConfig& d) {
  const std::string path = "/decompose";
  if (!rd.object(j, path, {"delta", "radial", "angular", "near_factor", "far_spacing"})) return;
  rd.optional_field(j, "delta", path, d.delta, &Reader::number);
  rd.optional_field(j, "radial", path, d.grid.radial, &Reader::integer);
  rd.optional_field(j, "angular", path, d.grid.angular, &Reader::integer);
  rd.optional_field(j, "near_factor", path, d.grid.near_factor, &Reader::number);
  rd.optional_field(j, "far_spacing", path, d.grid.far_spacing, &Reader::number);
  if (d.delta < 0.0) rd.fail(path + "/delta", "must be >= 0", false);
  try {
    d.grid.validate();
  } catch (const DomainError& e) {
    rd.fail(path, e.what(), false);
  }
}

void read_scaling(Reader& rd, const json& j, ScalingConfig& sc) {
  const std::string path = "/scaling";
  if (!rd.object(j, path, {"family", "kappa", "amplitude", "length", "deltas", "tolerance"})) return;
  if (j.contains("family")) {
    if (!j["family"].is_string()) rd.fail(path + "/family", "expected a string");
    else {
      try {
        sc.family.family = parse_family(j["family"].get<std::string>());
      } catch (const DomainError& e) {
        rd.fail(path + "/family", e.what());
      }
    }
  }
  rd.optional_field(j, "kappa", path, sc.family.kappa, &Reader::number);
  rd.optional_field(j, "amplitude", path, sc.family.amplitude, &Reader::number);
  rd.optional_field(j, "length", path, sc.family.length, &Reader::number);
  rd.optional_field(j, "tolerance", path, sc.tolerance, &Reader::number);
  if (j.contains("deltas")) {
    const json& a = j["deltas"];
    if (!a.is_array()) rd.fail(path + "/deltas", "expected an array of numbers");
    else {
      sc.deltas.clear();
      for (std::size_t k = 0; k < a.size(); ++k)
        if (auto v = rd.number(a[k], path + "/deltas/" + std::to_string(k))) sc.deltas.push_back(*v);
    }
  }
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("/: invalid JSON: ") + e.what()}, true);
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors, bool schema)
    : std::runtime_error(join(errors)), errors_(std::move(errors)), schema_(schema) {}

RunConfig parse_config_text(const std::string& text) {
  const json root = parse_json(text);
  Reader rd;
  RunConfig cfg;
  if (!rd.object(root, "", {"structure", "material", "loads", "solver", "cross_section", "decompose", "scaling"}))
    throw ConfigError(rd.errors, true);
  for (const char* req : {"structure", "material"})
    if (!root.contains(req)) rd.fail(std::string("/") + req, "missing required block");

  bool have_skeleton = false;
  if (root.contains("structure")) {
    const json& st = root["structure"];
    const std::string path = "/structure";
    if (rd.object(st, path, {"segments", "clamped", "rho0", "delta0"})) {
      std::vector<SegmentSpec> specs;
      std::vector<EndId> clamped;
      bool ok = true;
      if (!st.contains("segments") || !st["segments"].is_array() || st["segments"].empty()) {
        rd.fail(path + "/segments", "expected a non-empty array of segments");
        ok = false;
      } else {
        for (std::size_t i = 0; i < st["segments"].size(); ++i) {
          auto s = read_segment(rd, st["segments"][i], path + "/segments/" + std::to_string(i));
          if (s) specs.push_back(*s);
          else ok = false;
        }
      }
      if (st.contains("clamped")) {
        if (!st["clamped"].is_array()) {
          rd.fail(path + "/clamped", "expected an array");
          ok = false;
        } else {
          for (std::size_t c = 0; c < st["clamped"].size(); ++c) {
            auto e = read_end(rd, st["clamped"][c], path + "/clamped/" + std::to_string(c),
                              static_cast<int>(specs.size()));
            if (e) clamped.push_back(*e);
            else ok = false;
          }
        }
      }
      double rho0 = 2.0;
      std::optional<double> delta0;
      rd.optional_field(st, "rho0", path, rho0, &Reader::number);
      if (st.contains("delta0"))
        if (auto d = rd.number(st["delta0"], path + "/delta0")) delta0 = *d;
      if (ok) {
        try {
          cfg.skeleton = build_skeleton(specs, clamped, rho0, delta0);
          have_skeleton = true;
        } catch (const DomainError& e) {
          rd.fail(path, e.what(), false);
        }
      }
    }
  }
  if (root.contains("material")) read_material(rd, root["material"], cfg.material);
  if (root.contains("loads")) {
    if (have_skeleton) {
      read_loads(rd, root["loads"], cfg.skeleton, cfg.loads);
      if (rd.errors.empty()) {
        try {
          cfg.loads.validate(cfg.skeleton);
        } catch (const DomainError& e) {
          rd.fail("/loads", e.what(), false);
        }
      }
    } else {
      rd.fail("/loads", "not checked because the structure block is invalid", false);
    }
  }
  if (root.contains("solver")) read_solver(rd, root["solver"], cfg.solver);
  if (root.contains("cross_section")) {
    const json& cs = root["cross_section"];
    if (rd.object(cs, "/cross_section", {"mesh_level"})) {
      rd.optional_field(cs, "mesh_level", "/cross_section", cfg.mesh_level, &Reader::integer);
      if (cfg.mesh_level < 0 || cfg.mesh_level > 8) rd.fail("/cross_section/mesh_level", "must be in [0, 8]", false);
    }
  }
  if (root.contains("decompose")) read_decompose(rd, root["decompose"], cfg.decompose);
  if (root.contains("scaling")) read_scaling(rd, root["scaling"], cfg.scaling);
  if (!rd.errors.empty()) throw ConfigError(rd.errors, rd.schema);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot open configuration file '" + path + "'"}, true);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ScalingConfig parse_scaling_text(const std::string& text) {
  const json root = parse_json(text);
  Reader rd;
  ScalingConfig sc;
  if (rd.object(root, "", {"structure", "material", "loads", "solver", "cross_section", "decompose", "scaling"}) &&
      root.contains("scaling"))
    read_scaling(rd, root["scaling"], sc);
  if (!rd.errors.empty()) throw ConfigError(rd.errors, rd.schema);
  return sc;
}

}  // namespace rodlimit
