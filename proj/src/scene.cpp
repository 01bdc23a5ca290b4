#include "egonav/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "egonav/error.hpp"

namespace egonav {

namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "ground", "stair", "door", "wall", "obstacle", "movable", "rough_ground", "unlabeled"};

constexpr std::array<std::string_view, 8> kKindNames = {
    "corridor", "tjunction", "lturn", "cross", "door", "clutter", "pedestrian_gap", "crowd"};

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (a + s * ab - p).norm();
}

double rect_distance(const Vec2& p, const Vec2& lo, const Vec2& hi) {
  const double dx = std::max({lo.x() - p.x(), 0.0, p.x() - hi.x()});
  const double dy = std::max({lo.y() - p.y(), 0.0, p.y() - hi.y()});
  return std::hypot(dx, dy);
}

using nlohmann::json;

json vec2_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec2 json_vec2(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}
Vec3 json_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json wall_json(const WallSegment& w) {
  return {{"type", "wall"},
          {"a", vec2_json(w.a)},
          {"b", vec2_json(w.b)},
          {"height", w.height},
          {"class", std::string(class_name(w.cls))}};
}

WallSegment json_wall(const json& j) {
  WallSegment w;
  w.a = json_vec2(j.at("a"));
  w.b = json_vec2(j.at("b"));
  w.height = j.value("height", 2.5);
  w.cls = class_from_name(j.value("class", std::string("wall")));
  return w;
}

// Builders shared by the layout generators.
struct Builder {
  SceneSpec s;

  void wall(Vec2 a, Vec2 b, double h = 2.5) { s.walls.push_back({a, b, h, SemanticClass::Wall}); }
  int node(Vec2 p) {
    s.graph.nodes.push_back(p);
    return static_cast<int>(s.graph.nodes.size()) - 1;
  }
  void edge(int a, int b) { s.graph.edges.emplace_back(a, b); }
  void finish(Rect extent) {
    s.ground_extent = extent;
    s.junctions.clear();
    for (int n = 0; n < static_cast<int>(s.graph.nodes.size()); ++n) {
      if (s.graph.successors(n).size() >= 2) s.junctions.push_back(n);
    }
    if (s.spawns.empty()) s.spawns.push_back({0, 0.3});
  }
};

SceneSpec mirror_y(SceneSpec s) {
  auto flip = [](Vec2& v) { v.y() = -v.y(); };
  for (auto& w : s.walls) {
    flip(w.a);
    flip(w.b);
  }
  for (auto& d : s.doors) {
    flip(d.panel.a);
    flip(d.panel.b);
  }
  for (auto& b : s.boxes) {
    const double lo = -b.max.y(), hi = -b.min.y();
    b.min.y() = lo;
    b.max.y() = hi;
  }
  for (auto& p : s.patches) {
    const double lo = -p.max.y(), hi = -p.min.y();
    p.min.y() = lo;
    p.max.y() = hi;
  }
  for (auto& p : s.pedestrians) {
    for (auto& w : p.waypoints) flip(w);
  }
  for (auto& n : s.graph.nodes) flip(n);
  const double lo = -s.ground_extent.max.y(), hi = -s.ground_extent.min.y();
  s.ground_extent.min.y() = lo;
  s.ground_extent.max.y() = hi;
  return s;
}

}  // namespace

std::string_view class_name(SemanticClass c) { return kClassNames.at(static_cast<std::size_t>(c)); }

SemanticClass class_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) return static_cast<SemanticClass>(i);
  }
  throw ParseError("unknown semantic class '" + std::string(name) + "'");
}

std::string_view kind_name(SceneKind k) { return kKindNames.at(static_cast<std::size_t>(k)); }

SceneKind kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<SceneKind>(i);
  }
  throw ParseError("unknown scene kind '" + std::string(name) + "'");
}

bool Door::is_open(double t) const {
  bool open = initially_open;
  for (double tt : toggle_times) {
    if (tt <= t) open = !open;
  }
  return open;
}

Vec2 Pedestrian::position(double t) const {
  if (waypoints.empty()) return Vec2::Zero();
  if (waypoints.size() == 1 || t <= times.front()) return waypoints.front();
  if (t >= times.back()) return waypoints.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times.begin());
  const double u = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return (1.0 - u) * waypoints[i - 1] + u * waypoints[i];
}

std::vector<int> RouteGraph::successors(int node) const {
  std::vector<int> out;
  for (const auto& [a, b] : edges) {
    if (a == node) out.push_back(b);
  }
  return out;
}

void SceneSpec::validate() const {
  if (!(ground_extent.max.x() > ground_extent.min.x()) ||
      !(ground_extent.max.y() > ground_extent.min.y())) {
    throw ParseError("ground_extent must have positive area");
  }
  for (const auto& w : walls) {
    if ((w.b - w.a).norm() <= 0.0 || !(w.height > 0.0)) throw ParseError("degenerate wall");
  }
  for (const auto& b : boxes) {
    if (!((b.max - b.min).array() > 0.0).all()) throw ParseError("degenerate box");
  }
  for (const auto& d : doors) {
    if (d.panel.cls != SemanticClass::Door) throw ParseError("door panel must carry class door");
    if (!std::is_sorted(d.toggle_times.begin(), d.toggle_times.end())) {
      throw ParseError("door toggle times must be ascending");
    }
  }
  for (const auto& p : pedestrians) {
    if (p.times.size() != p.waypoints.size() || p.waypoints.empty()) {
      throw ParseError("pedestrian needs matching times and waypoints");
    }
    if (!std::is_sorted(p.times.begin(), p.times.end())) {
      throw ParseError("pedestrian times must be ascending");
    }
  }
  const int n = static_cast<int>(graph.nodes.size());
  for (const auto& [a, b] : graph.edges) {
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) throw ParseError("edge references bad node");
  }
  for (int j : junctions) {
    if (j < 0 || j >= n) throw ParseError("junction references bad node");
    if (graph.successors(j).size() < 2) throw ParseError("junction with fewer than 2 branches");
  }
  if (spawns.empty()) throw ParseError("scene has no spawn region");
  for (const auto& s : spawns) {
    if (s.node < 0 || s.node >= n) throw ParseError("spawn references bad node");
    if (graph.successors(s.node).empty()) throw ParseError("spawn node has no outgoing edge");
    if (!ground_extent.contains(graph.nodes[static_cast<std::size_t>(s.node)])) {
      throw ParseError("spawn outside ground extent");
    }
  }
}

double SceneSpec::static_clearance(const Vec2& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : walls) {
    if (is_static_class(w.cls)) best = std::min(best, segment_distance(p, w.a, w.b));
  }
  for (const auto& b : boxes) {
    if (is_static_class(b.cls)) {
      best = std::min(best, rect_distance(p, b.min.head<2>(), b.max.head<2>()));
    }
  }
  return best;
}

Pose6D SceneSpec::spawn_pose(std::size_t i) const {
  const auto& sp = spawns.at(i);
  const auto succ = graph.successors(sp.node);
  if (succ.empty()) throw NoPath("spawn node has no outgoing edge");
  const Vec2 p = graph.nodes[static_cast<std::size_t>(sp.node)];
  const Vec2 d = graph.nodes[static_cast<std::size_t>(succ.front())] - p;
  return Pose6D::from_yaw(Vec3(p.x(), p.y(), camera_height), std::atan2(d.y(), d.x()));
}

std::string scene_to_json(const SceneSpec& s) {
  json j;
  j["name"] = s.name;
  j["ground_extent"] = {s.ground_extent.min.x(), s.ground_extent.min.y(), s.ground_extent.max.x(),
                        s.ground_extent.max.y()};
  j["camera_height"] = s.camera_height;
  json surfaces = json::array();
  for (const auto& w : s.walls) surfaces.push_back(wall_json(w));
  for (const auto& b : s.boxes) {
    surfaces.push_back({{"type", "box"},
                        {"min", vec3_json(b.min)},
                        {"max", vec3_json(b.max)},
                        {"class", std::string(class_name(b.cls))}});
  }
  for (const auto& p : s.patches) {
    surfaces.push_back({{"type", "ground_patch"},
                        {"min", vec2_json(p.min)},
                        {"max", vec2_json(p.max)},
                        {"class", std::string(class_name(p.cls))}});
  }
  j["surfaces"] = surfaces;
  json doors = json::array();
  for (const auto& d : s.doors) {
    json dj = wall_json(d.panel);
    dj.erase("type");
    dj["initially_open"] = d.initially_open;
    dj["toggle_times"] = d.toggle_times;
    doors.push_back(dj);
  }
  j["doors"] = doors;
  json peds = json::array();
  for (const auto& p : s.pedestrians) {
    json wp = json::array();
    for (const auto& w : p.waypoints) wp.push_back(vec2_json(w));
    peds.push_back({{"radius", p.radius}, {"height", p.height}, {"times", p.times}, {"waypoints", wp}});
  }
  j["pedestrians"] = peds;
  json nodes = json::array();
  for (const auto& n : s.graph.nodes) nodes.push_back(vec2_json(n));
  json edges = json::array();
  for (const auto& [a, b] : s.graph.edges) edges.push_back({a, b});
  j["nodes"] = nodes;
  j["edges"] = edges;
  j["junctions"] = s.junctions;
  json spawns = json::array();
  for (const auto& sp : s.spawns) spawns.push_back({{"node", sp.node}, {"radius", sp.radius}});
  j["spawns"] = spawns;
  return j.dump(2);
}

SceneSpec scene_from_json(std::string_view text) {
  SceneSpec s;
  try {
    const json j = json::parse(text);
    s.name = j.value("name", std::string());
    const auto& ext = j.at("ground_extent");
    if (!ext.is_array() || ext.size() != 4) throw ParseError("ground_extent needs 4 numbers");
    s.ground_extent.min = {ext[0].get<double>(), ext[1].get<double>()};
    s.ground_extent.max = {ext[2].get<double>(), ext[3].get<double>()};
    s.camera_height = j.value("camera_height", 1.0);
    for (const auto& sj : j.value("surfaces", json::array())) {
      const std::string type = sj.at("type").get<std::string>();
      if (type == "wall") {
        s.walls.push_back(json_wall(sj));
      } else if (type == "box") {
        Box b;
        b.min = json_vec3(sj.at("min"));
        b.max = json_vec3(sj.at("max"));
        b.cls = class_from_name(sj.at("class").get<std::string>());
        s.boxes.push_back(b);
      } else if (type == "ground_patch") {
        GroundPatch p;
        p.min = json_vec2(sj.at("min"));
        p.max = json_vec2(sj.at("max"));
        p.cls = class_from_name(sj.at("class").get<std::string>());
        s.patches.push_back(p);
      } else {
        throw ParseError("unknown surface type '" + type + "'");
      }
    }
    for (const auto& dj : j.value("doors", json::array())) {
      Door d;
      d.panel = json_wall(dj);
      d.panel.cls = class_from_name(dj.value("class", std::string("door")));
      d.initially_open = dj.value("initially_open", false);
      d.toggle_times = dj.value("toggle_times", std::vector<double>{});
      s.doors.push_back(d);
    }
    for (const auto& pj : j.value("pedestrians", json::array())) {
      Pedestrian p;
      p.radius = pj.value("radius", 0.25);
      p.height = pj.value("height", 1.75);
      p.times = pj.at("times").get<std::vector<double>>();
      for (const auto& w : pj.at("waypoints")) p.waypoints.push_back(json_vec2(w));
      s.pedestrians.push_back(p);
    }
    for (const auto& n : j.at("nodes")) s.graph.nodes.push_back(json_vec2(n));
    for (const auto& e : j.at("edges")) s.graph.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    s.junctions = j.value("junctions", std::vector<int>{});
    for (const auto& sp : j.at("spawns")) {
      s.spawns.push_back({sp.at("node").get<int>(), sp.value("radius", 0.3)});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene json: ") + e.what());
  }
  s.validate();
  return s;
}

void save_scene(const std::string& path, const SceneSpec& scene) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os << scene_to_json(scene) << '\n';
  if (!os) throw IoFailure("write failed: " + path);
}

SceneSpec load_scene(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return scene_from_json(ss.str());
}

LabeledPointCloud sample_static_geometry(const SceneSpec& scene, double spacing, double z_min,
                                         double z_max) {
  LabeledPointCloud cloud;
  auto sample_face = [&](const Vec2& a, const Vec2& b, double z0, double z1, SemanticClass cls) {
    const double len = (b - a).norm();
    const int ns = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    const double lo = std::max(z0, z_min), hi = std::min(z1, z_max);
    if (hi < lo) return;
    const int nz = std::max(1, static_cast<int>(std::ceil((hi - lo) / spacing)));
    for (int i = 0; i <= ns; ++i) {
      const Vec2 p = a + (b - a) * (static_cast<double>(i) / ns);
      for (int k = 0; k <= nz; ++k) {
        cloud.push_back(Vec3(p.x(), p.y(), lo + (hi - lo) * k / nz), cls);
      }
    }
  };
  for (const auto& w : scene.walls) {
    if (is_static_class(w.cls)) sample_face(w.a, w.b, 0.0, w.height, w.cls);
  }
  for (const auto& b : scene.boxes) {
    if (!is_static_class(b.cls)) continue;
    const Vec2 c00(b.min.x(), b.min.y()), c10(b.max.x(), b.min.y()), c11(b.max.x(), b.max.y()),
        c01(b.min.x(), b.max.y());
    sample_face(c00, c10, b.min.z(), b.max.z(), b.cls);
    sample_face(c10, c11, b.min.z(), b.max.z(), b.cls);
    sample_face(c11, c01, b.min.z(), b.max.z(), b.cls);
    sample_face(c01, c00, b.min.z(), b.max.z(), b.cls);
    if (b.max.z() >= z_min && b.max.z() <= z_max) {
      const int nx = std::max(1, static_cast<int>(std::ceil((b.max.x() - b.min.x()) / spacing)));
      const int ny = std::max(1, static_cast<int>(std::ceil((b.max.y() - b.min.y()) / spacing)));
      for (int i = 0; i <= nx; ++i) {
        for (int k = 0; k <= ny; ++k) {
          cloud.push_back(Vec3(b.min.x() + (b.max.x() - b.min.x()) * i / nx,
                               b.min.y() + (b.max.y() - b.min.y()) * k / ny, b.max.z()),
                          b.cls);
        }
      }
    }
  }
  return cloud;
}

// ---- layouts ----------------------------------------------------------------

SceneSpec make_corridor(const CorridorParams& p) {
  Builder b;
  b.s.name = "corridor";
  const double h = p.width / 2.0;
  b.wall({-1.0, h}, {p.length, h});
  b.wall({-1.0, -h}, {p.length, -h});
  b.wall({-1.0, -h}, {-1.0, h});
  b.wall({p.length, -h}, {p.length, h});
  const int n0 = b.node({0.0, 0.0});
  const int n1 = b.node({p.length - 0.8, 0.0});
  b.edge(n0, n1);
  b.finish({{-2.0, -h - 1.0}, {p.length + 1.0, h + 1.0}});
  return b.s;
}

SceneSpec make_t_junction(const TJunctionParams& p) {
  Builder b;
  b.s.name = "tjunction";
  const double h = p.width / 2.0;
  const double sx = p.stem_length, a = p.arm_length;
  b.wall({-1.0, h}, {sx - h, h});
  b.wall({-1.0, -h}, {sx - h, -h});
  b.wall({-1.0, -h}, {-1.0, h});
  b.wall({sx + h, -a}, {sx + h, a});
  b.wall({sx - h, h}, {sx - h, a});
  b.wall({sx - h, -a}, {sx - h, -h});
  b.wall({sx - h, a}, {sx + h, a});
  b.wall({sx - h, -a}, {sx + h, -a});
  const int n0 = b.node({0.0, 0.0});
  const int nj = b.node({sx, 0.0});
  const int nl = b.node({sx, a - 0.8});
  const int nr = b.node({sx, -(a - 0.8)});
  b.edge(n0, nj);
  b.edge(nj, nl);
  b.edge(nj, nr);
  b.finish({{-2.0, -a - 1.0}, {sx + h + 1.0, a + 1.0}});
  return b.s;
}

SceneSpec make_l_turn(const LTurnParams& p) {
  Builder b;
  b.s.name = "lturn";
  const double h = p.width / 2.0;
  const double sx = p.first_length, a = p.second_length;
  // Built as a left turn; mirrored for right turns.
  b.wall({-1.0, h}, {sx - h, h});
  b.wall({-1.0, -h}, {sx + h, -h});
  b.wall({-1.0, -h}, {-1.0, h});
  b.wall({sx + h, -h}, {sx + h, a});
  b.wall({sx - h, h}, {sx - h, a});
  b.wall({sx - h, a}, {sx + h, a});
  const int n0 = b.node({0.0, 0.0});
  const int nc = b.node({sx, 0.0});
  const int ne = b.node({sx, a - 0.8});
  b.edge(n0, nc);
  b.edge(nc, ne);
  b.finish({{-2.0, -h - 1.0}, {sx + h + 1.0, a + 1.0}});
  return p.left ? b.s : mirror_y(b.s);
}

SceneSpec make_cross(const CrossParams& p) {
  Builder b;
  b.s.name = "cross";
  const double h = p.width / 2.0;
  const double sx = p.stem_length, a = p.arm_length;
  const double ex = sx + a;  // far end of the straight branch
  b.wall({-1.0, h}, {sx - h, h});
  b.wall({-1.0, -h}, {sx - h, -h});
  b.wall({-1.0, -h}, {-1.0, h});
  b.wall({sx - h, h}, {sx - h, a});
  b.wall({sx - h, -a}, {sx - h, -h});
  b.wall({sx + h, h}, {sx + h, a});
  b.wall({sx + h, -a}, {sx + h, -h});
  b.wall({sx - h, a}, {sx + h, a});
  b.wall({sx - h, -a}, {sx + h, -a});
  b.wall({sx + h, h}, {ex, h});
  b.wall({sx + h, -h}, {ex, -h});
  b.wall({ex, -h}, {ex, h});
  const int n0 = b.node({0.0, 0.0});
  const int nj = b.node({sx, 0.0});
  const int nl = b.node({sx, a - 0.8});
  const int nr = b.node({sx, -(a - 0.8)});
  const int ns = b.node({ex - 0.8, 0.0});
  b.edge(n0, nj);
  b.edge(nj, nl);
  b.edge(nj, nr);
  b.edge(nj, ns);
  b.finish({{-2.0, -a - 1.0}, {ex + 1.0, a + 1.0}});
  return b.s;
}

SceneSpec make_door_corridor(const DoorParams& p) {
  SceneSpec s = make_corridor({p.length, p.width});
  s.name = "door";
  Door d;
  const double h = p.width / 2.0;
  d.panel = {{p.door_distance, -h}, {p.door_distance, h}, 2.2, SemanticClass::Door};
  d.initially_open = false;
  if (p.open_time > 0.0) {
    d.toggle_times = {p.open_time};
  } else {
    d.initially_open = true;
  }
  s.doors.push_back(d);
  return s;
}

SceneSpec make_clutter(const ClutterParams& p) {
  Builder b;
  b.s.name = "clutter";
  const double h = p.width / 2.0;
  b.wall({-1.0, h}, {p.length, h});
  b.wall({-1.0, -h}, {p.length, -h});
  b.wall({-1.0, -h}, {-1.0, h});
  b.wall({p.length, -h}, {p.length, h});
  int prev = b.node({0.0, 0.0});
  const double detour = p.obstacle_half + 0.7;
  for (double x : p.obstacle_x) {
    b.s.boxes.push_back({{x - p.obstacle_half, -p.obstacle_half, 0.0},
                         {x + p.obstacle_half, p.obstacle_half, 1.6},
                         SemanticClass::Obstacle});
    const int pre = b.node({x - 2.0, 0.0});
    const int left = b.node({x, detour});
    const int right = b.node({x, -detour});
    const int post = b.node({x + 2.0, 0.0});
    b.edge(prev, pre);
    b.edge(pre, left);
    b.edge(pre, right);
    b.edge(left, post);
    b.edge(right, post);
    prev = post;
  }
  const int end = b.node({p.length - 0.8, 0.0});
  b.edge(prev, end);
  b.finish({{-2.0, -h - 1.0}, {p.length + 1.0, h + 1.0}});
  return b.s;
}

SceneSpec make_pedestrian_gap(const PedestrianGapParams& p) {
  SceneSpec s = make_corridor({p.length, p.width});
  s.name = "pedestrian_gap";
  for (double side : {1.0, -1.0}) {
    Pedestrian ped;
    ped.radius = p.pedestrian_radius;
    const Vec2 c(p.gap_x, side * p.gap_half_width);
    if (p.sway > 0.0) {
      for (int k = 0; k <= 12; ++k) {
        ped.times.push_back(2.5 * k);
        const double off = (k % 2 == 0) ? p.sway : -0.5 * p.sway;
        ped.waypoints.push_back(c + Vec2(0.0, side * off));
      }
    } else {
      ped.times = {0.0};
      ped.waypoints = {c};
    }
    s.pedestrians.push_back(ped);
  }
  return s;
}

SceneSpec make_crowd(const CrowdParams& p) {
  SceneSpec s = make_corridor({p.length, p.width});
  s.name = "crowd";
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double lane = p.width / 2.0 - 0.55;
  for (int i = 0; i < p.walkers; ++i) {
    Pedestrian ped;
    ped.radius = 0.25;
    const double side = (i % 2 == 0) ? 1.0 : -1.0;
    const double y = side * (lane - 0.2 * u(rng));
    const double speed = 0.8 + 0.6 * u(rng);
    const bool oncoming = u(rng) < 0.5;
    const double x0 = oncoming ? p.length - 1.0 - 6.0 * u(rng) : 1.0 + 6.0 * u(rng);
    const double x1 = oncoming ? -0.5 : p.length - 0.5;
    ped.times = {0.0, std::abs(x1 - x0) / speed};
    ped.waypoints = {Vec2(x0, y), Vec2(x1, y)};
    s.pedestrians.push_back(ped);
  }
  return s;
}

SceneSpec random_scene(SceneKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto range = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  SceneSpec s;
  double width = range(2.4, 3.2);
  switch (kind) {
    case SceneKind::Corridor:
      s = make_corridor({range(18.0, 26.0), width});
      break;
    case SceneKind::TJunction:
      s = make_t_junction({range(9.0, 12.0), range(8.0, 10.0), width});
      break;
    case SceneKind::LTurn:
      s = make_l_turn({range(9.0, 12.0), range(8.0, 11.0), width, u(rng) < 0.5});
      break;
    case SceneKind::Cross:
      s = make_cross({range(9.0, 12.0), range(8.0, 10.0), width});
      break;
    case SceneKind::Door: {
      // Closed doors open 1-8 s after a walker from the near end would reach
      // them (cruise at 1.3 m/s plus ~0.5 s to accelerate from rest).
      const bool starts_open = u(rng) < 0.2;
      const double length = range(18.0, 24.0), door = range(3.5, 8.0);
      const double open_time = door / 1.3 + 0.5 + range(1.0, 8.0);
      s = make_door_corridor({length, width, door, starts_open ? 0.0 : open_time});
      break;
    }
    case SceneKind::Clutter: {
      ClutterParams cp;
      cp.width = range(3.6, 4.2);
      cp.length = range(20.0, 26.0);
      cp.obstacle_x = {range(6.5, 8.5)};
      if (cp.length > 21.0) cp.obstacle_x.push_back(cp.obstacle_x.front() + range(6.0, 9.0));
      cp.obstacle_half = range(0.3, 0.4);
      s = make_clutter(cp);
      break;
    }
    case SceneKind::PedestrianGap: {
      PedestrianGapParams gp;
      gp.width = range(3.8, 4.4);
      gp.length = range(18.0, 24.0);
      gp.gap_x = range(8.0, 12.0);
      gp.gap_half_width = range(0.85, 1.1);
      gp.sway = u(rng) < 0.5 ? range(0.05, 0.2) : 0.0;
      s = make_pedestrian_gap(gp);
      break;
    }
    case SceneKind::Crowd: {
      CrowdParams cp;
      cp.length = range(18.0, 24.0);
      cp.width = range(4.2, 4.8);
      cp.walkers = 2 + static_cast<int>(u(rng) * 4.0);
      cp.seed = rng();
      s = make_crowd(cp);
      break;
    }
  }
  // Cabinets along corridor walls: shallow boxes that leave the centreline clear.
  const bool plain = kind == SceneKind::Corridor || kind == SceneKind::Door ||
                     kind == SceneKind::TJunction || kind == SceneKind::LTurn;
  if (plain) {
    const int n = static_cast<int>(u(rng) * 3.0);
    const double half = width / 2.0;
    const double reach = s.graph.nodes[1].x() - 3.0;
    for (int i = 0; i < n && reach > 3.0; ++i) {
      const double x = range(2.0, reach);
      const double depth = range(0.25, 0.4);
      const double side = u(rng) < 0.5 ? 1.0 : -1.0;
      const double len = range(0.6, 1.4);
      const double y_in = side * (half - depth), y_out = side * half;
      bool overlaps_door = false;
      for (const auto& d : s.doors) {
        if (std::abs(d.panel.a.x() - x) < len / 2.0 + 0.6) overlaps_door = true;
      }
      if (overlaps_door) continue;
      s.boxes.push_back({{x - len / 2.0, std::min(y_in, y_out), 0.0},
                         {x + len / 2.0, std::max(y_in, y_out), range(1.1, 2.0)},
                         SemanticClass::Obstacle});
    }
  }
  // Semantic-only floor patches.
  if (u(rng) < 0.4) {
    const double x = range(3.0, 10.0);
    const SemanticClass cls = u(rng) < 0.5 ? SemanticClass::RoughGround : SemanticClass::Stair;
    s.patches.push_back({{x, -width / 2.0}, {x + range(1.0, 3.0), width / 2.0}, cls});
  }
  s.validate();
  return s;
}

}  // namespace egonav
