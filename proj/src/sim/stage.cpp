#include "navrl/sim/stage.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace navrl::sim {

using nlohmann::json;

double StageSpec::obstacle_clearance(Vec2 p) const {
  double d = kNoHit;
  for (const auto& w : walls) d = std::min(d, dist_point_segment(p, w));
  for (const auto& c : circles) d = std::min(d, (p - c.c).norm() - c.r);
  return d;
}

void StageSpec::validate() const {
  auto ctx = [this](const std::string& field) {
    return "stage '" + name + "': " + field;
  };
  if (name.empty()) fail_config("stage: name must be non-empty");
  if (!(bounds.xmin < bounds.xmax && bounds.ymin < bounds.ymax))
    fail_config(ctx("bounds must have positive extent"));
  if (t_max <= 0) fail_config(ctx("t_max must be positive"));
  if (goal_clearance < 0) fail_config(ctx("goal_clearance must be >= 0"));
  for (size_t i = 0; i < walls.size(); ++i) {
    const auto& w = walls[i];
    if ((w.b - w.a).norm() == 0.0)
      fail_config(ctx("walls[" + std::to_string(i) + "] has zero length"));
  }
  for (size_t i = 0; i < circles.size(); ++i) {
    if (circles[i].r <= 0.0)
      fail_config(ctx("circles[" + std::to_string(i) +
                      "] radius must be positive"));
    if (!bounds.contains(circles[i].c))
      fail_config(ctx("circles[" + std::to_string(i) +
                      "] center outside bounds"));
  }
  if (!bounds.contains(spawn.pos()))
    fail_config(ctx("spawn outside bounds"));
  double spawn_clear = obstacle_clearance(spawn.pos());
  if (spawn_clear <= goal_clearance)
    fail_config(ctx("spawn too close to obstacles (clearance " +
                    std::to_string(spawn_clear) + " <= goal_clearance " +
                    std::to_string(goal_clearance) + ")"));
  if (goal_region.empty()) fail_config(ctx("goal_region must be non-empty"));
  for (size_t i = 0; i < goal_region.size(); ++i) {
    const Rect& r = goal_region[i];
    std::string f = "goal_region[" + std::to_string(i) + "]";
    if (r.xmin > r.xmax || r.ymin > r.ymax)
      fail_config(ctx(f + " has negative extent"));
    if (!bounds.contains({r.xmin, r.ymin}) || !bounds.contains({r.xmax, r.ymax}))
      fail_config(ctx(f + " outside bounds"));
  }
}

namespace {

[[noreturn]] void field_fail(const std::string& origin,
                             const std::string& field,
                             const std::string& what) {
  fail_config(origin + ": field '" + field + "': " + what);
}

double num_at(const json& j, const std::string& origin,
              const std::string& field, size_t idx) {
  const json& e = j[idx];
  if (!e.is_number())
    field_fail(origin, field + "[" + std::to_string(idx) + "]",
               "expected number");
  return e.get<double>();
}

std::vector<double> num_list(const json& j, const std::string& origin,
                             const std::string& field, size_t want) {
  if (!j.is_array() || j.size() != want)
    field_fail(origin, field,
               "expected array of " + std::to_string(want) + " numbers");
  std::vector<double> out(want);
  for (size_t i = 0; i < want; ++i) out[i] = num_at(j, origin, field, i);
  return out;
}

}  // namespace

StageSpec parse_stage(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail_config(origin + ": " + e.what());
  }
  if (!j.is_object()) fail_config(origin + ": top level must be an object");

  const std::set<std::string> known = {
      "v",     "name",        "bounds",         "walls", "circles",
      "spawn", "goal_region", "goal_clearance", "t_max"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      fail_config(origin + ": unknown field '" + it.key() + "'");
  for (const auto& req : {"v", "name", "bounds", "spawn", "goal_region"})
    if (!j.contains(req))
      fail_config(origin + ": missing field '" + std::string(req) + "'");

  if (!j["v"].is_string() || j["v"].get<std::string>() != "v1")
    field_fail(origin, "v", "unsupported schema version (want \"v1\")");

  StageSpec s;
  if (!j["name"].is_string()) field_fail(origin, "name", "expected string");
  s.name = j["name"].get<std::string>();

  auto b = num_list(j["bounds"], origin, "bounds", 4);
  s.bounds = {b[0], b[1], b[2], b[3]};

  if (j.contains("walls")) {
    if (!j["walls"].is_array()) field_fail(origin, "walls", "expected array");
    for (size_t i = 0; i < j["walls"].size(); ++i) {
      auto w = num_list(j["walls"][i], origin,
                        "walls[" + std::to_string(i) + "]", 4);
      s.walls.push_back({{w[0], w[1]}, {w[2], w[3]}});
    }
  }
  if (j.contains("circles")) {
    if (!j["circles"].is_array())
      field_fail(origin, "circles", "expected array");
    for (size_t i = 0; i < j["circles"].size(); ++i) {
      auto c = num_list(j["circles"][i], origin,
                        "circles[" + std::to_string(i) + "]", 3);
      s.circles.push_back({{c[0], c[1]}, c[2]});
    }
  }

  auto sp = num_list(j["spawn"], origin, "spawn", 3);
  s.spawn = {sp[0], sp[1], sp[2]};

  if (!j["goal_region"].is_array() || j["goal_region"].empty())
    field_fail(origin, "goal_region", "expected non-empty array");
  for (size_t i = 0; i < j["goal_region"].size(); ++i) {
    auto r = num_list(j["goal_region"][i], origin,
                      "goal_region[" + std::to_string(i) + "]", 4);
    s.goal_region.push_back({r[0], r[1], r[2], r[3]});
  }

  if (j.contains("goal_clearance")) {
    if (!j["goal_clearance"].is_number())
      field_fail(origin, "goal_clearance", "expected number");
    s.goal_clearance = j["goal_clearance"].get<double>();
  }
  if (j.contains("t_max")) {
    if (!j["t_max"].is_number_integer())
      field_fail(origin, "t_max", "expected integer");
    s.t_max = j["t_max"].get<int>();
  }

  s.validate();
  return s;
}

StageSpec load_stage_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_config("stage file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_stage(ss.str(), path);
}

}  // namespace navrl::sim
