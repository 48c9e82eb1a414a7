#include "taxicbf/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "taxicbf/error.hpp"

namespace taxicbf {

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kMpcCbf:
      return "mpc_cbf";
    case ControllerKind::kPidCbf:
      return "pid_cbf";
    case ControllerKind::kMpcNoRefCbf:
      return "mpc_no_ref_cbf";
  }
  return "mpc_cbf";
}

ControllerKind parse_controller(std::string_view name) {
  if (name == "mpc_cbf") return ControllerKind::kMpcCbf;
  if (name == "pid_cbf") return ControllerKind::kPidCbf;
  if (name == "mpc_no_ref_cbf") return ControllerKind::kMpcNoRefCbf;
  throw ValidationError("unknown controller '" + std::string(name) + "'");
}

void ScenarioConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(what) + " must be positive");
  };
  if (from.empty() || to.empty()) throw ValidationError("scenario.route: from/to required");
  positive(speed, "scenario.speed");
  positive(turning_radius, "scenario.turning_radius");
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw ValidationError("scenario.duration must be >= 0");
  }
  positive(sim_dt, "scenario.sim_dt");
  positive(controller_dt, "scenario.controller_dt");
  positive(trajectory_dt, "scenario.trajectory_dt");
  positive(sensing_radius, "scenario.sensing_radius");
  if (sim_dt > controller_dt) throw ValidationError("scenario.sim_dt must not exceed controller_dt");
  const double ratio = controller_dt / sim_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw ValidationError("scenario.controller_dt must be a whole multiple of sim_dt");
  }
  if (!(max_turn_deg > 0.0 && max_turn_deg < 180.0)) {
    throw ValidationError("scenario.max_turn_deg must lie in (0, 180)");
  }
  if (!(initial_speed >= 0.0) || !std::isfinite(initial_speed)) {
    throw ValidationError("scenario.initial_speed must be >= 0");
  }
  if (!wind_force.allFinite()) throw ValidationError("scenario.wind_force must be finite");
  vehicle.validate();
  barrier.validate();
  mpc.validate();
  pid.validate();
  std::vector<std::string> ids;
  for (const auto& o : obstacles) {
    if (o.id.empty()) throw ValidationError("scenario.obstacles: id must not be empty");
    if (o.position.has_value() == o.on_trajectory_at_t.has_value()) {
      throw ValidationError("scenario.obstacles['" + o.id +
                            "']: give exactly one of x/y or on_trajectory_at_t");
    }
    if (!(o.radius >= 0.0)) throw ValidationError("scenario.obstacles['" + o.id + "'].radius must be >= 0");
    for (const auto& seen : ids) {
      if (seen == o.id) throw ValidationError("scenario.obstacles: duplicate id '" + o.id + "'");
    }
    ids.push_back(o.id);
  }
}

Mission prepare_mission(const ScenarioConfig& cfg) {
  cfg.validate();
  const AirportMap map = load_airport_map(cfg.map_path);
  const DirectedTaxiGraph dg = expand_directed(build_undirected(map), cfg.max_turn_deg);
  TaxiRoute route = shortest_taxi_path(dg, cfg.from, cfg.to);
  GeometricPath path = fillet_waypoints(route, cfg.turning_radius);
  ReferenceTrajectory reference = sample_reference(path, cfg.speed, cfg.trajectory_dt);

  std::vector<Obstacle> obstacles;
  for (const auto& spec : cfg.obstacles) {
    Obstacle o{spec.id, Vec2::Zero(), spec.radius};
    if (spec.position) {
      o.center = *spec.position;
    } else {
      const double t = *spec.on_trajectory_at_t;
      if (!(t >= 0.0) || t > reference.duration()) {
        throw ValidationError("scenario.obstacles['" + spec.id + "'].on_trajectory_at_t = " +
                              std::to_string(t) + " lies outside the trajectory duration " +
                              std::to_string(reference.duration()));
      }
      o.center = ref_at(reference, t).position;
    }
    obstacles.push_back(std::move(o));
  }
  validate_obstacles(obstacles);
  return {std::move(route), std::move(path), std::move(reference), std::move(obstacles)};
}

namespace {

using detail::json;

void read_pair(const json& j, const std::string& path, std::string_view key, double& lo, double& hi) {
  auto it = j.find(std::string(key));
  if (it == j.end()) return;
  const std::string p = detail::join_path(path, key);
  if (!it->is_array() || it->size() != 2) throw ValidationError(p + ": expected [min, max]");
  lo = detail::as_number((*it)[0], p + "[0]");
  hi = detail::as_number((*it)[1], p + "[1]");
}

void read_vehicle(const json& j, VehicleParams& v) {
  const std::string path = "scenario.vehicle";
  detail::reject_unknown(j, path, {"mass", "inertia", "friction", "force_limits", "torque_limits"});
  detail::read_number(j, path, "mass", v.mass);
  detail::read_number(j, path, "inertia", v.inertia);
  detail::read_number(j, path, "friction", v.friction);
  read_pair(j, path, "force_limits", v.force_min, v.force_max);
  read_pair(j, path, "torque_limits", v.torque_min, v.torque_max);
}

void read_barrier(const json& j, BarrierGains& b) {
  const std::string path = "scenario.barrier";
  detail::reject_unknown(j, path, {"alpha0_obs", "alpha1_obs", "alpha0_ref", "alpha1_ref", "delta",
                                   "tube_half_width"});
  detail::read_number(j, path, "alpha0_obs", b.alpha0_obs);
  detail::read_number(j, path, "alpha1_obs", b.alpha1_obs);
  detail::read_number(j, path, "alpha0_ref", b.alpha0_ref);
  detail::read_number(j, path, "alpha1_ref", b.alpha1_ref);
  detail::read_number(j, path, "delta", b.delta);
  detail::read_number(j, path, "tube_half_width", b.tube_half_width);
}

void read_mpc(const json& j, MpcConfig& m) {
  const std::string path = "scenario.mpc";
  detail::reject_unknown(j, path, {"horizon", "dt", "q_position", "q_heading", "r_force",
                                   "r_torque", "slack_weight", "sqp_iters", "sqp_tol"});
  detail::read_int(j, path, "horizon", m.horizon);
  detail::read_number(j, path, "dt", m.dt);
  detail::read_number(j, path, "q_position", m.q_position);
  detail::read_number(j, path, "q_heading", m.q_heading);
  detail::read_number(j, path, "r_force", m.r_force);
  detail::read_number(j, path, "r_torque", m.r_torque);
  detail::read_number(j, path, "slack_weight", m.slack_weight);
  detail::read_int(j, path, "sqp_iters", m.sqp_iters);
  detail::read_number(j, path, "sqp_tol", m.sqp_tol);
}

void read_pid(const json& j, PidGains& p) {
  const std::string path = "scenario.pid";
  detail::reject_unknown(j, path, {"k_s", "k_a", "k_pf", "k_if", "k_al", "k_t", "k_pt", "k_dt",
                                   "integral_clamp"});
  detail::read_number(j, path, "k_s", p.k_s);
  detail::read_number(j, path, "k_a", p.k_a);
  detail::read_number(j, path, "k_pf", p.k_pf);
  detail::read_number(j, path, "k_if", p.k_if);
  detail::read_number(j, path, "k_al", p.k_al);
  detail::read_number(j, path, "k_t", p.k_t);
  detail::read_number(j, path, "k_pt", p.k_pt);
  detail::read_number(j, path, "k_dt", p.k_dt);
  detail::read_number(j, path, "integral_clamp", p.integral_clamp);
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario: malformed JSON: ") + e.what());
  }
  const std::string root = "scenario";
  detail::reject_unknown(doc, root,
                         {"map", "route", "speed", "turning_radius", "controller", "obstacles",
                          "wind_force", "duration", "sim_dt", "controller_dt", "trajectory_dt",
                          "max_turn_deg", "sensing_radius", "initial_speed", "seed", "vehicle",
                          "barrier", "mpc", "pid"});

  ScenarioConfig cfg;
  std::filesystem::path map = detail::as_string(detail::require(doc, root, "map"), "scenario.map");
  cfg.map_path = map.is_absolute() ? map : base_dir / map;

  const auto& route = detail::require(doc, root, "route");
  detail::reject_unknown(route, "scenario.route", {"from", "to"});
  cfg.from = detail::as_string(detail::require(route, "scenario.route", "from"), "scenario.route.from");
  cfg.to = detail::as_string(detail::require(route, "scenario.route", "to"), "scenario.route.to");

  detail::read_number(doc, root, "speed", cfg.speed);
  detail::read_number(doc, root, "turning_radius", cfg.turning_radius);
  detail::read_number(doc, root, "duration", cfg.duration);
  detail::read_number(doc, root, "sim_dt", cfg.sim_dt);
  detail::read_number(doc, root, "controller_dt", cfg.controller_dt);
  detail::read_number(doc, root, "trajectory_dt", cfg.trajectory_dt);
  detail::read_number(doc, root, "max_turn_deg", cfg.max_turn_deg);
  detail::read_number(doc, root, "sensing_radius", cfg.sensing_radius);
  detail::read_number(doc, root, "initial_speed", cfg.initial_speed);

  if (auto it = doc.find("controller"); it != doc.end()) {
    try {
      cfg.controller = parse_controller(detail::as_string(*it, "scenario.controller"));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("scenario.controller: ") + e.what());
    }
  }
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) throw ValidationError("scenario.seed: expected a non-negative integer");
    cfg.seed = it->get<std::uint64_t>();
  }
  if (auto it = doc.find("wind_force"); it != doc.end()) {
    if (!it->is_array() || it->size() != 2) throw ValidationError("scenario.wind_force: expected [fx, fy]");
    cfg.wind_force = Vec2(detail::as_number((*it)[0], "scenario.wind_force[0]"),
                          detail::as_number((*it)[1], "scenario.wind_force[1]"));
  }
  if (auto it = doc.find("obstacles"); it != doc.end()) {
    if (!it->is_array()) throw ValidationError("scenario.obstacles: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "scenario.obstacles[" + std::to_string(i) + "]";
      const auto& o = (*it)[i];
      detail::reject_unknown(o, path, {"id", "x", "y", "on_trajectory_at_t", "radius"});
      ObstacleSpec spec;
      spec.id = detail::as_string(detail::require(o, path, "id"), path + ".id");
      detail::read_number(o, path, "radius", spec.radius);
      const bool has_x = o.contains("x");
      const bool has_y = o.contains("y");
      if (has_x != has_y) throw ValidationError(path + ": x and y must be given together");
      if (has_x) {
        spec.position = Vec2(detail::as_number(o["x"], path + ".x"), detail::as_number(o["y"], path + ".y"));
      }
      if (o.contains("on_trajectory_at_t")) {
        spec.on_trajectory_at_t = detail::as_number(o["on_trajectory_at_t"], path + ".on_trajectory_at_t");
      }
      cfg.obstacles.push_back(std::move(spec));
    }
  }
  if (auto it = doc.find("vehicle"); it != doc.end()) read_vehicle(*it, cfg.vehicle);
  if (auto it = doc.find("barrier"); it != doc.end()) read_barrier(*it, cfg.barrier);
  if (auto it = doc.find("mpc"); it != doc.end()) read_mpc(*it, cfg.mpc);
  if (auto it = doc.find("pid"); it != doc.end()) read_pid(*it, cfg.pid);

  cfg.validate();
  if (!(cfg.duration > 0.0)) throw ValidationError("scenario.duration must be positive");

  // Pin trajectory-relative obstacles to coordinates.
  const Mission mission = prepare_mission(cfg);
  for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
    cfg.obstacles[i].position = mission.obstacles[i].center;
    cfg.obstacles[i].on_trajectory_at_t.reset();
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

}  // namespace taxicbf
