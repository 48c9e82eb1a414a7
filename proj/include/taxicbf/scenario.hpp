#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taxicbf/control.hpp"
#include "taxicbf/geo_graph.hpp"
#include "taxicbf/safety.hpp"
#include "taxicbf/trajectory.hpp"
#include "taxicbf/vehicle.hpp"

namespace taxicbf {

enum class ControllerKind { kMpcCbf, kPidCbf, kMpcNoRefCbf };

std::string_view to_string(ControllerKind kind);
ControllerKind parse_controller(std::string_view name);

// Either a fixed position or a time along the reference where the obstacle
// is dropped onto the path.
struct ObstacleSpec {
  std::string id;
  std::optional<Vec2> position;
  std::optional<double> on_trajectory_at_t;
  double radius = 0.0;
};

struct ScenarioConfig {
  std::filesystem::path map_path;
  std::string from;
  std::string to;
  double speed = 5.0;            // m/s
  double turning_radius = 20.0;  // q, m
  ControllerKind controller = ControllerKind::kMpcCbf;
  std::vector<ObstacleSpec> obstacles;
  Vec2 wind_force = Vec2::Zero();  // N
  double duration = 200.0;         // s, cap
  double sim_dt = 0.01;
  double controller_dt = 0.1;
  double trajectory_dt = kDefaultTrajectoryDt;
  double max_turn_deg = kDefaultMaxTurnDeg;
  double sensing_radius = 60.0;
  double initial_speed = 0.0;
  std::uint64_t seed = 0;  // reserved; runs are deterministic
  VehicleParams vehicle;
  BarrierGains barrier;
  MpcConfig mpc;
  PidGains pid;

  void validate() const;
};

// Everything derived from a scenario before the closed loop starts.
struct Mission {
  TaxiRoute route;
  GeometricPath path;
  ReferenceTrajectory reference;
  std::vector<Obstacle> obstacles;
};

Mission prepare_mission(const ScenarioConfig& cfg);

// Strict decoding: unknown fields and invariant violations raise
// ValidationError naming the field path. Relative map paths resolve against
// `base_dir`. Obstacles given by trajectory time come back with positions.
ScenarioConfig parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace taxicbf
