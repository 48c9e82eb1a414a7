#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taxicbf/scenario.hpp"

namespace taxicbf {

// Barrier values below this count as violated.
inline constexpr double kSafetyTolerance = 1e-6;

enum class TerminalStatus { kCompleted, kSafetyViolation, kFallbackEngaged, kTimeout };

std::string_view to_string(TerminalStatus status);

struct TraceRecord {
  double t = 0.0;
  VehicleState state;
  ControlInput u;
  Vec2 reference = Vec2::Zero();
  double h_ref = 0.0;
  double psi1_ref = 0.0;
  std::vector<double> h_obs;     // same order as TraceLog::obstacle_ids
  std::vector<double> psi1_obs;
  double slack = 0.0;
  bool fallback = false;
  // Set from the first step that relaxes the tracking barrier while an
  // obstacle is sensed until h_ref is back to >= 0; the tube may be left.
  bool obstacle_conflict = false;
};

struct TraceLog {
  std::string controller;
  double sim_dt = 0.0;
  std::vector<std::string> obstacle_ids;
  std::vector<TraceRecord> records;
  TerminalStatus status = TerminalStatus::kTimeout;
};

struct Metrics {
  std::string controller;
  TerminalStatus status = TerminalStatus::kTimeout;
  std::size_t steps = 0;
  double mean_position_error = 0.0;
  double max_position_error = 0.0;
  std::vector<std::pair<std::string, double>> min_h_obs;
  double min_h_ref = 0.0;
  double min_h_ref_unflagged = 0.0;  // excluding obstacle-conflict rows
  double control_effort = 0.0;       // sum |u|^2 dt
  std::optional<double> completion_time;
  std::size_t fallback_steps = 0;
  std::size_t conflict_steps = 0;
};

// Recomputes every metric from the trace; the status is taken from the trace.
Metrics compute_metrics(const TraceLog& trace);

// True when some obstacle barrier, or the tracking barrier outside a flagged
// obstacle conflict, dropped below -kSafetyTolerance.
bool has_safety_violation(const TraceLog& trace);

struct RunResult {
  TraceLog trace;
  Metrics metrics;
};

// Plan, fillet, sample, then run the closed loop until the vehicle is within
// w/2 of the end after the reference finishes, or the duration cap.
RunResult run_scenario(const ScenarioConfig& cfg);

// Fixed columns: t, px, py, vx, vy, theta, omega, uF, utau, h_ref,
// h_o_<id>..., slack, fallback. 17 significant digits.
std::string trace_csv(const TraceLog& trace);
std::string metrics_json(const Metrics& metrics);

// Columns: t, px, py, theta, vx, vy, ax, ay, kappa. 17 significant digits.
std::string reference_csv(const ReferenceTrajectory& traj);

// Writes `content` to `path`, raising IoError with the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Writes `csv_path` and the metrics sidecar next to it (<stem>.metrics.json).
void write_trace(const TraceLog& trace, const Metrics& metrics,
                 const std::filesystem::path& csv_path);

struct ComparisonReport {
  std::optional<RunResult> mpc;
  std::optional<RunResult> pid;
  std::string mpc_error;
  std::string pid_error;
  std::string verdict;  // "mpc_better", "pid_better", "tie" or "incomplete"
};

// Runs the scenario under mpc_cbf and pid_cbf. A failing run is reported
// through its error string rather than thrown.
ComparisonReport compare_controllers(const ScenarioConfig& base);
std::string comparison_json(const ComparisonReport& report);

}  // namespace taxicbf
