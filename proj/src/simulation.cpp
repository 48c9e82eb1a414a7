#include "taxicbf/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>

#include "json.hpp"
#include "taxicbf/error.hpp"

namespace taxicbf {

namespace {

constexpr double kSlackActive = 1e-9;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// Uniform interface over the three controller variants.
class Controller {
 public:
  struct Output {
    ControlInput u;
    double slack = 0.0;
    bool fallback = false;
  };
  virtual ~Controller() = default;
  virtual Output compute(const VehicleState& x, double t) = 0;
};

class MpcAdapter final : public Controller {
 public:
  MpcAdapter(const ScenarioConfig& cfg, const Mission& mission, bool tracking)
      : mission_(mission), controller_(cfg.vehicle, cfg.barrier, with_tracking(cfg.mpc, tracking),
                                       cfg.sensing_radius) {}

  Output compute(const VehicleState& x, double t) override {
    const MpcResult r = controller_.step(x, mission_.reference, t, mission_.obstacles);
    return {r.u, r.slack, r.fallback};
  }

 private:
  static MpcConfig with_tracking(MpcConfig cfg, bool tracking) {
    cfg.tracking_barrier = tracking;
    return cfg;
  }
  const Mission& mission_;
  MpcCbfController controller_;
};

class PidAdapter final : public Controller {
 public:
  PidAdapter(const ScenarioConfig& cfg, const Mission& mission) : cfg_(cfg), mission_(mission) {}

  Output compute(const VehicleState& x, double t) override {
    const RefSample r = ref_at(mission_.reference, t);
    const PidOutput pid = pid_control(x, r, cfg_.pid, state_, cfg_.controller_dt);
    state_ = pid.state;
    const auto constraints = collect_constraints(x, mission_.obstacles, r, cfg_.barrier,
                                                 cfg_.vehicle, cfg_.sensing_radius);
    const FilterResult f = pid_cbf_filter(pid.u, constraints, cfg_.vehicle);
    return {f.u, f.tracking_slack, f.fallback};
  }

 private:
  const ScenarioConfig& cfg_;
  const Mission& mission_;
  PidState state_;
};

std::unique_ptr<Controller> make_controller(const ScenarioConfig& cfg, const Mission& mission) {
  switch (cfg.controller) {
    case ControllerKind::kMpcCbf:
      return std::make_unique<MpcAdapter>(cfg, mission, true);
    case ControllerKind::kMpcNoRefCbf:
      return std::make_unique<MpcAdapter>(cfg, mission, false);
    case ControllerKind::kPidCbf:
      return std::make_unique<PidAdapter>(cfg, mission);
  }
  throw ValidationError("unknown controller");
}

bool row_violates(const TraceRecord& r) {
  for (double h : r.h_obs) {
    if (h < -kSafetyTolerance) return true;
  }
  return r.h_ref < -kSafetyTolerance && !r.obstacle_conflict;
}

}  // namespace

std::string_view to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::kCompleted:
      return "completed";
    case TerminalStatus::kSafetyViolation:
      return "safety_violation";
    case TerminalStatus::kFallbackEngaged:
      return "fallback_engaged";
    case TerminalStatus::kTimeout:
      return "timeout";
  }
  return "timeout";
}

bool has_safety_violation(const TraceLog& trace) {
  return std::any_of(trace.records.begin(), trace.records.end(), row_violates);
}

Metrics compute_metrics(const TraceLog& trace) {
  Metrics m;
  m.controller = trace.controller;
  m.status = trace.status;
  m.steps = trace.records.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (const auto& id : trace.obstacle_ids) m.min_h_obs.emplace_back(id, kInf);
  m.min_h_ref = kInf;
  m.min_h_ref_unflagged = kInf;
  double error_sum = 0.0;
  for (const auto& r : trace.records) {
    const double err = (r.state.p - r.reference).norm();
    error_sum += err;
    m.max_position_error = std::max(m.max_position_error, err);
    for (std::size_t i = 0; i < r.h_obs.size(); ++i) {
      m.min_h_obs[i].second = std::min(m.min_h_obs[i].second, r.h_obs[i]);
    }
    m.min_h_ref = std::min(m.min_h_ref, r.h_ref);
    if (!r.obstacle_conflict) m.min_h_ref_unflagged = std::min(m.min_h_ref_unflagged, r.h_ref);
    m.control_effort += (r.u.force * r.u.force + r.u.torque * r.u.torque) * trace.sim_dt;
    if (r.fallback) ++m.fallback_steps;
    if (r.obstacle_conflict) ++m.conflict_steps;
  }
  if (!trace.records.empty()) {
    m.mean_position_error = error_sum / static_cast<double>(trace.records.size());
  }
  if (trace.status == TerminalStatus::kCompleted && !trace.records.empty()) {
    m.completion_time = trace.records.back().t;
  }
  return m;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  const Mission mission = prepare_mission(cfg);
  auto controller = make_controller(cfg, mission);

  TraceLog trace;
  trace.controller = std::string(to_string(cfg.controller));
  trace.sim_dt = cfg.sim_dt;
  std::vector<std::size_t> order(mission.obstacles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mission.obstacles[a].id < mission.obstacles[b].id;
  });
  for (std::size_t i : order) trace.obstacle_ids.push_back(mission.obstacles[i].id);

  const RefSample& start = mission.reference.front();
  VehicleState x;
  x.p = start.position;
  x.theta = start.heading;
  x.v = cfg.initial_speed * heading_vector(start.heading);

  const Disturbance wind{cfg.wind_force};
  const long ratio = std::max(1L, std::lround(cfg.controller_dt / cfg.sim_dt));
  const Vec2 goal = mission.reference.back().position;
  const double finish = mission.reference.duration();
  const double arrive = 0.5 * cfg.barrier.tube_half_width;

  Controller::Output held;
  bool completed = false;
  bool fallback_seen = false;
  bool in_conflict = false;
  for (long i = 0;; ++i) {
    const double t = static_cast<double>(i) * cfg.sim_dt;
    if (t >= cfg.duration - 1e-12) break;
    if (i % ratio == 0) held = controller->compute(x, t);

    const RefSample r = ref_at(mission.reference, t);
    TraceRecord rec;
    rec.t = t;
    rec.state = x;
    rec.u = held.u;
    rec.reference = r.position;
    const BarrierChain track = tracking_chain(x, r, cfg.barrier);
    rec.h_ref = track.h;
    rec.psi1_ref = track.psi1;
    bool sensed = false;
    for (std::size_t k : order) {
      const Obstacle& o = mission.obstacles[k];
      const BarrierChain c = obstacle_chain(x, o, cfg.barrier);
      rec.h_obs.push_back(c.h);
      rec.psi1_obs.push_back(c.psi1);
      if ((o.center - x.p).norm() <= cfg.sensing_radius) sensed = true;
    }
    rec.slack = held.slack;
    rec.fallback = held.fallback;
    // A conflict opens when the tracking slack is used with an obstacle in
    // range and lasts until the vehicle is back inside the tube.
    if (sensed && held.slack > kSlackActive) {
      in_conflict = true;
    } else if (in_conflict && rec.h_ref >= 0.0) {
      in_conflict = false;
    }
    rec.obstacle_conflict = in_conflict;
    fallback_seen = fallback_seen || held.fallback;
    trace.records.push_back(std::move(rec));

    if (t >= finish && (x.p - goal).norm() <= arrive) {
      completed = true;
      break;
    }
    x = rk4_step(x, held.u, wind, cfg.vehicle, cfg.sim_dt);
  }

  if (has_safety_violation(trace)) {
    trace.status = TerminalStatus::kSafetyViolation;
  } else if (fallback_seen) {
    trace.status = TerminalStatus::kFallbackEngaged;
  } else if (completed) {
    trace.status = TerminalStatus::kCompleted;
  } else {
    trace.status = TerminalStatus::kTimeout;
  }
  Metrics metrics = compute_metrics(trace);
  return {std::move(trace), std::move(metrics)};
}

std::string trace_csv(const TraceLog& trace) {
  std::string out = "t,px,py,vx,vy,theta,omega,uF,utau,h_ref";
  for (const auto& id : trace.obstacle_ids) out += ",h_o_" + id;
  out += ",slack,fallback\n";
  for (const auto& r : trace.records) {
    for (double v : {r.t, r.state.p.x(), r.state.p.y(), r.state.v.x(), r.state.v.y(), r.state.theta,
                     r.state.omega, r.u.force, r.u.torque, r.h_ref}) {
      out += format_double(v);
      out += ',';
    }
    for (double h : r.h_obs) {
      out += format_double(h);
      out += ',';
    }
    out += format_double(r.slack);
    out += r.fallback ? ",1\n" : ",0\n";
  }
  return out;
}

namespace {

nlohmann::ordered_json metrics_object(const Metrics& m) {
  nlohmann::ordered_json j;
  auto num = [](double v) -> nlohmann::ordered_json {
    if (!std::isfinite(v)) return nullptr;
    return v;
  };
  j["controller"] = m.controller;
  j["status"] = std::string(to_string(m.status));
  j["steps"] = m.steps;
  j["mean_position_error"] = num(m.mean_position_error);
  j["max_position_error"] = num(m.max_position_error);
  nlohmann::ordered_json obs = nlohmann::ordered_json::object();
  for (const auto& [id, v] : m.min_h_obs) obs[id] = num(v);
  j["min_h_obs"] = obs;
  j["min_h_ref"] = num(m.min_h_ref);
  j["min_h_ref_unflagged"] = num(m.min_h_ref_unflagged);
  j["control_effort"] = num(m.control_effort);
  j["completion_time"] = m.completion_time ? num(*m.completion_time) : nullptr;
  j["fallback_steps"] = m.fallback_steps;
  j["conflict_steps"] = m.conflict_steps;
  return j;
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string reference_csv(const ReferenceTrajectory& traj) {
  std::string out = "t,px,py,theta,vx,vy,ax,ay,kappa\n";
  for (const auto& r : traj.samples()) {
    const double row[] = {r.t,          r.position.x(),     r.position.y(),
                          r.heading,    r.velocity.x(),     r.velocity.y(),
                          r.acceleration.x(), r.acceleration.y(), r.curvature};
    for (std::size_t i = 0; i < std::size(row); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string metrics_json(const Metrics& metrics) { return metrics_object(metrics).dump(2) + "\n"; }

void write_trace(const TraceLog& trace, const Metrics& metrics,
                 const std::filesystem::path& csv_path) {
  write_text_file(csv_path, trace_csv(trace));
  std::filesystem::path sidecar = csv_path;
  sidecar.replace_extension(".metrics.json");
  write_text_file(sidecar, metrics_json(metrics));
}

ComparisonReport compare_controllers(const ScenarioConfig& base) {
  ComparisonReport report;
  ScenarioConfig mpc_cfg = base;
  mpc_cfg.controller = ControllerKind::kMpcCbf;
  ScenarioConfig pid_cfg = base;
  pid_cfg.controller = ControllerKind::kPidCbf;
  try {
    report.mpc = run_scenario(mpc_cfg);
  } catch (const std::exception& e) {
    report.mpc_error = e.what();
  }
  try {
    report.pid = run_scenario(pid_cfg);
  } catch (const std::exception& e) {
    report.pid_error = e.what();
  }
  if (!report.mpc || !report.pid) {
    report.verdict = "incomplete";
  } else {
    const double a = report.mpc->metrics.mean_position_error;
    const double b = report.pid->metrics.mean_position_error;
    report.verdict = a < b ? "mpc_better" : (b < a ? "pid_better" : "tie");
  }
  return report;
}

std::string comparison_json(const ComparisonReport& report) {
  nlohmann::ordered_json j;
  j["verdict"] = report.verdict;
  j["mpc_cbf"] = report.mpc ? metrics_object(report.mpc->metrics)
                            : nlohmann::ordered_json{{"error", report.mpc_error}};
  j["pid_cbf"] = report.pid ? metrics_object(report.pid->metrics)
                            : nlohmann::ordered_json{{"error", report.pid_error}};
  return j.dump(2) + "\n";
}

}  // namespace taxicbf
