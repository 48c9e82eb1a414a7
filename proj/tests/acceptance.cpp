// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "barrier_fd.hpp"
#include "oracles.hpp"
#include "qp_cases.hpp"
#include "scenario_cases.hpp"
#include "taxicbf/simulation.hpp"

using namespace taxicbf;

namespace {

const std::filesystem::path kData = TAXICBF_DATA_DIR;
const std::filesystem::path kCli = TAXICBF_CLI_PATH;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict planner_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1);
  int queries = 0, mismatches = 0, turn_errors = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 7;
    const oracle::Graph og = oracle::random_connected_graph(rng, n);
    const DirectedTaxiGraph dg = expand_directed(cases::from_oracle(og), kDefaultMaxTurnDeg);
    const int hops = 2 * n;
    for (int s = 0; s < n; ++s) {
      for (int d = 0; d < n; ++d) {
        if (s == d) continue;
        ++queries;
        const double want = oracle::brute_force_route_cost(og, s, d, kDefaultMaxTurnDeg, hops);
        try {
          const TaxiRoute r = shortest_taxi_path(dg, og.ids[s], og.ids[d]);
          if (r.total_length != want) ++mismatches;
          if (!cases::route_turns_ok(r, kDefaultMaxTurnDeg)) ++turn_errors;
        } catch (const UnreachableError&) {
          if (std::isfinite(want)) ++mismatches;
        }
      }
    }
  }
  const double t = seconds_since(start);
  return {mismatches == 0 && turn_errors == 0 && t < 10.0,
          fmt("%d queries on 200 graphs, %d cost mismatches, %d turn violations, %.2f s", queries,
              mismatches, turn_errors, t)};
}

Verdict trajectory_kinematics() {
  std::mt19937_64 rng(2);
  double speed_err = 0.0, kappa_excess = -INFINITY, accel_err = 0.0, g1 = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double q = 8.0 + 1.5 * trial;
    const double speed = 1.0 + 0.3 * trial;
    const GeometricPath path = fillet_waypoints(cases::random_route(rng, q), q);
    g1 = std::max(g1, cases::tangent_mismatch(path));
    const ReferenceTrajectory tr = sample_reference(path, speed, 0.1);
    const auto& s = tr.samples();
    for (std::size_t i = 0; i + 2 < s.size(); ++i) {
      const double v = (s[i + 1].position - s[i].position).norm() / (s[i + 1].t - s[i].t);
      speed_err = std::max(speed_err, std::abs(v - speed) / speed);
    }
    for (const auto& r : s) {
      kappa_excess = std::max(kappa_excess, std::abs(r.curvature) - 1.0 / q);
      if (r.curvature != 0.0)
        accel_err = std::max(accel_err, std::abs(r.acceleration.norm() - speed * speed / q));
    }
  }
  return {speed_err < 1e-6 && kappa_excess <= 1e-9 && accel_err <= 1e-9 && g1 < 1e-9,
          fmt("speed rel err %.2e, max |k| - 1/q %.2e, arc |a| err %.2e, G1 mismatch %.2e",
              speed_err, kappa_excess, accel_err, g1)};
}

Verdict derivative_correctness() {
  const auto start = Clock::now();
  std::mt19937_64 rng(3);
  const BarrierGains g;
  const VehicleParams p;
  double worst = 0.0;
  bool torque_zero = true;
  for (int i = 0; i < 1000; ++i) {
    const VehicleState x = barrier_fd::random_state(rng);
    const RefSample r = barrier_fd::random_ref(rng);
    const Obstacle o = barrier_fd::random_obstacle(rng);
    const auto obs = barrier_fd::check(
        [&](const VehicleState& y, const RefSample&) { return obstacle_chain(y, o, g); },
        [&](const VehicleState& y, const RefSample&) { return obstacle_constraint(y, o, g, p); },
        g.alpha1_obs, x, r, p);
    const auto trk = barrier_fd::check(
        [&](const VehicleState& y, const RefSample& q) { return tracking_chain(y, q, g); },
        [&](const VehicleState& y, const RefSample& q) { return tracking_constraint(y, q, g, p); },
        g.alpha1_ref, x, r, p);
    worst = std::max({worst, obs.worst(), trk.worst()});
    torque_zero = torque_zero && obs.torque_zero && trk.torque_zero;
  }
  const double t = seconds_since(start);
  return {worst < 1e-4 && torque_zero && t < 30.0,
          fmt("1000 cases, worst relative error %.2e, %.2f s", worst, t)};
}

Verdict qp_solver() {
  std::mt19937_64 rng(4);
  double obj_err = 0.0, kkt = 0.0;
  int failures = 0;
  for (int i = 0; i < 500; ++i) {
    const qp_cases::Case c = i % 2 == 0 ? qp_cases::projection(rng) : qp_cases::random_2d(rng);
    try {
      const QpSolution s = solve_qp(c.qp);
      obj_err = std::max(obj_err, std::abs(s.objective - c.oracle_objective));
      if (s.objective > c.grid_bound + 1e-9) ++failures;
      kkt = std::max(kkt, kkt_residual(c.qp, s));
    } catch (const Error&) {
      ++failures;
    }
  }
  return {failures == 0 && obj_err <= 1e-6 && kkt <= 1e-8,
          fmt("500 problems, max objective gap %.2e, max KKT residual %.2e, %d failures", obj_err,
              kkt, failures)};
}

struct TimedRun {
  RunResult result;
  double seconds = 0.0;
};

TimedRun run(const std::string& scenario, ControllerKind controller) {
  ScenarioConfig cfg = load_scenario(kData / "scenarios" / scenario);
  cfg.controller = controller;
  const auto start = Clock::now();
  TimedRun r{run_scenario(cfg), 0.0};
  r.seconds = seconds_since(start);
  return r;
}

double min_h_obs(const Metrics& m) {
  double v = INFINITY;
  for (const auto& [id, h] : m.min_h_obs) v = std::min(v, h);
  return v;
}

std::string describe(const std::string& name, const TimedRun& r) {
  const Metrics& m = r.result.metrics;
  return fmt("%s: %s, min h_o %.4g, min h_ref %.4g (outside conflicts %.4g), %zu conflict rows, %.1f s",
             name.c_str(), std::string(to_string(m.status)).c_str(), min_h_obs(m), m.min_h_ref,
             m.min_h_ref_unflagged, m.conflict_steps, r.seconds);
}

Verdict forward_invariance() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"nominal.json", "crosswind_obstacles.json"}) {
    const TimedRun r = run(name, ControllerKind::kMpcCbf);
    const Metrics& m = r.result.metrics;
    pass = pass && m.status == TerminalStatus::kCompleted && min_h_obs(m) >= -kSafetyTolerance &&
           m.min_h_ref_unflagged >= -kSafetyTolerance && r.seconds < 60.0;
    detail += (detail.empty() ? "" : "; ") + describe(name, r);
  }
  return {pass, detail};
}

Verdict crosswind_tube() {
  const TimedRun no_ref = run("crosswind.json", ControllerKind::kMpcNoRefCbf);
  const TimedRun with_ref = run("crosswind.json", ControllerKind::kMpcCbf);
  return {no_ref.result.metrics.min_h_ref < 0.0 &&
              with_ref.result.metrics.min_h_ref >= -kSafetyTolerance,
          fmt("mpc_no_ref_cbf min h_ref %.4g, mpc_cbf min h_ref %.4g",
              no_ref.result.metrics.min_h_ref, with_ref.result.metrics.min_h_ref)};
}

Verdict nominal_comparison() {
  const ScenarioConfig cfg = load_scenario(kData / "scenarios" / "nominal.json");
  const ComparisonReport rep = compare_controllers(cfg);
  if (!rep.mpc || !rep.pid) return {false, "run error: " + rep.mpc_error + rep.pid_error};
  const Metrics& a = rep.mpc->metrics;
  const Metrics& b = rep.pid->metrics;
  return {a.status == TerminalStatus::kCompleted && b.status == TerminalStatus::kCompleted &&
              a.mean_position_error < b.mean_position_error,
          fmt("mpc_cbf %s mean error %.4f m, pid_cbf %s mean error %.4f m",
              std::string(to_string(a.status)).c_str(), a.mean_position_error,
              std::string(to_string(b.status)).c_str(), b.mean_position_error)};
}

Verdict pid_fragility() {
  const TimedRun r = run("crosswind.json", ControllerKind::kPidCbf);
  const TerminalStatus s = r.result.metrics.status;
  return {s == TerminalStatus::kSafetyViolation || s == TerminalStatus::kFallbackEngaged,
          fmt("pid_cbf under crosswind: %s, min h_ref %.4g", std::string(to_string(s)).c_str(),
              r.result.metrics.min_h_ref)};
}

double state_distance(const VehicleState& a, const VehicleState& b) {
  StateVector d = to_vector(a) - to_vector(b);
  d(4) = wrap_angle(d(4));
  return d.norm();
}

Verdict rk4_order() {
  const VehicleParams p;
  const ControlInput u{2.0, 0.8};
  const Disturbance w{Vec2(0.3, -0.2)};
  auto integrate = [&](double h) {
    VehicleState x{Vec2::Zero(), Vec2(3.0, 0.0), 0.0, 0.2};
    const int n = static_cast<int>(std::lround(4.0 / h));
    for (int i = 0; i < n; ++i) x = rk4_step(x, u, w, p, h);
    return x;
  };
  const double h = 0.2;
  const VehicleState truth = integrate(h / 64.0);
  const double order = oracle::observed_order(state_distance(integrate(h), truth),
                                              state_distance(integrate(h / 2.0), truth));
  return {order >= 3.5 && order <= 4.5, fmt("observed order %.3f", order)};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const auto root = std::filesystem::temp_directory_path() / "taxicbf_acceptance";
  std::filesystem::remove_all(root);
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    const auto out = root / ("run" + std::to_string(i));
    const std::string cmd = "\"" + kCli.string() + "\" simulate --scenario \"" +
                            (kData / "scenarios" / "crosswind_obstacles.json").string() +
                            "\" --out \"" + out.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc == -1 || !std::filesystem::exists(out / "mpc_cbf.csv"))
      return {false, fmt("simulate run %d produced no trace (status %d)", i, rc)};
    csv[i] = slurp(out / "mpc_cbf.csv");
  }
  std::filesystem::remove_all(root);
  return {!csv[0].empty() && csv[0] == csv[1],
          fmt("two simulate runs, %zu and %zu bytes, %s", csv[0].size(), csv[1].size(),
              csv[0] == csv[1] ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"planner matches brute force", planner_equivalence},
      {"trajectory kinematics", trajectory_kinematics},
      {"barrier derivatives match finite differences", derivative_correctness},
      {"QP solver matches oracles", qp_solver},
      {"forward invariance under mpc_cbf", forward_invariance},
      {"crosswind: tube kept only with tracking barrier", crosswind_tube},
      {"nominal: MPC tracks better than PID", nominal_comparison},
      {"crosswind: PID fails", pid_fragility},
      {"RK4 convergence order", rk4_order},
      {"simulate is byte-for-byte deterministic", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("criterion %2d %s  %s: %s\n", index, v.pass ? "PASS" : "FAIL", name,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
