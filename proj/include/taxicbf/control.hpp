#pragma once

#include <vector>

#include <Eigen/Core>

#include "taxicbf/qp.hpp"
#include "taxicbf/safety.hpp"
#include "taxicbf/trajectory.hpp"
#include "taxicbf/vehicle.hpp"

namespace taxicbf {

struct MpcConfig {
  int horizon = 20;
  double dt = 0.2;  // 4 s lookahead
  double q_position = 1e3;
  double q_heading = 1e3;
  double r_force = 1e3;
  double r_torque = 1e3;
  double slack_weight = 1e7;
  int sqp_iters = 5;
  double sqp_tol = 1e-4;
  bool tracking_barrier = true;  // false gives the MPC without safe reference tracking

  void validate() const;
};

struct MpcResult {
  ControlInput u;
  double slack = 0.0;      // tracking relaxation applied at the current step
  bool fallback = false;   // QP infeasible, maximum braking returned
  int sqp_iterations = 0;
};

// Receding-horizon tracking controller with barrier constraints imposed at
// every prediction step. Holds the warm start between calls, so one instance
// belongs to one simulation.
class MpcCbfController {
 public:
  MpcCbfController(const VehicleParams& params, const BarrierGains& gains, const MpcConfig& cfg,
                   double sensing_radius);

  MpcResult step(const VehicleState& x, const ReferenceTrajectory& traj, double t,
                 const std::vector<Obstacle>& obstacles);

  void reset();
  const Eigen::VectorXd& plan() const { return plan_; }

 private:
  VehicleParams params_;
  BarrierGains gains_;
  MpcConfig cfg_;
  double sensing_radius_;
  Eigen::VectorXd plan_;  // [uF0, ut0, uF1, ut1, ...]
  bool has_plan_ = false;
};

// One-shot form: a fresh controller without warm start.
ControlInput mpc_cbf_step(const VehicleState& x, const ReferenceTrajectory& traj, double t,
                          const std::vector<Obstacle>& obstacles, const BarrierGains& gains,
                          const VehicleParams& params, const MpcConfig& cfg,
                          double sensing_radius);

struct PidGains {
  double k_s = 1.0;
  double k_a = 0.001;
  double k_pf = 1.0;
  double k_if = 0.5;
  double k_al = 1.0;
  double k_t = 0.01;
  double k_pt = 0.001;
  double k_dt = 0.22;
  double integral_clamp = 10.0;  // N*s

  void validate() const;
};

struct PidState {
  double integral = 0.0;
  double previous_torque_error = 0.0;
  bool initialized = false;
};

struct PidOutput {
  ControlInput u;  // unsaturated
  PidState state;
  double force_error = 0.0;
  double torque_error = 0.0;
};

PidOutput pid_control(const VehicleState& x, const RefSample& r, const PidGains& gains,
                      const PidState& state, double dt);

struct FilterResult {
  ControlInput u;
  bool tracking_dropped = false;
  double tracking_slack = 0.0;  // violation of the dropped tracking constraint
  bool fallback = false;
};

// argmin 1/2 |u - u_pid|^2 subject to the constraints and the input box.
FilterResult pid_cbf_filter(const ControlInput& u_pid,
                            const std::vector<SafetyConstraint>& constraints,
                            const VehicleParams& params);

}  // namespace taxicbf
