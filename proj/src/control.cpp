#include "taxicbf/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taxicbf/error.hpp"

namespace taxicbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Added to the input block of the MPC Hessian so R = 0 stays solvable.
constexpr double kInputRegularization = 1e-6;
// Slack above this counts as a relaxed tracking constraint.
constexpr double kSlackTolerance = 1e-9;
// Obstacle violations weigh this much more than tracking ones in the merit.
constexpr double kHardViolationScale = 1e3;
// Shape of the pass-left / pass-right starting guesses.
constexpr double kSteerPulse = 0.4;           // s of torque each way
constexpr double kSteerTorqueFraction = 0.1;  // of the torque limit
// A fresh start replaces the warm-started plan only below this merit ratio,
// so the pass side does not flip between steps.
constexpr double kSwitchRatio = 0.5;

// Model step used for prediction: no disturbance, theta left unwrapped so
// finite differences stay smooth.
StateVector predict(const StateVector& s, double force, double torque, const VehicleParams& params,
                    double dt) {
  const ControlInput u{force, torque};
  const Disturbance calm;
  auto f = [&](const StateVector& y) { return dynamics_deriv(from_vector(y), u, calm, params); };
  const StateVector k1 = f(s);
  const StateVector k2 = f(s + 0.5 * dt * k1);
  const StateVector k3 = f(s + 0.5 * dt * k2);
  const StateVector k4 = f(s + dt * k3);
  return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double fd_step(double v) { return 1e-6 * std::max(1.0, std::abs(v)); }

struct StepJacobian {
  Eigen::Matrix<double, 6, 6> A;
  Eigen::Matrix<double, 6, 2> B;
};

StepJacobian step_jacobian(const StateVector& s, double force, double torque,
                           const VehicleParams& params, double dt) {
  StepJacobian J;
  for (int i = 0; i < 6; ++i) {
    const double h = fd_step(s(i));
    StateVector sp = s, sm = s;
    sp(i) += h;
    sm(i) -= h;
    J.A.col(i) = (predict(sp, force, torque, params, dt) - predict(sm, force, torque, params, dt)) /
                 (2.0 * h);
  }
  const double hf = fd_step(force);
  J.B.col(0) = (predict(s, force + hf, torque, params, dt) -
                predict(s, force - hf, torque, params, dt)) /
               (2.0 * hf);
  const double ht = fd_step(torque);
  J.B.col(1) = (predict(s, force, torque + ht, params, dt) -
                predict(s, force, torque - ht, params, dt)) /
               (2.0 * ht);
  return J;
}

// Gradient of a constraint margin with respect to the state, input held.
template <typename MarginFn>
Eigen::Matrix<double, 1, 6> margin_gradient(const MarginFn& margin, const StateVector& s) {
  Eigen::Matrix<double, 1, 6> g;
  for (int i = 0; i < 6; ++i) {
    const double h = fd_step(s(i));
    StateVector sp = s, sm = s;
    sp(i) += h;
    sm(i) -= h;
    g(i) = (margin(sp) - margin(sm)) / (2.0 * h);
  }
  return g;
}

}  // namespace

void MpcConfig::validate() const {
  if (horizon < 1) throw ValidationError("mpc.horizon must be >= 1");
  if (!(dt > 0.0)) throw ValidationError("mpc.dt must be positive");
  for (double w : {q_position, q_heading, r_force, r_torque, slack_weight}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("mpc weights must be >= 0");
  }
  if (slack_weight <= std::max(q_position, q_heading)) {
    throw ValidationError("mpc.slack_weight must dominate the tracking weights");
  }
  if (sqp_iters < 1) throw ValidationError("mpc.sqp_iters must be >= 1");
  if (!(sqp_tol > 0.0)) throw ValidationError("mpc.sqp_tol must be positive");
}

MpcCbfController::MpcCbfController(const VehicleParams& params, const BarrierGains& gains,
                                   const MpcConfig& cfg, double sensing_radius)
    : params_(params), gains_(gains), cfg_(cfg), sensing_radius_(sensing_radius) {
  params_.validate();
  gains_.validate();
  cfg_.validate();
  plan_ = Eigen::VectorXd::Zero(2 * cfg_.horizon);
}

void MpcCbfController::reset() {
  plan_.setZero();
  has_plan_ = false;
}

MpcResult MpcCbfController::step(const VehicleState& x, const ReferenceTrajectory& traj, double t,
                                 const std::vector<Obstacle>& obstacles) {
  const int N = cfg_.horizon;
  const int nu = 2 * N;
  const int ns = cfg_.tracking_barrier ? N : 0;
  const int nz = nu + ns;
  const double dt = cfg_.dt;

  std::vector<const Obstacle*> sensed;
  for (const auto& o : obstacles) {
    if ((o.center - x.p).norm() <= sensing_radius_) sensed.push_back(&o);
  }
  std::sort(sensed.begin(), sensed.end(),
            [](const Obstacle* a, const Obstacle* b) { return a->id < b->id; });

  std::vector<RefSample> refs(N + 1);
  for (int k = 0; k <= N; ++k) refs[k] = ref_at(traj, t + k * dt);

  // Cruise thrust: holds the reference speed against friction. Also the
  // restart point when the warm start coasts, since with zero thrust the
  // torque has no first-order effect on position and steering is invisible
  // to the linearization.
  const double cruise = std::clamp(std::max(params_.friction * traj.speed(), 0.1 * params_.force_max),
                                   params_.force_min, params_.force_max);
  auto clamp_inputs = [&](Eigen::VectorXd U) {
    for (int k = 0; k < N; ++k) {
      U(2 * k) = std::clamp(U(2 * k), params_.force_min, params_.force_max);
      U(2 * k + 1) = std::clamp(U(2 * k + 1), params_.torque_min, params_.torque_max);
    }
    return U;
  };
  Eigen::VectorXd cruise_start = Eigen::VectorXd::Zero(nu);
  for (int k = 0; k < N; ++k) cruise_start(2 * k) = cruise;
  cruise_start = clamp_inputs(cruise_start);

  const Eigen::Vector3d weights(cfg_.q_position, cfg_.q_position, cfg_.q_heading);

  QpProblem qp;
  qp.lower = Eigen::VectorXd::Zero(nz);
  qp.upper = Eigen::VectorXd::Constant(nz, kInf);
  for (int k = 0; k < N; ++k) {
    qp.lower(2 * k) = params_.force_min;
    qp.upper(2 * k) = params_.force_max;
    qp.lower(2 * k + 1) = params_.torque_min;
    qp.upper(2 * k + 1) = params_.torque_max;
  }

  auto rollout = [&](const Eigen::VectorXd& U) {
    std::vector<StateVector> xs(N + 1);
    xs[0] = to_vector(x);
    for (int k = 0; k < N; ++k) xs[k + 1] = predict(xs[k], U(2 * k), U(2 * k + 1), params_, dt);
    return xs;
  };

  // Nonlinear cost of an input sequence: tracking and input terms plus the
  // squared barrier violations along the rollout, used to rank SQP starts.
  auto merit = [&](const Eigen::VectorXd& U) {
    const std::vector<StateVector> xs = rollout(U);
    double cost = 0.0;
    for (int k = 0; k < N; ++k) {
      const Eigen::Vector3d err(xs[k + 1](0) - refs[k + 1].position.x(),
                                xs[k + 1](1) - refs[k + 1].position.y(),
                                wrap_angle(xs[k + 1](4) - refs[k + 1].heading));
      cost += err.dot(weights.asDiagonal() * err);
      cost += cfg_.r_force * U(2 * k) * U(2 * k) + cfg_.r_torque * U(2 * k + 1) * U(2 * k + 1);
      const VehicleState xk = from_vector(xs[k]);
      const ControlInput uk{U(2 * k), U(2 * k + 1)};
      const VehicleState next = from_vector(xs[k + 1]);
      for (const Obstacle* o : sensed) {
        const BarrierChain c = obstacle_chain(next, *o, gains_);
        for (double v : {obstacle_constraint(xk, *o, gains_, params_).margin(uk), c.h, c.psi1}) {
          v = std::max(0.0, -v);
          cost += kHardViolationScale * cfg_.slack_weight * v * v;
        }
      }
      if (cfg_.tracking_barrier) {
        const double v =
            std::max(0.0, -tracking_constraint(xk, refs[k], gains_, params_).margin(uk));
        cost += cfg_.slack_weight * v * v;
      }
    }
    return cost;
  };

  struct Attempt {
    bool solved = false;
    Eigen::VectorXd U;
    Eigen::VectorXd z;
    int iterations = 0;
  };

  auto sqp = [&](Eigen::VectorXd U, bool state_rows) {
    Attempt a;
    for (int iter = 0; iter < cfg_.sqp_iters; ++iter) {
      const std::vector<StateVector> xs = rollout(U);

      // State sensitivities S_k = d x_k / d U.
      std::vector<Eigen::MatrixXd> S(N + 1, Eigen::MatrixXd::Zero(6, nu));
      for (int k = 0; k < N; ++k) {
        const StepJacobian J = step_jacobian(xs[k], U(2 * k), U(2 * k + 1), params_, dt);
        S[k + 1] = J.A * S[k];
        S[k + 1].middleCols(2 * k, 2) += J.B;
      }

      qp.hessian = Eigen::MatrixXd::Zero(nz, nz);
      qp.linear = Eigen::VectorXd::Zero(nz);
      for (int k = 0; k < N; ++k) {
        qp.hessian(2 * k, 2 * k) = 2.0 * cfg_.r_force + kInputRegularization;
        qp.hessian(2 * k + 1, 2 * k + 1) = 2.0 * cfg_.r_torque + kInputRegularization;
      }
      for (int k = 0; k < ns; ++k) qp.hessian(nu + k, nu + k) = 2.0 * cfg_.slack_weight;

      // Gauss-Newton tracking cost on position and wrapped heading.
      for (int k = 1; k <= N; ++k) {
        Eigen::Vector3d err(xs[k](0) - refs[k].position.x(), xs[k](1) - refs[k].position.y(),
                            wrap_angle(xs[k](4) - refs[k].heading));
        Eigen::MatrixXd G(3, nu);
        G.row(0) = S[k].row(0);
        G.row(1) = S[k].row(1);
        G.row(2) = S[k].row(4);
        const Eigen::Vector3d offset = err - G * U;
        const Eigen::MatrixXd WG = weights.asDiagonal() * G;
        qp.hessian.topLeftCorner(nu, nu) += 2.0 * G.transpose() * WG;
        qp.linear.head(nu) += 2.0 * WG.transpose() * offset;
      }

      // Barrier constraints linearized about the rollout.
      std::vector<Eigen::VectorXd> rows;
      std::vector<double> lower;
      auto add_row = [&](int k, const auto& margin_of_state, const SafetyConstraint& c,
                         bool with_slack) {
        const double uF = U(2 * k);
        const double ut = U(2 * k + 1);
        const double m0 = c.c_force * uF + c.c_torque * ut - c.rhs;
        auto margin = [&](const StateVector& s) { return margin_of_state(s, uF, ut); };
        Eigen::VectorXd row = Eigen::VectorXd::Zero(nz);
        if (k > 0) row.head(nu) = (margin_gradient(margin, xs[k]) * S[k]).transpose();
        row(2 * k) += c.c_force;
        row(2 * k + 1) += c.c_torque;
        const double lb = -m0 + row.head(nu).dot(U);
        if (with_slack) row(nu + k) = 1.0;
        rows.push_back(std::move(row));
        lower.push_back(lb);
      };

      // Predicted states must also lie in the obstacle safe set itself
      // (h >= 0 and psi1 >= 0); the chain condition alone does not keep
      // sampled states inside it.
      auto add_state_row = [&](int k, const auto& value_of_state) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(nz);
        row.head(nu) = (margin_gradient(value_of_state, xs[k]) * S[k]).transpose();
        lower.push_back(-value_of_state(xs[k]) + row.head(nu).dot(U));
        rows.push_back(std::move(row));
      };
      for (int k = 1; state_rows && k <= N; ++k) {
        for (const Obstacle* o : sensed) {
          add_state_row(k, [&](const StateVector& s) {
            return obstacle_chain(from_vector(s), *o, gains_).h;
          });
          add_state_row(k, [&](const StateVector& s) {
            return obstacle_chain(from_vector(s), *o, gains_).psi1;
          });
        }
      }

      for (int k = 0; k < N; ++k) {
        const VehicleState xk = from_vector(xs[k]);
        for (const Obstacle* o : sensed) {
          const SafetyConstraint c = obstacle_constraint(xk, *o, gains_, params_);
          add_row(
              k,
              [&](const StateVector& s, double uF, double ut) {
                return obstacle_constraint(from_vector(s), *o, gains_, params_).margin({uF, ut});
              },
              c, false);
        }
        if (cfg_.tracking_barrier) {
          const RefSample& r = refs[k];
          const SafetyConstraint c = tracking_constraint(xk, r, gains_, params_);
          add_row(
              k,
              [&](const StateVector& s, double uF, double ut) {
                return tracking_constraint(from_vector(s), r, gains_, params_).margin({uF, ut});
              },
              c, true);
        }
      }
      qp.ineq_matrix.resize(static_cast<Eigen::Index>(rows.size()), nz);
      qp.ineq_lower.resize(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        qp.ineq_matrix.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
        qp.ineq_lower(static_cast<Eigen::Index>(i)) = lower[i];
      }
      // Symmetrize against round-off in the accumulated products.
      qp.hessian = 0.5 * (qp.hessian + qp.hessian.transpose()).eval();

      QpSolution sol;
      try {
        sol = solve_qp(qp);
      } catch (const QpInfeasibleError&) {
        break;
      }
      a.solved = true;
      a.z = sol.z;
      a.iterations = iter + 1;
      const double change = (sol.z.head(nu) - U).cwiseAbs().maxCoeff();
      U = sol.z.head(nu);
      if (change < cfg_.sqp_tol) break;
    }
    a.U = U;
    return a;
  };

  auto uses_slack = [&](const Attempt& a) {
    return ns > 0 && a.z.tail(ns).maxCoeff() > kSlackTolerance;
  };

  // Steering guesses that pass an obstacle on either side. Needed when the
  // vehicle heads straight at one: by symmetry the barrier gradient with
  // respect to torque is then zero and the linearization cannot pick a side.
  auto steer_start = [&](double sign) {
    Eigen::VectorXd U = cruise_start;
    const int pulse = std::max(1, static_cast<int>(std::lround(kSteerPulse / dt)));
    for (int k = 0; k < std::min(N, 2 * pulse); ++k) {
      U(2 * k + 1) = (k < pulse ? sign : -sign) * kSteerTorqueFraction * params_.torque_max;
    }
    return clamp_inputs(U);
  };

  Attempt best;
  double best_merit = kInf;
  // Once the vehicle is outside the obstacle safe set the state rows can be
  // unsatisfiable; the chain conditions alone still drive it back.
  for (bool state_rows : {true, false}) {
    best = sqp(has_plan_ ? clamp_inputs(plan_) : cruise_start, state_rows);
    best_merit = best.solved ? merit(best.U) : kInf;
    const double warm_merit = has_plan_ ? best_merit : kInf;
    auto consider = [&](const Eigen::VectorXd& start) {
      Attempt a = sqp(start, state_rows);
      if (!a.solved) return;
      const double m = merit(a.U);
      if (m >= kSwitchRatio * warm_merit) return;
      if (!best.solved || m < best_merit) {
        best = std::move(a);
        best_merit = m;
      }
    };
    if (has_plan_ && (!best.solved || uses_slack(best) || !sensed.empty())) consider(cruise_start);
    if (!sensed.empty()) {
      consider(steer_start(1.0));
      consider(steer_start(-1.0));
    }
    if (best.solved || sensed.empty()) break;
  }

  MpcResult result;
  if (!best.solved) {
    result.u = {params_.force_min, 0.0};
    result.fallback = true;
    // Keep the previous plan for the next warm start.
    Eigen::VectorXd shifted = plan_;
    if (N > 1) shifted.head(nu - 2) = plan_.tail(nu - 2);
    plan_ = shifted;
    return result;
  }

  const Eigen::VectorXd& U = best.U;
  result.u = saturate({U(0), U(1)}, params_);
  result.slack = ns > 0 ? std::max(0.0, best.z(nu)) : 0.0;
  result.sqp_iterations = best.iterations;
  plan_.head(nu - 2) = U.tail(nu - 2);
  plan_.tail(2) = U.tail(2);
  has_plan_ = true;
  return result;
}

ControlInput mpc_cbf_step(const VehicleState& x, const ReferenceTrajectory& traj, double t,
                          const std::vector<Obstacle>& obstacles, const BarrierGains& gains,
                          const VehicleParams& params, const MpcConfig& cfg,
                          double sensing_radius) {
  MpcCbfController controller(params, gains, cfg, sensing_radius);
  return controller.step(x, traj, t, obstacles).u;
}

void PidGains::validate() const {
  for (double g : {k_s, k_a, k_pf, k_if, k_al, k_t, k_pt, k_dt}) {
    if (!std::isfinite(g)) throw ValidationError("pid gains must be finite");
  }
  if (!(integral_clamp > 0.0) || !std::isfinite(integral_clamp)) {
    throw ValidationError("pid.integral_clamp must be positive");
  }
}

PidOutput pid_control(const VehicleState& x, const RefSample& r, const PidGains& gains,
                      const PidState& state, double dt) {
  if (!(dt > 0.0)) throw ValidationError("pid dt must be positive");
  const Vec2 p_theta = heading_vector(r.heading);
  const Vec2 p_diff = x.p - r.position;
  const double speed_ref = r.velocity.norm();

  PidOutput out;
  out.force_error = gains.k_s * (speed_ref - x.v.norm()) + gains.k_a * p_diff.dot(p_theta);
  out.torque_error = gains.k_al * wrap_angle(r.heading - x.theta) -
                     gains.k_t * cross2(-p_diff, p_theta);

  out.state = state;
  out.state.integral = std::clamp(state.integral + out.force_error * dt, -gains.integral_clamp,
                                  gains.integral_clamp);
  const double derivative =
      state.initialized ? (out.torque_error - state.previous_torque_error) / dt : 0.0;
  out.state.previous_torque_error = out.torque_error;
  out.state.initialized = true;

  out.u.force = gains.k_pf * out.force_error + gains.k_if * out.state.integral;
  out.u.torque = gains.k_pt * out.torque_error + gains.k_dt * derivative;
  return out;
}

namespace {

QpProblem filter_problem(const ControlInput& u_pid, const std::vector<const SafetyConstraint*>& cs,
                         const VehicleParams& params) {
  QpProblem qp;
  qp.hessian = Eigen::Matrix2d::Identity();
  qp.linear = -Eigen::Vector2d(u_pid.force, u_pid.torque);
  qp.ineq_matrix.resize(static_cast<Eigen::Index>(cs.size()), 2);
  qp.ineq_lower.resize(static_cast<Eigen::Index>(cs.size()));
  for (std::size_t i = 0; i < cs.size(); ++i) {
    qp.ineq_matrix(static_cast<Eigen::Index>(i), 0) = cs[i]->c_force;
    qp.ineq_matrix(static_cast<Eigen::Index>(i), 1) = cs[i]->c_torque;
    qp.ineq_lower(static_cast<Eigen::Index>(i)) = cs[i]->rhs;
  }
  qp.lower = Eigen::Vector2d(params.force_min, params.torque_min);
  qp.upper = Eigen::Vector2d(params.force_max, params.torque_max);
  return qp;
}

}  // namespace

FilterResult pid_cbf_filter(const ControlInput& u_pid,
                            const std::vector<SafetyConstraint>& constraints,
                            const VehicleParams& params) {
  std::vector<const SafetyConstraint*> all;
  std::vector<const SafetyConstraint*> hard;
  for (const auto& c : constraints) {
    all.push_back(&c);
    if (!c.slack_allowed) hard.push_back(&c);
  }

  FilterResult out;
  try {
    const QpSolution sol = solve_qp(filter_problem(u_pid, all, params));
    out.u = {sol.z(0), sol.z(1)};
    return out;
  } catch (const QpInfeasibleError&) {
  }
  try {
    const QpSolution sol = solve_qp(filter_problem(u_pid, hard, params));
    out.u = {sol.z(0), sol.z(1)};
    out.tracking_dropped = true;
    for (const auto& c : constraints) {
      if (c.slack_allowed) out.tracking_slack = std::max(out.tracking_slack, -c.margin(out.u));
    }
    return out;
  } catch (const QpInfeasibleError&) {
  }
  out.u = {params.force_min, 0.0};
  out.fallback = true;
  return out;
}

}  // namespace taxicbf
