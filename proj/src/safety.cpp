#include "taxicbf/safety.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "taxicbf/error.hpp"

namespace taxicbf {

void BarrierGains::validate() const {
  for (double a : {alpha0_obs, alpha1_obs, alpha0_ref, alpha1_ref}) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("barrier alphas must be positive");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("barrier.delta must be positive");
  if (!(tube_half_width > 0.0) || !std::isfinite(tube_half_width)) {
    throw ValidationError("barrier.tube_half_width must be positive");
  }
}

// Obstacle barrier, with d = p - p_o and static p_o:
//   h      = (|d|^2 - D^2) / 2
//   h_dot  = d.v
//   h_ddot = |v|^2 + d.v_dot,  v_dot = -(f0/m) v + (u_F/m) e_theta
BarrierChain obstacle_chain(const VehicleState& x, const Obstacle& o, const BarrierGains& gains) {
  const Vec2 d = x.p - o.center;
  const double clearance = gains.delta + o.radius;
  BarrierChain c;
  c.h = 0.5 * (d.squaredNorm() - clearance * clearance);
  c.h_dot = d.dot(x.v);
  c.psi1 = c.h_dot + gains.alpha0_obs * c.h;
  return c;
}

SafetyConstraint obstacle_constraint(const VehicleState& x, const Obstacle& o,
                                     const BarrierGains& gains, const VehicleParams& params) {
  const BarrierChain chain = obstacle_chain(x, o, gains);
  const Vec2 d = x.p - o.center;
  const double a0 = gains.alpha0_obs;
  const double a1 = gains.alpha1_obs;
  // Input-free part of h_ddot.
  const double drift_ddot = x.v.squaredNorm() - (params.friction / params.mass) * d.dot(x.v);
  SafetyConstraint c;
  c.kind = ConstraintKind::kObstacle;
  c.obstacle_id = o.id;
  c.c_force = d.dot(heading_vector(x.theta)) / params.mass;
  c.c_torque = 0.0;
  c.rhs = -(drift_ddot + (a0 + a1) * chain.h_dot + a0 * a1 * chain.h);
  c.slack_allowed = false;
  return c;
}

// Tracking barrier, with e = p - p_ref:
//   h      = (w^2 - |e|^2) / 2
//   h_dot  = e.(v_ref - v)
//   h_ddot = -|v_ref - v|^2 + e.(a_ref - v_dot)
BarrierChain tracking_chain(const VehicleState& x, const RefSample& r, const BarrierGains& gains) {
  const Vec2 e = x.p - r.position;
  const double w = gains.tube_half_width;
  BarrierChain c;
  c.h = 0.5 * (w * w - e.squaredNorm());
  c.h_dot = e.dot(r.velocity - x.v);
  c.psi1 = c.h_dot + gains.alpha0_ref * c.h;
  return c;
}

SafetyConstraint tracking_constraint(const VehicleState& x, const RefSample& r,
                                     const BarrierGains& gains, const VehicleParams& params) {
  const BarrierChain chain = tracking_chain(x, r, gains);
  const Vec2 e = x.p - r.position;
  const double a0 = gains.alpha0_ref;
  const double a1 = gains.alpha1_ref;
  const double drift_ddot = -(r.velocity - x.v).squaredNorm() + e.dot(r.acceleration) +
                            (params.friction / params.mass) * e.dot(x.v);
  SafetyConstraint c;
  c.kind = ConstraintKind::kTracking;
  c.c_force = -e.dot(heading_vector(x.theta)) / params.mass;
  c.c_torque = 0.0;
  c.rhs = -(drift_ddot + (a0 + a1) * chain.h_dot + a0 * a1 * chain.h);
  c.slack_allowed = true;
  return c;
}

void validate_obstacles(const std::vector<Obstacle>& obstacles) {
  std::set<std::string> ids;
  for (const auto& o : obstacles) {
    if (!ids.insert(o.id).second) throw ValidationError("duplicate obstacle id '" + o.id + "'");
    if (!(o.radius >= 0.0) || !std::isfinite(o.radius) || !o.center.allFinite()) {
      throw ValidationError("obstacle '" + o.id + "' has an invalid center or radius");
    }
  }
}

std::vector<SafetyConstraint> collect_constraints(const VehicleState& x,
                                                  const std::vector<Obstacle>& obstacles,
                                                  const RefSample& r, const BarrierGains& gains,
                                                  const VehicleParams& params,
                                                  double sensing_radius) {
  validate_obstacles(obstacles);
  std::vector<const Obstacle*> sensed;
  for (const auto& o : obstacles) {
    if ((o.center - x.p).norm() <= sensing_radius) sensed.push_back(&o);
  }
  std::sort(sensed.begin(), sensed.end(),
            [](const Obstacle* a, const Obstacle* b) { return a->id < b->id; });
  std::vector<SafetyConstraint> out;
  out.reserve(sensed.size() + 1);
  for (const Obstacle* o : sensed) out.push_back(obstacle_constraint(x, *o, gains, params));
  out.push_back(tracking_constraint(x, r, gains, params));
  return out;
}

}  // namespace taxicbf
