#pragma once

#include <string>
#include <vector>

#include "taxicbf/trajectory.hpp"
#include "taxicbf/vehicle.hpp"

namespace taxicbf {

struct Obstacle {
  std::string id;
  Vec2 center = Vec2::Zero();
  double radius = 0.0;  // physical extent, added to the safety distance
};

// Linear class-K slopes for both second-order barrier chains.
struct BarrierGains {
  double alpha0_obs = 10.0;
  double alpha1_obs = 10.0;
  double alpha0_ref = 10.0;
  double alpha1_ref = 10.0;
  double delta = 10.0;            // obstacle safety distance, m
  double tube_half_width = 8.0;   // w, m

  void validate() const;
};

// h, its time derivative along the drift, and psi1 = h_dot + alpha0 * h.
struct BarrierChain {
  double h = 0.0;
  double h_dot = 0.0;
  double psi1 = 0.0;
};

enum class ConstraintKind { kObstacle, kTracking };

// c_force * u_F + c_torque * u_tau >= rhs.
struct SafetyConstraint {
  double c_force = 0.0;
  double c_torque = 0.0;
  double rhs = 0.0;
  ConstraintKind kind = ConstraintKind::kTracking;
  std::string obstacle_id;
  bool slack_allowed = false;

  double margin(const ControlInput& u) const { return c_force * u.force + c_torque * u.torque - rhs; }
};

BarrierChain obstacle_chain(const VehicleState& x, const Obstacle& o, const BarrierGains& gains);

// psi1_dot + alpha1 * psi1 >= 0 for h = (|p_o - p|^2 - (delta + radius)^2) / 2.
SafetyConstraint obstacle_constraint(const VehicleState& x, const Obstacle& o,
                                     const BarrierGains& gains, const VehicleParams& params);

BarrierChain tracking_chain(const VehicleState& x, const RefSample& r, const BarrierGains& gains);

// psi1_dot + alpha1 * psi1 >= 0 for h = (w^2 - |p - p_ref|^2) / 2. Soft: the
// controllers may relax it with a slack variable.
SafetyConstraint tracking_constraint(const VehicleState& x, const RefSample& r,
                                     const BarrierGains& gains, const VehicleParams& params);

// Throws ValidationError on duplicate ids or negative radii.
void validate_obstacles(const std::vector<Obstacle>& obstacles);

// One constraint per obstacle within sensing_radius (ascending id), then the
// tracking constraint.
std::vector<SafetyConstraint> collect_constraints(const VehicleState& x,
                                                  const std::vector<Obstacle>& obstacles,
                                                  const RefSample& r, const BarrierGains& gains,
                                                  const VehicleParams& params,
                                                  double sensing_radius);

}  // namespace taxicbf
