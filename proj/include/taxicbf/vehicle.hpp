#pragma once

#include <Eigen/Core>

#include "taxicbf/angles.hpp"

namespace taxicbf {

// Planar unicycle with force/torque actuation.
struct VehicleState {
  Vec2 p = Vec2::Zero();  // m
  Vec2 v = Vec2::Zero();  // m/s
  double theta = 0.0;     // rad, kept in (-pi, pi]
  double omega = 0.0;     // rad/s
};

// Flat layout [px, py, vx, vy, theta, omega].
using StateVector = Eigen::Matrix<double, 6, 1>;
using InputMatrix = Eigen::Matrix<double, 6, 2>;

StateVector to_vector(const VehicleState& x);
VehicleState from_vector(const StateVector& s);

struct VehicleParams {
  double mass = 1.0;
  double inertia = 1.0;
  double friction = 0.1;  // f0, N*s/m
  double force_min = 0.0;
  double force_max = 4.0;
  double torque_min = -10.0;
  double torque_max = 10.0;

  void validate() const;
};

struct ControlInput {
  double force = 0.0;
  double torque = 0.0;
};

struct Disturbance {
  Vec2 wind_force = Vec2::Zero();  // N, acts on the translational channel only
};

ControlInput saturate(const ControlInput& u, const VehicleParams& params);

// Drift term f(x) and input matrix g(x) of x_dot = f(x) + g(x) u, without
// disturbance. Controllers and barrier derivatives use only these.
StateVector drift(const VehicleState& x, const VehicleParams& params);
InputMatrix actuation(const VehicleState& x, const VehicleParams& params);

// Full plant derivative including the disturbance force.
StateVector dynamics_deriv(const VehicleState& x, const ControlInput& u, const Disturbance& d,
                           const VehicleParams& params);

// Classical RK4 with u and d held over the step; theta is re-wrapped.
VehicleState rk4_step(const VehicleState& x, const ControlInput& u, const Disturbance& d,
                      const VehicleParams& params, double dt);

}  // namespace taxicbf
