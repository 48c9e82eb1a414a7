#include "taxicbf/vehicle.hpp"

#include <algorithm>
#include <cmath>

#include "taxicbf/error.hpp"

namespace taxicbf {

namespace {

void require_finite(const StateVector& s) {
  if (!s.allFinite()) throw NumericError("vehicle state is not finite");
}

}  // namespace

StateVector to_vector(const VehicleState& x) {
  StateVector s;
  s << x.p.x(), x.p.y(), x.v.x(), x.v.y(), x.theta, x.omega;
  return s;
}

VehicleState from_vector(const StateVector& s) {
  return {Vec2(s(0), s(1)), Vec2(s(2), s(3)), s(4), s(5)};
}

void VehicleParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(mass) || mass <= 0.0) throw ValidationError("vehicle.mass must be positive");
  if (!finite(inertia) || inertia <= 0.0) throw ValidationError("vehicle.inertia must be positive");
  if (!finite(friction) || friction < 0.0) throw ValidationError("vehicle.friction must be >= 0");
  if (!finite(force_min) || !finite(force_max) || force_min > force_max) {
    throw ValidationError("vehicle.force_limits must satisfy min <= max");
  }
  if (!finite(torque_min) || !finite(torque_max) || torque_min > torque_max) {
    throw ValidationError("vehicle.torque_limits must satisfy min <= max");
  }
}

ControlInput saturate(const ControlInput& u, const VehicleParams& params) {
  return {std::clamp(u.force, params.force_min, params.force_max),
          std::clamp(u.torque, params.torque_min, params.torque_max)};
}

StateVector drift(const VehicleState& x, const VehicleParams& params) {
  StateVector f;
  const Vec2 damping = -(params.friction / params.mass) * x.v;
  f << x.v.x(), x.v.y(), damping.x(), damping.y(), x.omega, 0.0;
  return f;
}

InputMatrix actuation(const VehicleState& x, const VehicleParams& params) {
  InputMatrix g = InputMatrix::Zero();
  g(2, 0) = std::cos(x.theta) / params.mass;
  g(3, 0) = std::sin(x.theta) / params.mass;
  g(5, 1) = 1.0 / params.inertia;
  return g;
}

StateVector dynamics_deriv(const VehicleState& x, const ControlInput& u, const Disturbance& d,
                           const VehicleParams& params) {
  const StateVector s = to_vector(x);
  require_finite(s);
  StateVector dx = drift(x, params) + actuation(x, params) * Eigen::Vector2d(u.force, u.torque);
  dx(2) += d.wind_force.x() / params.mass;
  dx(3) += d.wind_force.y() / params.mass;
  return dx;
}

VehicleState rk4_step(const VehicleState& x, const ControlInput& u, const Disturbance& d,
                      const VehicleParams& params, double dt) {
  if (!(dt > 0.0)) throw ValidationError("integration step must be positive");
  const StateVector s0 = to_vector(x);
  auto f = [&](const StateVector& s) { return dynamics_deriv(from_vector(s), u, d, params); };
  const StateVector k1 = f(s0);
  const StateVector k2 = f(s0 + 0.5 * dt * k1);
  const StateVector k3 = f(s0 + 0.5 * dt * k2);
  const StateVector k4 = f(s0 + dt * k3);
  const StateVector s1 = s0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  require_finite(s1);
  VehicleState out = from_vector(s1);
  out.theta = wrap_angle(out.theta);
  return out;
}

}  // namespace taxicbf
