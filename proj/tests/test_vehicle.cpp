#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "taxicbf/error.hpp"
#include "taxicbf/vehicle.hpp"

using namespace taxicbf;

namespace {

VehicleState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  return {Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng)), wrap_angle(u(rng)), u(rng)};
}

// Integrates a constant-input turning manoeuvre for `duration` with step h.
VehicleState integrate(VehicleState x, double h, double duration) {
  const VehicleParams p;
  const ControlInput u{2.0, 0.8};
  const Disturbance d{Vec2(0.3, -0.2)};
  const int n = static_cast<int>(std::lround(duration / h));
  for (int i = 0; i < n; ++i) x = rk4_step(x, u, d, p, h);
  return x;
}

double state_distance(const VehicleState& a, const VehicleState& b) {
  StateVector d = to_vector(a) - to_vector(b);
  d(4) = wrap_angle(d(4));
  return d.norm();
}

}  // namespace

TEST_CASE("rest state is an equilibrium") {
  const VehicleParams p;
  const StateVector dx = dynamics_deriv(VehicleState{}, {}, {}, p);
  CHECK(dx.isZero(0.0));
  const VehicleState x{Vec2(3, 4), Vec2::Zero(), 0.7, 0.0};
  const VehicleState y = rk4_step(x, {}, {}, p, 0.1);
  CHECK(state_distance(x, y) == 0.0);
}

TEST_CASE("unforced motion decays by friction only") {
  const VehicleParams p;
  const VehicleState x{Vec2::Zero(), Vec2(2.0, -1.0), 0.3, 0.0};
  const StateVector dx = dynamics_deriv(x, {}, {}, p);
  CHECK(dx(2) == doctest::Approx(-0.1 * 2.0));
  CHECK(dx(3) == doctest::Approx(-0.1 * -1.0));
}

TEST_CASE("thrust acts along the heading") {
  const VehicleParams p;
  const StateVector dx = dynamics_deriv(VehicleState{}, {2.0, 0.0}, {}, p);
  CHECK(dx(2) == doctest::Approx(2.0));
  CHECK(dx(3) == doctest::Approx(0.0));
  const StateVector dy = dynamics_deriv(VehicleState{Vec2::Zero(), Vec2::Zero(), 0.0, 0.0}, {0.0, 3.0}, {}, p);
  CHECK(dy(5) == doctest::Approx(3.0));
}

TEST_CASE("wind enters the translational channel only") {
  const VehicleParams p;
  const Disturbance d{Vec2(0.5, -0.25)};
  const StateVector dx = dynamics_deriv(VehicleState{}, {}, d, p);
  CHECK(dx(2) == 0.5);
  CHECK(dx(3) == -0.25);
  CHECK(dx(4) == 0.0);
  CHECK(dx(5) == 0.0);
}

TEST_CASE("dynamics are affine in the input") {
  std::mt19937_64 rng(3);
  const VehicleParams p;
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int i = 0; i < 200; ++i) {
    const VehicleState x = random_state(rng);
    const Disturbance d{Vec2(u(rng), u(rng))};
    const ControlInput a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const StateVector f0 = dynamics_deriv(x, {}, d, p);
    const StateVector fa = dynamics_deriv(x, a, d, p) - f0;
    const StateVector fb = dynamics_deriv(x, b, d, p) - f0;
    const StateVector fab = dynamics_deriv(x, {a.force + b.force, a.torque + b.torque}, d, p) - f0;
    CHECK((fab - fa - fb).cwiseAbs().maxCoeff() < 1e-12);
    const StateVector split = drift(x, p) + actuation(x, p) * Eigen::Vector2d(a.force, a.torque);
    CHECK((split - dynamics_deriv(x, a, {}, p)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("kinetic energy never grows without input") {
  std::mt19937_64 rng(4);
  const VehicleParams p;
  for (int i = 0; i < 100; ++i) {
    VehicleState x = random_state(rng);
    double e = x.v.squaredNorm();
    for (int k = 0; k < 50; ++k) {
      x = rk4_step(x, {}, {}, p, 0.05);
      CHECK(x.v.squaredNorm() <= e);
      e = x.v.squaredNorm();
    }
  }
}

TEST_CASE("heading wrap keeps the direction") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> a(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = a(rng);
    const double w = wrap_angle(t);
    CHECK(w > -std::numbers::pi);
    CHECK(w <= std::numbers::pi);
    CHECK(std::abs(std::cos(w) - std::cos(t)) < 1e-12);
    CHECK(std::abs(std::sin(w) - std::sin(t)) < 1e-12);
  }
}

TEST_CASE("RK4 is exact for constant thrust on a fixed heading") {
  VehicleParams p;
  p.friction = 0.0;
  const VehicleState x{Vec2(1, 2), Vec2(0.5, -0.3), 0.4, 0.0};
  const double dt = 0.7, F = 2.5;
  const VehicleState y = rk4_step(x, {F, 0.0}, {}, p, dt);
  const Vec2 a = F * heading_vector(0.4);
  const Vec2 want = x.p + x.v * dt + 0.5 * a * dt * dt;
  CHECK((y.p - want).norm() < 1e-12);
  CHECK((y.v - (x.v + a * dt)).norm() < 1e-12);
}

TEST_CASE("RK4 converges at fourth order on a turning manoeuvre") {
  const VehicleState x0{Vec2::Zero(), Vec2(3.0, 0.0), 0.0, 0.2};
  const double T = 4.0, h = 0.2;
  const VehicleState truth = integrate(x0, h / 64.0, T);
  const double e1 = state_distance(integrate(x0, h, T), truth);
  const double e2 = state_distance(integrate(x0, h / 2.0, T), truth);
  const double order = oracle::observed_order(e1, e2);
  CHECK(order >= 3.5);
  CHECK(order <= 4.5);
}

TEST_CASE("saturation clamps componentwise") {
  const VehicleParams p;
  auto eq = [](ControlInput a, ControlInput b) { return a.force == b.force && a.torque == b.torque; };
  CHECK(eq(saturate({2, 0}, p), {2, 0}));
  CHECK(eq(saturate({-3, 0}, p), {0, 0}));
  CHECK(eq(saturate({5, 99}, p), {4, 10}));
  CHECK(eq(saturate({1, -99}, p), {1, -10}));
}

TEST_CASE("vehicle input validation") {
  VehicleParams p;
  p.mass = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = VehicleParams{};
  p.force_min = 5.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK_THROWS_AS(rk4_step(VehicleState{}, {}, {}, VehicleParams{}, 0.0), ValidationError);
  const VehicleState bad{Vec2(NAN, 0), Vec2::Zero(), 0.0, 0.0};
  CHECK_THROWS_AS(dynamics_deriv(bad, {}, {}, VehicleParams{}), NumericError);
}
