#include <cmath>
#include <numbers>
#include <random>
#include <variant>

#include "doctest.h"
#include "oracles.hpp"
#include "scenario_cases.hpp"
#include "taxicbf/error.hpp"
#include "taxicbf/trajectory.hpp"

using namespace taxicbf;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

using cases::random_route;
using cases::tangent_mismatch;

TEST_CASE("collinear waypoints give a single line") {
  const GeometricPath p = fillet_waypoints({Vec2(0, 0), Vec2(10, 0), Vec2(25, 0)}, 5.0);
  REQUIRE(p.segments().size() == 1);
  CHECK(std::holds_alternative<LineSegment>(p.segments()[0]));
  CHECK(p.length() == doctest::Approx(25.0));
}

TEST_CASE("right-angle corner becomes a quarter arc") {
  const double q = 10.0;
  const GeometricPath p = fillet_waypoints({Vec2(0, 0), Vec2(50, 0), Vec2(50, 50)}, q);
  REQUIRE(p.segments().size() == 3);
  const auto* arc = std::get_if<ArcSegment>(&p.segments()[1]);
  REQUIRE(arc != nullptr);
  CHECK(arc->radius == q);
  CHECK(arc->ccw);
  CHECK(std::abs(arc->end_angle - arc->start_angle) == doctest::Approx(kPi / 2));
  CHECK(segment_length(p.segments()[1]) == doctest::Approx(kPi / 2 * q));
  // Tangent points sit q * tan(45 deg) = q from the corner.
  const PathPoint entry = segment_point(p.segments()[1], 0.0);
  const PathPoint exit = segment_point(p.segments()[1], segment_length(p.segments()[1]));
  CHECK((entry.position - Vec2(40, 0)).norm() < 1e-12);
  CHECK((exit.position - Vec2(50, 10)).norm() < 1e-12);
  CHECK(p.length() == doctest::Approx(40 + kPi / 2 * q + 40));
  CHECK(tangent_mismatch(p) < 1e-9);
}

TEST_CASE("end points are preserved exactly") {
  const std::vector<Vec2> pts{Vec2(1, 2), Vec2(80, 10), Vec2(120, 90), Vec2(40, 160)};
  const GeometricPath p = fillet_waypoints(pts, 15.0);
  CHECK((p.at(0.0).position - pts.front()).norm() == 0.0);
  CHECK((p.at(p.length()).position - pts.back()).norm() < 1e-12);
}

TEST_CASE("fillet that overruns a leg names the corner") {
  const double q = 10.0;
  CHECK_THROWS_WITH_AS(fillet_waypoints({Vec2(0, 0), Vec2(q / 2, 0), Vec2(q / 2, q / 2)}, q,
                                        {"s", "k", "e"}),
                       doctest::Contains("'k'"), InfeasibleFilletError);
  try {
    fillet_waypoints({Vec2(0, 0), Vec2(q / 2, 0), Vec2(q / 2, q / 2)}, q, {"s", "k", "e"});
  } catch (const InfeasibleFilletError& e) {
    CHECK(e.corner() == "k");
  }
  CHECK_THROWS_AS(fillet_waypoints({Vec2(0, 0), Vec2(1, 0)}, 0.0), ValidationError);
  CHECK_THROWS_AS(fillet_waypoints({Vec2(0, 0)}, 1.0), ValidationError);
}

TEST_CASE("straight reference has constant heading and zero acceleration") {
  const ReferenceTrajectory tr =
      sample_reference(fillet_waypoints({Vec2(0, 0), Vec2(30, 40)}, 5.0), 5.0, 0.1);
  for (const auto& s : tr.samples()) {
    CHECK(s.heading == doctest::Approx(std::atan2(4.0, 3.0)));
    CHECK(s.acceleration.norm() == 0.0);
    CHECK(s.curvature == 0.0);
  }
  CHECK(tr.duration() == doctest::Approx(10.0));
}

TEST_CASE("arc samples have centripetal acceleration speed^2/q") {
  const double q = 20.0, v = 4.0;
  const ReferenceTrajectory tr =
      sample_reference(fillet_waypoints({Vec2(0, 0), Vec2(100, 0), Vec2(100, -100)}, q), v, 0.05);
  int arc_samples = 0;
  for (const auto& s : tr.samples()) {
    if (s.curvature == 0.0) continue;
    ++arc_samples;
    CHECK(s.curvature == doctest::Approx(-1.0 / q));
    CHECK(std::abs(s.acceleration.norm() - v * v / q) < 1e-9);
    CHECK(std::abs(s.acceleration.dot(s.velocity)) < 1e-9);
  }
  CHECK(arc_samples > 10);
}

TEST_CASE("random routes keep the kinematic invariants") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const double q = 10.0 + trial;
    const double speed = 2.0 + 0.25 * trial;
    const double dt = 0.05;
    const GeometricPath path = fillet_waypoints(random_route(rng, q), q);
    CHECK(tangent_mismatch(path) < 1e-9);
    const ReferenceTrajectory tr = sample_reference(path, speed, dt);
    const auto& s = tr.samples();
    for (std::size_t i = 0; i + 2 < s.size(); ++i) {
      const double chord_speed = (s[i + 1].position - s[i].position).norm() / dt;
      CHECK(std::abs(chord_speed - speed) / speed < 1e-6);
      CHECK(s[i + 1].t - s[i].t == doctest::Approx(dt));
    }
    for (const auto& r : s) {
      CHECK(std::abs(r.curvature) <= 1.0 / q + 1e-9);
      CHECK(std::abs(wrap_angle(std::atan2(r.velocity.y(), r.velocity.x()) - r.heading)) < 1e-12);
    }
    // Second difference of positions tracks the stored acceleration on arcs.
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i - 1].curvature == 0.0 || s[i].curvature == 0.0 || s[i + 1].curvature == 0.0) continue;
      const Vec2 fd = (s[i + 1].position - 2.0 * s[i].position + s[i - 1].position) / (dt * dt);
      CHECK((fd - s[i].acceleration).norm() <= 10.0 * dt * speed * speed / q);
    }
    // Sampled length covers the path to within one step.
    double sampled = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) sampled += (s[i + 1].position - s[i].position).norm();
    CHECK(std::abs(sampled - path.length()) <= speed * dt);
    CHECK((s.back().position - path.at(path.length()).position).norm() < 1e-9);
  }
}

TEST_CASE("ref_at interpolates and holds after the end") {
  const ReferenceTrajectory tr =
      sample_reference(fillet_waypoints({Vec2(0, 0), Vec2(10, 0)}, 5.0), 2.0, 0.5);
  const RefSample a = ref_at(tr, 0.0);
  CHECK((a.position - tr.front().position).norm() == 0.0);
  const RefSample mid = ref_at(tr, 0.25);
  CHECK((mid.position - 0.5 * (tr.samples()[0].position + tr.samples()[1].position)).norm() < 1e-12);
  const RefSample hold = ref_at(tr, tr.duration() + 100.0);
  CHECK((hold.position - tr.back().position).norm() == 0.0);
  CHECK(hold.velocity.norm() == 0.0);
  CHECK(hold.acceleration.norm() == 0.0);
}

TEST_CASE("heading interpolation wraps across pi") {
  const ReferenceTrajectory tr(1.0, 1.0,
                               {RefSample{0.0, Vec2(0, 0), kPi - 0.1, Vec2::Zero(), Vec2::Zero(), 0.0},
                                RefSample{1.0, Vec2(1, 0), -kPi + 0.1, Vec2::Zero(), Vec2::Zero(), 0.0}});
  CHECK(std::abs(std::abs(ref_at(tr, 0.5).heading) - kPi) < 1e-12);
}

TEST_CASE("sampling input validation") {
  const GeometricPath p = fillet_waypoints({Vec2(0, 0), Vec2(10, 0)}, 5.0);
  CHECK_THROWS_AS(sample_reference(p, 1.0, 20.0), ValidationError);
  CHECK_THROWS_AS(sample_reference(p, 0.0, 0.1), ValidationError);
  CHECK_THROWS_AS(sample_reference(p, 1.0, -0.1), ValidationError);
}

TEST_CASE("reference acceleration keeps the tangential term") {
  const Vec2 a = reference_acceleration(3.0, 0.5, 0.1, 0.0);
  CHECK(a.x() == doctest::Approx(0.5));
  CHECK(a.y() == doctest::Approx(0.9));
}
