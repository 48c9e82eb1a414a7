#pragma once

#include <string>
#include <variant>
#include <vector>

#include "taxicbf/angles.hpp"
#include "taxicbf/geo_graph.hpp"

namespace taxicbf {

inline constexpr double kDefaultTrajectoryDt = 0.05;

struct LineSegment {
  Vec2 start = Vec2::Zero();
  Vec2 end = Vec2::Zero();
};

struct ArcSegment {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  double start_angle = 0.0;  // polar angle of the entry point about `center`
  double end_angle = 0.0;    // start_angle +/- swept angle, unwrapped
  bool ccw = true;
};

using PathSegment = std::variant<LineSegment, ArcSegment>;

double segment_length(const PathSegment& seg);

struct PathPoint {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;    // tangent direction
  double curvature = 0.0;  // signed, positive for left turns
};

PathPoint segment_point(const PathSegment& seg, double s);

// Lines and radius-q arcs joined with continuous position and tangent.
class GeometricPath {
 public:
  GeometricPath() = default;
  explicit GeometricPath(std::vector<PathSegment> segments);

  const std::vector<PathSegment>& segments() const { return segments_; }
  double length() const { return length_; }

  // s is clamped to [0, length()].
  PathPoint at(double s) const;

 private:
  std::vector<PathSegment> segments_;
  std::vector<double> offsets_;  // arc length at the start of each segment
  double length_ = 0.0;
};

// Replaces every interior corner by a tangent arc of radius q. Throws
// InfeasibleFilletError when adjacent tangent offsets do not fit on a leg.
GeometricPath fillet_waypoints(const TaxiRoute& route, double q);
GeometricPath fillet_waypoints(const std::vector<Vec2>& points, double q,
                               const std::vector<std::string>& names = {});

struct RefSample {
  double t = 0.0;
  Vec2 position = Vec2::Zero();
  double heading = 0.0;
  Vec2 velocity = Vec2::Zero();
  Vec2 acceleration = Vec2::Zero();
  double curvature = 0.0;
};

// a = s_dot * T + kappa * s^2 * N with T, N the unit tangent and left normal.
Vec2 reference_acceleration(double speed, double speed_rate, double curvature, double heading);

class ReferenceTrajectory {
 public:
  ReferenceTrajectory(double dt, double speed, std::vector<RefSample> samples);

  double dt() const { return dt_; }
  double speed() const { return speed_; }
  double duration() const { return samples_.back().t; }
  const std::vector<RefSample>& samples() const { return samples_; }
  const RefSample& front() const { return samples_.front(); }
  const RefSample& back() const { return samples_.back(); }

 private:
  double dt_;
  double speed_;
  std::vector<RefSample> samples_;
};

// Constant-speed sampling: consecutive positions are exactly speed*dt apart
// (straight-line distance); the last sample lands on the path end.
ReferenceTrajectory sample_reference(const GeometricPath& path, double speed, double dt);

// Linear interpolation between samples. Past the end, the final position is
// held with zero velocity and acceleration.
RefSample ref_at(const ReferenceTrajectory& traj, double t);

}  // namespace taxicbf
