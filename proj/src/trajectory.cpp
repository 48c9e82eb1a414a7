#include "taxicbf/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "taxicbf/error.hpp"

namespace taxicbf {

namespace {

constexpr double kCollinearTol = 1e-12;

Vec2 left_normal(const Vec2& t) { return {-t.y(), t.x()}; }

}  // namespace

double segment_length(const PathSegment& seg) {
  if (const auto* line = std::get_if<LineSegment>(&seg)) return (line->end - line->start).norm();
  const auto& arc = std::get<ArcSegment>(seg);
  return arc.radius * std::abs(arc.end_angle - arc.start_angle);
}

PathPoint segment_point(const PathSegment& seg, double s) {
  if (const auto* line = std::get_if<LineSegment>(&seg)) {
    const Vec2 d = line->end - line->start;
    const double len = d.norm();
    const double frac = len > 0.0 ? std::clamp(s / len, 0.0, 1.0) : 0.0;
    return {line->start + frac * d, std::atan2(d.y(), d.x()), 0.0};
  }
  const auto& arc = std::get<ArcSegment>(seg);
  const double dir = arc.ccw ? 1.0 : -1.0;
  const double sweep = std::abs(arc.end_angle - arc.start_angle);
  const double phi = arc.start_angle + dir * std::clamp(s / arc.radius, 0.0, sweep);
  return {arc.center + arc.radius * heading_vector(phi),
          wrap_angle(phi + dir * std::numbers::pi / 2.0), dir / arc.radius};
}

GeometricPath::GeometricPath(std::vector<PathSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw ValidationError("geometric path has no segments");
  offsets_.reserve(segments_.size());
  for (const auto& seg : segments_) {
    offsets_.push_back(length_);
    length_ += segment_length(seg);
  }
}

PathPoint GeometricPath::at(double s) const {
  s = std::clamp(s, 0.0, length_);
  // Last segment whose start offset is <= s.
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), s);
  std::size_t idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - offsets_.begin() - 1));
  return segment_point(segments_[idx], s - offsets_[idx]);
}

GeometricPath fillet_waypoints(const TaxiRoute& route, double q) {
  std::vector<Vec2> pts;
  std::vector<std::string> names;
  for (const auto& w : route.waypoints) {
    pts.push_back(w.xy);
    names.push_back(w.id);
  }
  return fillet_waypoints(pts, q, names);
}

GeometricPath fillet_waypoints(const std::vector<Vec2>& points, double q,
                               const std::vector<std::string>& names) {
  if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("turning radius must be positive");
  if (points.size() < 2) throw ValidationError("route needs at least two waypoints");
  auto name = [&](std::size_t i) {
    return i < names.size() ? names[i] : "waypoint " + std::to_string(i);
  };
  const std::size_t n = points.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if ((points[i + 1] - points[i]).norm() <= 0.0) {
      throw ValidationError("coincident consecutive waypoints at " + name(i));
    }
  }

  // Turn angle and tangent offset at every corner; zero at the end points.
  std::vector<double> turn(n, 0.0);
  std::vector<double> offset(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Vec2 in = (points[i] - points[i - 1]).normalized();
    const Vec2 out = (points[i + 1] - points[i]).normalized();
    turn[i] = std::atan2(std::abs(cross2(in, out)), in.dot(out));
    if (turn[i] <= kCollinearTol) {
      turn[i] = 0.0;
      continue;
    }
    if (turn[i] >= std::numbers::pi - 1e-9) {
      throw InfeasibleFilletError(name(i), "reversal at corner '" + name(i) + "' cannot be filleted");
    }
    offset[i] = q * std::tan(turn[i] / 2.0);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double leg = (points[i + 1] - points[i]).norm();
    if (offset[i] + offset[i + 1] > leg * (1.0 + 1e-12)) {
      const std::size_t corner = offset[i + 1] > 0.0 ? i + 1 : i;
      throw InfeasibleFilletError(
          name(corner), "fillet at corner '" + name(corner) + "' does not fit: leg of " +
                            std::to_string(leg) + " m needs " +
                            std::to_string(offset[i] + offset[i + 1]) + " m of tangent offsets");
    }
  }

  std::vector<PathSegment> segs;
  Vec2 cursor = points.front();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (turn[i] == 0.0) continue;
    const Vec2 in = (points[i] - points[i - 1]).normalized();
    const Vec2 out = (points[i + 1] - points[i]).normalized();
    const Vec2 entry = points[i] - offset[i] * in;
    const Vec2 exit = points[i] + offset[i] * out;
    if ((entry - cursor).norm() > 0.0) segs.emplace_back(LineSegment{cursor, entry});

    const bool ccw = cross2(in, out) > 0.0;
    const double dir = ccw ? 1.0 : -1.0;
    const Vec2 center = entry + dir * q * left_normal(in);
    const Vec2 r0 = entry - center;
    const double start = std::atan2(r0.y(), r0.x());
    segs.emplace_back(ArcSegment{center, q, start, start + dir * turn[i], ccw});
    cursor = exit;
  }
  if ((points.back() - cursor).norm() > 0.0 || segs.empty()) {
    segs.emplace_back(LineSegment{cursor, points.back()});
  }
  return GeometricPath(std::move(segs));
}

Vec2 reference_acceleration(double speed, double speed_rate, double curvature, double heading) {
  const Vec2 tangent = heading_vector(heading);
  return speed_rate * tangent + curvature * speed * speed * left_normal(tangent);
}

ReferenceTrajectory::ReferenceTrajectory(double dt, double speed, std::vector<RefSample> samples)
    : dt_(dt), speed_(speed), samples_(std::move(samples)) {
  if (samples_.empty()) throw ValidationError("reference trajectory has no samples");
}

ReferenceTrajectory sample_reference(const GeometricPath& path, double speed, double dt) {
  if (!(speed > 0.0) || !std::isfinite(speed)) throw ValidationError("speed must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
  const double total = path.length();
  if (dt > total / speed) {
    throw ValidationError("dt exceeds the trajectory duration");
  }
  const double chord = speed * dt;
  for (const auto& seg : path.segments()) {
    if (const auto* arc = std::get_if<ArcSegment>(&seg); arc && chord >= arc->radius) {
      throw ValidationError("speed * dt must be shorter than the turning radius");
    }
  }

  auto make = [&](double t, double s) {
    const PathPoint pt = path.at(s);
    RefSample r;
    r.t = t;
    r.position = pt.position;
    r.heading = pt.heading;
    r.velocity = speed * heading_vector(pt.heading);
    r.curvature = pt.curvature;
    r.acceleration = reference_acceleration(speed, 0.0, pt.curvature, pt.heading);
    return r;
  };

  std::vector<RefSample> samples;
  samples.reserve(static_cast<std::size_t>(total / chord) + 2);
  double s = 0.0;
  samples.push_back(make(0.0, 0.0));
  for (std::size_t i = 1;; ++i) {
    const Vec2 from = samples.back().position;
    const double t = static_cast<double>(i) * dt;
    if ((path.at(total).position - from).norm() <= chord) {
      if (total - s > 0.0) samples.push_back(make(t, total));
      break;
    }
    // Straight-line distance from `from` grows monotonically along the path
    // over this window as long as the chord is shorter than the turn radius.
    double lo = s;
    double hi = std::min(total, s + chord * std::numbers::pi / 2.0);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((path.at(mid).position - from).norm() < chord) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    s = 0.5 * (lo + hi);
    samples.push_back(make(t, s));
  }
  return ReferenceTrajectory(dt, speed, std::move(samples));
}

RefSample ref_at(const ReferenceTrajectory& traj, double t) {
  const auto& samples = traj.samples();
  if (t <= 0.0) return samples.front();
  if (t > traj.duration()) {
    RefSample hold = samples.back();
    hold.t = t;
    hold.velocity = Vec2::Zero();
    hold.acceleration = Vec2::Zero();
    hold.curvature = 0.0;
    return hold;
  }
  const double pos = t / traj.dt();
  std::size_t i = std::min(static_cast<std::size_t>(pos), samples.size() - 1);
  if (i + 1 >= samples.size()) return samples.back();
  const RefSample& a = samples[i];
  const RefSample& b = samples[i + 1];
  const double w = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
  RefSample r;
  r.t = t;
  r.position = a.position + w * (b.position - a.position);
  r.heading = wrap_angle(a.heading + w * wrap_angle(b.heading - a.heading));
  r.velocity = a.velocity + w * (b.velocity - a.velocity);
  r.acceleration = a.acceleration + w * (b.acceleration - a.acceleration);
  r.curvature = a.curvature + w * (b.curvature - a.curvature);
  return r;
}

}  // namespace taxicbf
