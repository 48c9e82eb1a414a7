#pragma once

// Random planner and trajectory instances shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "taxicbf/geo_graph.hpp"
#include "taxicbf/trajectory.hpp"

namespace cases {

using namespace taxicbf;

inline TaxiGraph from_oracle(const oracle::Graph& g) {
  std::vector<PlanarNode> nodes;
  for (std::size_t i = 0; i < g.ids.size(); ++i) nodes.push_back({g.ids[i], g.xy[i], NodeKind::kIntersection});
  std::vector<std::pair<std::string, std::string>> edges;
  for (auto [a, b] : g.edges) edges.emplace_back(g.ids[a], g.ids[b]);
  return TaxiGraph(std::move(nodes), edges);
}

inline bool route_turns_ok(const TaxiRoute& r, double max_turn_deg) {
  for (std::size_t i = 1; i + 1 < r.waypoints.size(); ++i) {
    if (oracle::turn_deg(r.waypoints[i - 1].xy, r.waypoints[i].xy, r.waypoints[i + 1].xy) >
        max_turn_deg + 1e-9) {
      return false;
    }
  }
  return true;
}

// Largest heading jump (rad) or position gap (m) between consecutive segments.
inline double tangent_mismatch(const GeometricPath& path) {
  double worst = 0.0;
  const auto& segs = path.segments();
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
    const PathPoint end = segment_point(segs[i], segment_length(segs[i]));
    const PathPoint start = segment_point(segs[i + 1], 0.0);
    worst = std::max(worst, std::abs(wrap_angle(end.heading - start.heading)));
    worst = std::max(worst, (end.position - start.position).norm());
  }
  return worst;
}

// Random polyline whose corners all fit a radius-q fillet.
inline std::vector<Vec2> random_route(std::mt19937_64& rng, double q) {
  std::uniform_int_distribution<int> count(3, 7);
  std::uniform_real_distribution<double> leg(2.5 * q, 6.0 * q);
  std::uniform_real_distribution<double> turn(-2.0, 2.0);
  std::vector<Vec2> pts{Vec2(0, 0)};
  double heading = 0.3;
  for (int i = count(rng); i > 0; --i) {
    pts.push_back(pts.back() + leg(rng) * heading_vector(heading));
    heading += turn(rng);
  }
  return pts;
}

}  // namespace cases
