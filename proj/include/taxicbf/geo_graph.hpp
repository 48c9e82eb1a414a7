#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taxicbf/angles.hpp"

namespace taxicbf {

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kDefaultMaxTurnDeg = 120.0;

struct LatLon {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

enum class NodeKind { kHangar, kIntersection, kRunwayEntry };

std::string_view to_string(NodeKind kind);

struct MapNode {
  std::string id;
  LatLon position;
  NodeKind kind = NodeKind::kIntersection;
};

struct AirportMap {
  LatLon origin;
  std::vector<MapNode> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
};

// Parses the airport map JSON document. Unknown fields are rejected; the
// returned map has already passed validate().
AirportMap parse_airport_map(std::string_view json_text);
AirportMap load_airport_map(const std::filesystem::path& path);

// Unique ids, known edge endpoints, no self-loops, no duplicate edges.
void validate(const AirportMap& map);

// Local equirectangular projection about `origin`. Throws OutOfRangeError
// when `point` is more than one degree away from the origin on either axis.
Vec2 project_latlon(const LatLon& origin, const LatLon& point);

// Inverse of project_latlon.
LatLon unproject_xy(const LatLon& origin, const Vec2& xy);

struct PlanarNode {
  std::string id;
  Vec2 xy = Vec2::Zero();
  NodeKind kind = NodeKind::kIntersection;
};

struct WeightedEdge {
  int a = 0;
  int b = 0;
  double length = 0.0;
};

struct Neighbor {
  int node = 0;
  double length = 0.0;
};

// Undirected taxiway graph with Euclidean edge lengths in meters.
class TaxiGraph {
 public:
  // Builds from already-projected nodes. Same validation rules as AirportMap.
  TaxiGraph(std::vector<PlanarNode> nodes,
            const std::vector<std::pair<std::string, std::string>>& edges);

  const std::vector<PlanarNode>& nodes() const { return nodes_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  const std::vector<Neighbor>& neighbors(int node) const { return adjacency_[node]; }

  // -1 when absent.
  int index_of(std::string_view id) const;
  const PlanarNode& node(int index) const { return nodes_[index]; }
  bool connected() const;

 private:
  std::vector<PlanarNode> nodes_;
  std::vector<WeightedEdge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

TaxiGraph build_undirected(const AirportMap& map);

// Deviation from straight-through travel a -> b -> c, degrees in [0, 180].
double turn_angle_deg(const Vec2& a, const Vec2& b, const Vec2& c);

// One ordered traversal of an undirected edge.
struct MovementState {
  int from = 0;
  int to = 0;
};

struct Transition {
  int next_state = 0;
  double weight = 0.0;  // length of the edge being entered
};

// Line-graph expansion: states are directed edge traversals, transitions
// (i->j, j->k) exist iff k != i and the turn at j is within max_turn_deg.
class DirectedTaxiGraph {
 public:
  DirectedTaxiGraph(TaxiGraph graph, double max_turn_deg);

  const TaxiGraph& graph() const { return graph_; }
  double max_turn_deg() const { return max_turn_deg_; }
  const std::vector<MovementState>& states() const { return states_; }
  const std::vector<Transition>& transitions(int state) const { return arcs_[state]; }
  std::size_t transition_count() const;

  // -1 when (from, to) is not an edge.
  int state_index(int from, int to) const;

 private:
  TaxiGraph graph_;
  double max_turn_deg_;
  std::vector<MovementState> states_;
  std::vector<std::vector<Transition>> arcs_;
};

DirectedTaxiGraph expand_directed(const TaxiGraph& graph,
                                  double max_turn_deg = kDefaultMaxTurnDeg);

struct TaxiRoute {
  std::vector<PlanarNode> waypoints;
  double total_length = 0.0;

  std::vector<std::string> ids() const;
};

// Dijkstra over movement states. Among equal-cost routes the one with the
// lexicographically smallest node-id sequence wins.
TaxiRoute shortest_taxi_path(const DirectedTaxiGraph& graph, std::string_view src,
                             std::string_view dst);

}  // namespace taxicbf
