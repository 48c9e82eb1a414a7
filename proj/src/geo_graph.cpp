#include "taxicbf/geo_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "json_util.hpp"
#include "taxicbf/error.hpp"

namespace taxicbf {

namespace {

std::string edge_name(std::string_view a, std::string_view b) {
  return "(" + std::string(a) + ", " + std::string(b) + ")";
}

void check_edges(const std::vector<std::string>& ids,
                 const std::vector<std::pair<std::string, std::string>>& edges) {
  std::set<std::string> known;
  for (const auto& id : ids) {
    if (id.empty()) throw ValidationError("node id must not be empty");
    if (!known.insert(id).second) throw ValidationError("duplicate node id '" + id + "'");
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [a, b] : edges) {
    if (a == b) throw ValidationError("self-loop edge " + edge_name(a, b));
    if (!known.count(a) || !known.count(b)) {
      throw ValidationError("edge " + edge_name(a, b) + " references an unknown node");
    }
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    if (!seen.insert(key).second) throw ValidationError("duplicate edge " + edge_name(a, b));
  }
}

NodeKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "hangar") return NodeKind::kHangar;
  if (s == "intersection") return NodeKind::kIntersection;
  if (s == "runway_entry") return NodeKind::kRunwayEntry;
  throw ValidationError(path + ": unknown node kind '" + s + "'");
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kHangar:
      return "hangar";
    case NodeKind::kIntersection:
      return "intersection";
    case NodeKind::kRunwayEntry:
      return "runway_entry";
  }
  return "intersection";
}

void validate(const AirportMap& map) {
  auto check_ll = [](const LatLon& ll, const std::string& what) {
    if (!std::isfinite(ll.lat) || !std::isfinite(ll.lon) || std::abs(ll.lat) > 90.0 ||
        std::abs(ll.lon) > 180.0) {
      throw ValidationError(what + ": latitude/longitude out of range");
    }
  };
  check_ll(map.origin, "origin");
  std::vector<std::string> ids;
  ids.reserve(map.nodes.size());
  for (const auto& n : map.nodes) {
    check_ll(n.position, "node '" + n.id + "'");
    ids.push_back(n.id);
  }
  check_edges(ids, map.edges);
}

AirportMap parse_airport_map(std::string_view json_text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("map: malformed JSON: ") + e.what());
  }
  detail::reject_unknown(doc, "map", {"origin", "nodes", "edges"});

  AirportMap map;
  const auto& origin = detail::require(doc, "map", "origin");
  detail::reject_unknown(origin, "map.origin", {"lat", "lon"});
  map.origin.lat = detail::as_number(detail::require(origin, "map.origin", "lat"), "map.origin.lat");
  map.origin.lon = detail::as_number(detail::require(origin, "map.origin", "lon"), "map.origin.lon");

  const auto& nodes = detail::require(doc, "map", "nodes");
  if (!nodes.is_array()) throw ValidationError("map.nodes: expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "map.nodes[" + std::to_string(i) + "]";
    const auto& n = nodes[i];
    detail::reject_unknown(n, path, {"id", "lat", "lon", "kind"});
    MapNode node;
    node.id = detail::as_string(detail::require(n, path, "id"), path + ".id");
    node.position.lat = detail::as_number(detail::require(n, path, "lat"), path + ".lat");
    node.position.lon = detail::as_number(detail::require(n, path, "lon"), path + ".lon");
    node.kind = parse_kind(detail::as_string(detail::require(n, path, "kind"), path + ".kind"),
                           path + ".kind");
    map.nodes.push_back(std::move(node));
  }

  const auto& edges = detail::require(doc, "map", "edges");
  if (!edges.is_array()) throw ValidationError("map.edges: expected an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "map.edges[" + std::to_string(i) + "]";
    const auto& e = edges[i];
    if (!e.is_array() || e.size() != 2) throw ValidationError(path + ": expected a pair of node ids");
    map.edges.emplace_back(detail::as_string(e[0], path + "[0]"),
                           detail::as_string(e[1], path + "[1]"));
  }

  validate(map);
  return map;
}

AirportMap load_airport_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open map file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_airport_map(buf.str());
}

Vec2 project_latlon(const LatLon& origin, const LatLon& point) {
  if (std::abs(origin.lat) > 90.0 || std::abs(origin.lon) > 180.0 || std::abs(point.lat) > 90.0 ||
      std::abs(point.lon) > 180.0) {
    throw OutOfRangeError("latitude/longitude out of range");
  }
  const double dlat = point.lat - origin.lat;
  double dlon = point.lon - origin.lon;
  if (dlon > 180.0) dlon -= 360.0;
  if (dlon < -180.0) dlon += 360.0;
  if (std::abs(dlat) > 1.0 || std::abs(dlon) > 1.0) {
    throw OutOfRangeError("point is more than 1 degree from the projection origin");
  }
  return {kEarthRadiusM * deg2rad(dlon) * std::cos(deg2rad(origin.lat)),
          kEarthRadiusM * deg2rad(dlat)};
}

LatLon unproject_xy(const LatLon& origin, const Vec2& xy) {
  return {origin.lat + rad2deg(xy.y() / kEarthRadiusM),
          origin.lon + rad2deg(xy.x() / (kEarthRadiusM * std::cos(deg2rad(origin.lat))))};
}

TaxiGraph::TaxiGraph(std::vector<PlanarNode> nodes,
                     const std::vector<std::pair<std::string, std::string>>& edges)
    : nodes_(std::move(nodes)), adjacency_(nodes_.size()) {
  std::vector<std::string> ids;
  for (const auto& n : nodes_) {
    if (!std::isfinite(n.xy.x()) || !std::isfinite(n.xy.y())) {
      throw ValidationError("node '" + n.id + "' has non-finite coordinates");
    }
    ids.push_back(n.id);
  }
  check_edges(ids, edges);
  for (const auto& [a, b] : edges) {
    const int ia = index_of(a);
    const int ib = index_of(b);
    const double len = (nodes_[ia].xy - nodes_[ib].xy).norm();
    if (!(len > 0.0)) throw ValidationError("edge " + edge_name(a, b) + " has zero length");
    edges_.push_back({ia, ib, len});
    adjacency_[ia].push_back({ib, len});
    adjacency_[ib].push_back({ia, len});
  }
}

int TaxiGraph::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

bool TaxiGraph::connected() const {
  if (nodes_.empty()) return true;
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<int> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    for (const auto& nb : adjacency_[n]) {
      if (!seen[nb.node]) {
        seen[nb.node] = true;
        ++count;
        stack.push_back(nb.node);
      }
    }
  }
  return count == nodes_.size();
}

TaxiGraph build_undirected(const AirportMap& map) {
  validate(map);
  std::vector<PlanarNode> nodes;
  nodes.reserve(map.nodes.size());
  for (const auto& n : map.nodes) {
    nodes.push_back({n.id, project_latlon(map.origin, n.position), n.kind});
  }
  return TaxiGraph(std::move(nodes), map.edges);
}

double turn_angle_deg(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 in = b - a;
  const Vec2 out = c - b;
  return rad2deg(std::atan2(std::abs(cross2(in, out)), in.dot(out)));
}

DirectedTaxiGraph::DirectedTaxiGraph(TaxiGraph graph, double max_turn_deg)
    : graph_(std::move(graph)), max_turn_deg_(max_turn_deg) {
  if (!(max_turn_deg > 0.0 && max_turn_deg < 180.0)) {
    throw ValidationError("max_turn_deg must lie in (0, 180)");
  }
  if (!graph_.connected()) throw ValidationError("taxi graph is not connected");

  for (const auto& e : graph_.edges()) {
    states_.push_back({e.a, e.b});
    states_.push_back({e.b, e.a});
  }
  std::sort(states_.begin(), states_.end(), [](const MovementState& x, const MovementState& y) {
    return std::tie(x.from, x.to) < std::tie(y.from, y.to);
  });

  arcs_.resize(states_.size());
  const auto& nodes = graph_.nodes();
  for (std::size_t s = 0; s < states_.size(); ++s) {
    const auto [i, j] = states_[s];
    for (const auto& nb : graph_.neighbors(j)) {
      const int k = nb.node;
      if (k == i) continue;
      if (turn_angle_deg(nodes[i].xy, nodes[j].xy, nodes[k].xy) > max_turn_deg_) continue;
      arcs_[s].push_back({state_index(j, k), nb.length});
    }
  }
}

int DirectedTaxiGraph::state_index(int from, int to) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), MovementState{from, to},
                             [](const MovementState& x, const MovementState& y) {
                               return std::tie(x.from, x.to) < std::tie(y.from, y.to);
                             });
  if (it == states_.end() || it->from != from || it->to != to) return -1;
  return static_cast<int>(it - states_.begin());
}

std::size_t DirectedTaxiGraph::transition_count() const {
  std::size_t n = 0;
  for (const auto& a : arcs_) n += a.size();
  return n;
}

DirectedTaxiGraph expand_directed(const TaxiGraph& graph, double max_turn_deg) {
  return DirectedTaxiGraph(graph, max_turn_deg);
}

std::vector<std::string> TaxiRoute::ids() const {
  std::vector<std::string> out;
  out.reserve(waypoints.size());
  for (const auto& w : waypoints) out.push_back(w.id);
  return out;
}

TaxiRoute shortest_taxi_path(const DirectedTaxiGraph& dg, std::string_view src,
                             std::string_view dst) {
  const TaxiGraph& g = dg.graph();
  const int s = g.index_of(src);
  const int d = g.index_of(dst);
  if (s < 0) throw ValidationError("unknown source node '" + std::string(src) + "'");
  if (d < 0) throw ValidationError("unknown destination node '" + std::string(dst) + "'");
  if (s == d) throw ValidationError("source and destination must differ");

  // Rank of each node in id order, so path comparison is lexicographic on ids.
  std::vector<int> order(g.nodes().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return g.node(a).id < g.node(b).id; });
  std::vector<int> rank(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = static_cast<int>(r);

  struct Label {
    double cost;
    std::vector<int> path;  // node ranks
    int state;
  };
  auto worse = [](const Label& a, const Label& b) {
    if (a.cost != b.cost) return a.cost > b.cost;
    return a.path > b.path;
  };
  auto better = [](double cost, const std::vector<int>& path, const Label& cur) {
    if (cost != cur.cost) return cost < cur.cost;
    return path < cur.path;
  };

  const std::size_t n_states = dg.states().size();
  std::vector<Label> best(n_states, Label{std::numeric_limits<double>::infinity(), {}, -1});
  std::vector<bool> done(n_states, false);
  std::priority_queue<Label, std::vector<Label>, decltype(worse)> queue(worse);

  for (const auto& nb : g.neighbors(s)) {
    const int st = dg.state_index(s, nb.node);
    Label l{nb.length, {rank[s], rank[nb.node]}, st};
    if (better(l.cost, l.path, best[st])) {
      best[st] = l;
      queue.push(std::move(l));
    }
  }

  while (!queue.empty()) {
    Label cur = queue.top();
    queue.pop();
    if (done[cur.state]) continue;
    done[cur.state] = true;
    if (dg.states()[cur.state].to == d) {
      TaxiRoute route;
      route.total_length = cur.cost;
      for (int r : cur.path) route.waypoints.push_back(g.node(order[r]));
      return route;
    }
    for (const auto& tr : dg.transitions(cur.state)) {
      if (done[tr.next_state]) continue;
      const double cost = cur.cost + tr.weight;
      std::vector<int> path = cur.path;
      path.push_back(rank[dg.states()[tr.next_state].to]);
      if (better(cost, path, best[tr.next_state])) {
        best[tr.next_state] = Label{cost, path, tr.next_state};
        queue.push(Label{cost, std::move(path), tr.next_state});
      }
    }
  }
  throw UnreachableError("no turn-feasible route from '" + std::string(src) + "' to '" +
                         std::string(dst) + "'");
}

}  // namespace taxicbf
