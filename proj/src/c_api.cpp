#include "taxicbf/taxicbf.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <new>
#include <string>
#include <utility>

#include "taxicbf/error.hpp"
#include "taxicbf/geo_graph.hpp"
#include "taxicbf/qp.hpp"
#include "taxicbf/scenario.hpp"
#include "taxicbf/simulation.hpp"
#include "taxicbf/trajectory.hpp"

struct tc_map {
  taxicbf::AirportMap map;
};

struct tc_route {
  taxicbf::TaxiRoute route;
  std::vector<std::string> ids;
};

struct tc_trajectory {
  taxicbf::ReferenceTrajectory traj;
};

struct tc_scenario {
  taxicbf::ScenarioConfig cfg;
};

struct tc_result {
  taxicbf::RunResult run;
  std::string metrics_json;
};

namespace {

thread_local std::string g_last_error;

tc_status status_of(taxicbf::ErrorKind kind) {
  using taxicbf::ErrorKind;
  switch (kind) {
    case ErrorKind::kValidation:
      return TC_ERR_VALIDATION;
    case ErrorKind::kOutOfRange:
      return TC_ERR_OUT_OF_RANGE;
    case ErrorKind::kUnreachable:
      return TC_ERR_UNREACHABLE;
    case ErrorKind::kInfeasibleFillet:
      return TC_ERR_INFEASIBLE_FILLET;
    case ErrorKind::kQpInfeasible:
      return TC_ERR_QP_INFEASIBLE;
    case ErrorKind::kIo:
      return TC_ERR_IO;
    case ErrorKind::kNumeric:
      return TC_ERR_NUMERIC;
  }
  return TC_ERR_INTERNAL;
}

tc_status fail(tc_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
tc_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return TC_OK;
  } catch (const taxicbf::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(TC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TC_ERR_INTERNAL, e.what());
  }
}

#define TC_REQUIRE(cond, what) \
  if (!(cond)) return fail(TC_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* tc_last_error_message(void) { return g_last_error.c_str(); }

const char* tc_status_name(tc_status status) {
  switch (status) {
    case TC_OK:
      return "ok";
    case TC_ERR_VALIDATION:
      return "validation";
    case TC_ERR_OUT_OF_RANGE:
      return "out_of_range";
    case TC_ERR_UNREACHABLE:
      return "unreachable";
    case TC_ERR_INFEASIBLE_FILLET:
      return "infeasible_fillet";
    case TC_ERR_QP_INFEASIBLE:
      return "qp_infeasible";
    case TC_ERR_IO:
      return "io";
    case TC_ERR_NUMERIC:
      return "numeric";
    case TC_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case TC_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

void tc_string_free(char* s) { std::free(s); }

tc_status tc_map_load(const char* path, tc_map** out) {
  TC_REQUIRE(path && out, "tc_map_load: null argument");
  *out = nullptr;
  return guarded([&] { *out = new tc_map{taxicbf::load_airport_map(path)}; });
}

void tc_map_free(tc_map* map) { delete map; }

tc_status tc_plan(const tc_map* map, const char* from, const char* to, double max_turn_deg,
                  tc_route** out) {
  TC_REQUIRE(map && from && to && out, "tc_plan: null argument");
  *out = nullptr;
  return guarded([&] {
    const taxicbf::DirectedTaxiGraph graph =
        taxicbf::expand_directed(taxicbf::build_undirected(map->map), max_turn_deg);
    taxicbf::TaxiRoute route = taxicbf::shortest_taxi_path(graph, from, to);
    auto ids = route.ids();
    *out = new tc_route{std::move(route), std::move(ids)};
  });
}

size_t tc_route_size(const tc_route* route) { return route ? route->ids.size() : 0; }

const char* tc_route_node_id(const tc_route* route, size_t index) {
  if (!route || index >= route->ids.size()) return nullptr;
  return route->ids[index].c_str();
}

double tc_route_length(const tc_route* route) {
  return route ? route->route.total_length : std::numeric_limits<double>::quiet_NaN();
}

void tc_route_free(tc_route* route) { delete route; }

tc_status tc_trajectory_build(const tc_route* route, double speed, double turning_radius,
                              double dt, tc_trajectory** out) {
  TC_REQUIRE(route && out, "tc_trajectory_build: null argument");
  *out = nullptr;
  return guarded([&] {
    const taxicbf::GeometricPath path = taxicbf::fillet_waypoints(route->route, turning_radius);
    *out = new tc_trajectory{taxicbf::sample_reference(path, speed, dt)};
  });
}

size_t tc_trajectory_size(const tc_trajectory* traj) {
  return traj ? traj->traj.samples().size() : 0;
}

double tc_trajectory_duration(const tc_trajectory* traj) {
  return traj ? traj->traj.duration() : std::numeric_limits<double>::quiet_NaN();
}

tc_status tc_trajectory_write_csv(const tc_trajectory* traj, const char* path) {
  TC_REQUIRE(traj && path, "tc_trajectory_write_csv: null argument");
  return guarded([&] { taxicbf::write_text_file(path, taxicbf::reference_csv(traj->traj)); });
}

void tc_trajectory_free(tc_trajectory* traj) { delete traj; }

tc_status tc_scenario_load(const char* path, tc_scenario** out) {
  TC_REQUIRE(path && out, "tc_scenario_load: null argument");
  *out = nullptr;
  return guarded([&] { *out = new tc_scenario{taxicbf::load_scenario(path)}; });
}

tc_status tc_scenario_set_controller(tc_scenario* scenario, const char* name) {
  TC_REQUIRE(scenario && name, "tc_scenario_set_controller: null argument");
  return guarded([&] { scenario->cfg.controller = taxicbf::parse_controller(name); });
}

const char* tc_scenario_controller(const tc_scenario* scenario) {
  if (!scenario) return nullptr;
  return taxicbf::to_string(scenario->cfg.controller).data();
}

void tc_scenario_free(tc_scenario* scenario) { delete scenario; }

tc_status tc_simulate(const tc_scenario* scenario, tc_result** out) {
  TC_REQUIRE(scenario && out, "tc_simulate: null argument");
  *out = nullptr;
  return guarded([&] {
    taxicbf::RunResult run = taxicbf::run_scenario(scenario->cfg);
    std::string json = taxicbf::metrics_json(run.metrics);
    *out = new tc_result{std::move(run), std::move(json)};
  });
}

tc_terminal_status tc_result_status(const tc_result* result) {
  if (!result) return TC_TIMEOUT;
  switch (result->run.trace.status) {
    case taxicbf::TerminalStatus::kCompleted:
      return TC_COMPLETED;
    case taxicbf::TerminalStatus::kSafetyViolation:
      return TC_SAFETY_VIOLATION;
    case taxicbf::TerminalStatus::kFallbackEngaged:
      return TC_FALLBACK_ENGAGED;
    case taxicbf::TerminalStatus::kTimeout:
      return TC_TIMEOUT;
  }
  return TC_TIMEOUT;
}

size_t tc_result_steps(const tc_result* result) {
  return result ? result->run.trace.records.size() : 0;
}

double tc_result_mean_error(const tc_result* result) {
  return result ? result->run.metrics.mean_position_error
                : std::numeric_limits<double>::quiet_NaN();
}

double tc_result_min_h_ref(const tc_result* result) {
  return result ? result->run.metrics.min_h_ref : std::numeric_limits<double>::quiet_NaN();
}

const char* tc_result_metrics_json(const tc_result* result) {
  return result ? result->metrics_json.c_str() : nullptr;
}

tc_status tc_result_write(const tc_result* result, const char* csv_path) {
  TC_REQUIRE(result && csv_path, "tc_result_write: null argument");
  return guarded(
      [&] { taxicbf::write_trace(result->run.trace, result->run.metrics, csv_path); });
}

void tc_result_free(tc_result* result) { delete result; }

tc_status tc_compare(const tc_scenario* scenario, const char* out_dir, char** report_json) {
  TC_REQUIRE(scenario, "tc_compare: null scenario");
  if (report_json) *report_json = nullptr;
  return guarded([&] {
    const taxicbf::ComparisonReport report = taxicbf::compare_controllers(scenario->cfg);
    const std::string json = taxicbf::comparison_json(report);
    if (out_dir) {
      const std::filesystem::path dir(out_dir);
      if (report.mpc) {
        taxicbf::write_trace(report.mpc->trace, report.mpc->metrics, dir / "mpc_cbf.csv");
      }
      if (report.pid) {
        taxicbf::write_trace(report.pid->trace, report.pid->metrics, dir / "pid_cbf.csv");
      }
      taxicbf::write_text_file(dir / "comparison.json", json);
    }
    if (report_json) {
      char* buf = static_cast<char*>(std::malloc(json.size() + 1));
      if (!buf) throw std::bad_alloc();
      std::memcpy(buf, json.c_str(), json.size() + 1);
      *report_json = buf;
    }
  });
}

}  // extern "C"
