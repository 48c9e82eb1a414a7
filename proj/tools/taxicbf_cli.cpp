#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "taxicbf/taxicbf.h"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kSafety = 2, kIo = 3 };

int report(tc_status status) {
  std::fprintf(stderr, "error (%s): %s\n", tc_status_name(status), tc_last_error_message());
  return status == TC_ERR_IO ? kIo : kValidation;
}

int ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "error (io): cannot create '%s': %s\n", dir.c_str(),
                 ec.message().c_str());
    return kIo;
  }
  return kOk;
}

const char* terminal_name(tc_terminal_status s) {
  switch (s) {
    case TC_COMPLETED:
      return "completed";
    case TC_SAFETY_VIOLATION:
      return "safety_violation";
    case TC_FALLBACK_ENGAGED:
      return "fallback_engaged";
    case TC_TIMEOUT:
      return "timeout";
  }
  return "timeout";
}

struct PlanArgs {
  std::string map;
  std::string from;
  std::string to;
  double max_turn_deg = 120.0;
};

// Loads the map and plans; on success the caller owns *route.
int plan_route(const PlanArgs& a, tc_route** route) {
  tc_map* map = nullptr;
  if (tc_status s = tc_map_load(a.map.c_str(), &map); s != TC_OK) return report(s);
  const tc_status s = tc_plan(map, a.from.c_str(), a.to.c_str(), a.max_turn_deg, route);
  tc_map_free(map);
  return s == TC_OK ? kOk : report(s);
}

int run_plan(const PlanArgs& a) {
  tc_route* route = nullptr;
  if (int rc = plan_route(a, &route); rc != kOk) return rc;
  for (size_t i = 0; i < tc_route_size(route); ++i) {
    std::printf("%s%s", i ? " -> " : "", tc_route_node_id(route, i));
  }
  std::printf("\ntotal_length_m %.6f\n", tc_route_length(route));
  tc_route_free(route);
  return kOk;
}

int run_trajectory(const PlanArgs& a, double speed, double radius, double dt,
                   const std::string& out) {
  tc_route* route = nullptr;
  if (int rc = plan_route(a, &route); rc != kOk) return rc;
  tc_trajectory* traj = nullptr;
  tc_status s = tc_trajectory_build(route, speed, radius, dt, &traj);
  tc_route_free(route);
  if (s != TC_OK) return report(s);
  s = tc_trajectory_write_csv(traj, out.c_str());
  if (s == TC_OK) {
    std::printf("samples %zu duration_s %.6f -> %s\n", tc_trajectory_size(traj),
                tc_trajectory_duration(traj), out.c_str());
  }
  tc_trajectory_free(traj);
  return s == TC_OK ? kOk : report(s);
}

int run_simulate(const std::string& scenario_path, const std::string& controller,
                 const std::string& out_dir) {
  tc_scenario* sc = nullptr;
  if (tc_status s = tc_scenario_load(scenario_path.c_str(), &sc); s != TC_OK) return report(s);
  if (!controller.empty()) {
    if (tc_status s = tc_scenario_set_controller(sc, controller.c_str()); s != TC_OK) {
      tc_scenario_free(sc);
      return report(s);
    }
  }
  if (int rc = ensure_dir(out_dir); rc != kOk) {
    tc_scenario_free(sc);
    return rc;
  }
  const std::string csv =
      (std::filesystem::path(out_dir) / (std::string(tc_scenario_controller(sc)) + ".csv"))
          .string();
  tc_result* res = nullptr;
  tc_status s = tc_simulate(sc, &res);
  tc_scenario_free(sc);
  if (s != TC_OK) return report(s);
  s = tc_result_write(res, csv.c_str());
  if (s != TC_OK) {
    tc_result_free(res);
    return report(s);
  }
  const tc_terminal_status status = tc_result_status(res);
  std::printf("status %s steps %zu mean_error_m %.6f min_h_ref %.6f -> %s\n",
              terminal_name(status), tc_result_steps(res), tc_result_mean_error(res),
              tc_result_min_h_ref(res), csv.c_str());
  tc_result_free(res);
  return status == TC_SAFETY_VIOLATION ? kSafety : kOk;
}

int run_compare(const std::string& scenario_path, const std::string& out_dir) {
  tc_scenario* sc = nullptr;
  if (tc_status s = tc_scenario_load(scenario_path.c_str(), &sc); s != TC_OK) return report(s);
  if (int rc = ensure_dir(out_dir); rc != kOk) {
    tc_scenario_free(sc);
    return rc;
  }
  char* json = nullptr;
  const tc_status s = tc_compare(sc, out_dir.c_str(), &json);
  tc_scenario_free(sc);
  if (s != TC_OK) return report(s);
  std::fputs(json, stdout);
  tc_string_free(json);
  return kOk;
}

int run_validate(const std::string& scenario_path) {
  tc_scenario* sc = nullptr;
  if (tc_status s = tc_scenario_load(scenario_path.c_str(), &sc); s != TC_OK) return report(s);
  std::printf("ok %s\n", scenario_path.c_str());
  tc_scenario_free(sc);
  return kOk;
}

void add_plan_options(CLI::App* cmd, PlanArgs& a) {
  cmd->add_option("--map", a.map, "Airport map JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--from", a.from, "Start node id")->required();
  cmd->add_option("--to", a.to, "Goal node id")->required();
  cmd->add_option("--max-turn-deg", a.max_turn_deg, "Largest allowed heading change")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Taxi route planning and safe tracking simulation"};
  app.require_subcommand(1);

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Shortest turn-feasible route");
  add_plan_options(plan, plan_args);

  PlanArgs traj_args;
  double speed = 5.0;
  double radius = 20.0;
  double dt = 0.05;
  std::string traj_out;
  auto* traj = app.add_subcommand("trajectory", "Filleted constant-speed reference as CSV");
  add_plan_options(traj, traj_args);
  traj->add_option("--speed", speed, "Reference speed, m/s")->capture_default_str();
  traj->add_option("--radius", radius, "Turning radius, m")->capture_default_str();
  traj->add_option("--dt", dt, "Sample period, s")->capture_default_str();
  traj->add_option("--out", traj_out, "Output CSV")->required();

  std::string sim_scenario;
  std::string sim_out;
  std::string sim_controller;
  auto* sim = app.add_subcommand("simulate", "Closed-loop run; writes trace and metrics");
  sim->add_option("--scenario", sim_scenario, "Scenario JSON")->required();
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_option("--controller", sim_controller, "Override: mpc_cbf, pid_cbf, mpc_no_ref_cbf");

  std::string cmp_scenario;
  std::string cmp_out;
  auto* cmp = app.add_subcommand("compare", "Run mpc_cbf and pid_cbf side by side");
  cmp->add_option("--scenario", cmp_scenario, "Scenario JSON")->required();
  cmp->add_option("--out", cmp_out, "Output directory")->required();

  std::string val_scenario;
  auto* val = app.add_subcommand("validate", "Parse and check a scenario");
  val->add_option("--scenario", val_scenario, "Scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  if (*plan) return run_plan(plan_args);
  if (*traj) return run_trajectory(traj_args, speed, radius, dt, traj_out);
  if (*sim) return run_simulate(sim_scenario, sim_controller, sim_out);
  if (*cmp) return run_compare(cmp_scenario, cmp_out);
  return run_validate(val_scenario);
}
