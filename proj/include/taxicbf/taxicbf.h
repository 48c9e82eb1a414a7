#ifndef TAXICBF_H
#define TAXICBF_H

#include <stddef.h>

#if defined(_WIN32)
#define TC_API __declspec(dllexport)
#else
#define TC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tc_status {
  TC_OK = 0,
  TC_ERR_VALIDATION = 1,
  TC_ERR_OUT_OF_RANGE = 2,
  TC_ERR_UNREACHABLE = 3,
  TC_ERR_INFEASIBLE_FILLET = 4,
  TC_ERR_QP_INFEASIBLE = 5,
  TC_ERR_IO = 6,
  TC_ERR_NUMERIC = 7,
  TC_ERR_INVALID_ARGUMENT = 8,
  TC_ERR_INTERNAL = 9
} tc_status;

typedef enum tc_terminal_status {
  TC_COMPLETED = 0,
  TC_SAFETY_VIOLATION = 1,
  TC_FALLBACK_ENGAGED = 2,
  TC_TIMEOUT = 3
} tc_terminal_status;

typedef struct tc_map tc_map;
typedef struct tc_route tc_route;
typedef struct tc_trajectory tc_trajectory;
typedef struct tc_scenario tc_scenario;
typedef struct tc_result tc_result;

/* Message of the last failed call on this thread; "" if none. */
TC_API const char* tc_last_error_message(void);
TC_API const char* tc_status_name(tc_status status);
TC_API void tc_string_free(char* s);

TC_API tc_status tc_map_load(const char* path, tc_map** out);
TC_API void tc_map_free(tc_map* map);

TC_API tc_status tc_plan(const tc_map* map, const char* from, const char* to, double max_turn_deg,
                         tc_route** out);
TC_API size_t tc_route_size(const tc_route* route);
/* Borrowed pointer, valid until the route is freed. NULL when out of range. */
TC_API const char* tc_route_node_id(const tc_route* route, size_t index);
TC_API double tc_route_length(const tc_route* route);
TC_API void tc_route_free(tc_route* route);

TC_API tc_status tc_trajectory_build(const tc_route* route, double speed, double turning_radius,
                                     double dt, tc_trajectory** out);
TC_API size_t tc_trajectory_size(const tc_trajectory* traj);
TC_API double tc_trajectory_duration(const tc_trajectory* traj);
TC_API tc_status tc_trajectory_write_csv(const tc_trajectory* traj, const char* path);
TC_API void tc_trajectory_free(tc_trajectory* traj);

/* Parses, validates and resolves obstacle placements. */
TC_API tc_status tc_scenario_load(const char* path, tc_scenario** out);
/* name: "mpc_cbf", "pid_cbf" or "mpc_no_ref_cbf". */
TC_API tc_status tc_scenario_set_controller(tc_scenario* scenario, const char* name);
TC_API const char* tc_scenario_controller(const tc_scenario* scenario);
TC_API void tc_scenario_free(tc_scenario* scenario);

TC_API tc_status tc_simulate(const tc_scenario* scenario, tc_result** out);
TC_API tc_terminal_status tc_result_status(const tc_result* result);
TC_API size_t tc_result_steps(const tc_result* result);
TC_API double tc_result_mean_error(const tc_result* result);
TC_API double tc_result_min_h_ref(const tc_result* result);
/* Borrowed JSON text, valid until the result is freed. */
TC_API const char* tc_result_metrics_json(const tc_result* result);
/* Writes the trace CSV and its <stem>.metrics.json sidecar. */
TC_API tc_status tc_result_write(const tc_result* result, const char* csv_path);
TC_API void tc_result_free(tc_result* result);

/* Runs mpc_cbf and pid_cbf on the scenario. When out_dir is non-NULL, writes
   mpc_cbf.csv, pid_cbf.csv (with sidecars) and comparison.json there. The
   report is returned as JSON; release it with tc_string_free. */
TC_API tc_status tc_compare(const tc_scenario* scenario, const char* out_dir, char** report_json);

#ifdef __cplusplus
}
#endif

#endif
