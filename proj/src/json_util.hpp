#pragma once

// Internal helpers for strict JSON decoding. Every error names the offending
// field path, e.g. "scenario.vehicle.mass".

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "taxicbf/error.hpp"

namespace taxicbf::detail {

using nlohmann::json;

inline std::string join_path(const std::string& base, std::string_view key) {
  return base.empty() ? std::string(key) : base + "." + std::string(key);
}

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + ": expected an object");
}

inline void reject_unknown(const json& j, const std::string& path,
                           std::initializer_list<std::string_view> allowed) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError(join_path(path, key) + ": unknown field '" + key + "'");
    }
  }
}

inline const json& require(const json& j, const std::string& path, std::string_view key) {
  auto it = j.find(std::string(key));
  if (it == j.end()) throw ValidationError(join_path(path, key) + ": missing required field");
  return *it;
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path + ": expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path + ": must be finite");
  return v;
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path + ": expected a string");
  return j.get<std::string>();
}

inline void read_number(const json& j, const std::string& path, std::string_view key, double& out) {
  auto it = j.find(std::string(key));
  if (it != j.end()) out = as_number(*it, join_path(path, key));
}

inline void read_int(const json& j, const std::string& path, std::string_view key, int& out) {
  auto it = j.find(std::string(key));
  if (it == j.end()) return;
  if (!it->is_number_integer()) throw ValidationError(join_path(path, key) + ": expected an integer");
  out = it->get<int>();
}

}  // namespace taxicbf::detail
