#pragma once

// Field readers shared by the config parsers; all errors carry the field path.

#include <json.hpp>

#include <cmath>
#include <initializer_list>
#include <string>

#include "qvix/experiment_config.hpp"

namespace qvix::detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline void allow_only(const nlohmann::json& j, const std::string& path,
                       std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw ConfigError(join(path, key), "unknown field");
  }
}

inline const nlohmann::json& field(const nlohmann::json& j, const std::string& path,
                                   const char* key) {
  if (!j.contains(key)) throw ConfigError(join(path, key), "missing");
  return j.at(key);
}

inline double number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

inline std::string text(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

}  // namespace qvix::detail
