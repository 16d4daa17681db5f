#include "qvix/nodal_expression.hpp"

#include <cmath>
#include <numbers>

#include "json_fields.hpp"

namespace qvix {

NodalExpression NodalExpression::constant(double v) {
  NodalExpression e;
  e.value = v;
  return e;
}

double NodalExpression::at(double x) const {
  switch (type) {
    case Type::Constant: return value;
    case Type::Polynomial: {
      double acc = 0.0;
      for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
      return acc;
    }
    case Type::Sine: return offset + amplitude * std::sin(std::numbers::pi * frequency * x + phase);
  }
  return 0.0;
}

Eigen::VectorXd NodalExpression::evaluate(const Grid& grid) const {
  Eigen::VectorXd v(grid.n_nodes());
  for (int i = 0; i < grid.n_nodes(); ++i) v[i] = at(grid.x(i));
  return v;
}

using detail::allow_only;
using detail::number;

NodalExpression parse_expression(const nlohmann::json& j, const std::string& path) {
  if (j.is_number()) return NodalExpression::constant(number(j, path));
  if (!j.is_object()) throw ConfigError(path, "expected a number or an expression object");
  if (!j.contains("type")) throw ConfigError(path + ".type", "missing");
  const nlohmann::json& t = j.at("type");
  if (!t.is_string()) throw ConfigError(path + ".type", "expected a string");
  const std::string type = t.get<std::string>();
  NodalExpression e;
  if (type == "constant") {
    allow_only(j, path, {"type", "value"});
    if (!j.contains("value")) throw ConfigError(path + ".value", "missing");
    e.value = number(j.at("value"), path + ".value");
  } else if (type == "polynomial") {
    allow_only(j, path, {"type", "coeffs"});
    e.type = NodalExpression::Type::Polynomial;
    if (!j.contains("coeffs") || !j.at("coeffs").is_array() || j.at("coeffs").empty()) {
      throw ConfigError(path + ".coeffs", "expected a nonempty array");
    }
    const auto& c = j.at("coeffs");
    for (size_t k = 0; k < c.size(); ++k) {
      e.coeffs.push_back(number(c[k], path + ".coeffs[" + std::to_string(k) + "]"));
    }
  } else if (type == "sine") {
    allow_only(j, path, {"type", "amplitude", "frequency", "phase", "offset"});
    e.type = NodalExpression::Type::Sine;
    if (!j.contains("amplitude")) throw ConfigError(path + ".amplitude", "missing");
    e.amplitude = number(j.at("amplitude"), path + ".amplitude");
    if (j.contains("frequency")) e.frequency = number(j.at("frequency"), path + ".frequency");
    if (j.contains("phase")) e.phase = number(j.at("phase"), path + ".phase");
    if (j.contains("offset")) e.offset = number(j.at("offset"), path + ".offset");
  } else {
    throw ConfigError(path + ".type", "unknown expression type '" + type + "'");
  }
  return e;
}

nlohmann::json to_json(const NodalExpression& e) {
  switch (e.type) {
    case NodalExpression::Type::Constant: return {{"type", "constant"}, {"value", e.value}};
    case NodalExpression::Type::Polynomial: return {{"type", "polynomial"}, {"coeffs", e.coeffs}};
    case NodalExpression::Type::Sine:
      return {{"type", "sine"},
              {"amplitude", e.amplitude},
              {"frequency", e.frequency},
              {"phase", e.phase},
              {"offset", e.offset}};
  }
  return nullptr;
}

}  // namespace qvix
