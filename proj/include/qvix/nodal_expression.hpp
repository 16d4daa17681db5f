#pragma once

// Closed-form nodal data for experiment configs: constants, polynomials in x
// and shifted sines, evaluated at grid nodes.

#include <json.hpp>

#include <string>
#include <vector>

#include "qvix/grid_fem.hpp"

namespace qvix {

struct NodalExpression {
  enum class Type { Constant, Polynomial, Sine };

  Type type = Type::Constant;
  double value = 0.0;           ///< Constant
  std::vector<double> coeffs;   ///< Polynomial: sum_k coeffs[k] x^k
  double amplitude = 0.0;       ///< Sine: offset + amplitude sin(pi frequency x + phase)
  double frequency = 1.0;
  double phase = 0.0;
  double offset = 0.0;

  static NodalExpression constant(double v);

  double at(double x) const;
  Eigen::VectorXd evaluate(const Grid& grid) const;

  bool operator==(const NodalExpression&) const = default;
};

/// Accepts a bare number or an object tagged by "type". `path` prefixes
/// error messages (e.g. "forcing").
NodalExpression parse_expression(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const NodalExpression& e);

}  // namespace qvix
