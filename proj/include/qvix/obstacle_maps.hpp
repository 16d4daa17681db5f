#pragma once

// Obstacle maps u -> Phi(u) for implicit obstacle problems, with their
// derivative actions h -> Phi'(u)(h).

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qvix/grid_fem.hpp"

namespace qvix {

enum class MapKind { PlateauPointwise, InverseElliptic, Thermoforming };

std::string to_string(MapKind kind);

/// Quintic smoothstep s(r) = 6r^5 - 15r^4 + 10r^3 on [0, 1], clamped outside.
/// C^2 with s' = s'' = 0 at both ends.
namespace smoothstep {
double value(double r);
double derivative(double r);
double second_derivative(double r);
/// Antiderivative S(r) = int_0^r s, extended linearly (slope 1) for r > 1.
double integral(double r);
/// max s' = 15/8, attained at r = 1/2.
inline constexpr double kMaxSlope = 1.875;
}  // namespace smoothstep

class ObstacleMap {
 public:
  virtual ~ObstacleMap() = default;

  virtual MapKind kind() const = 0;
  virtual NodalFunction evaluate(const NodalFunction& u) const = 0;
  virtual NodalFunction derivative(const NodalFunction& u, const NodalFunction& h) const = 0;
};

using ObstacleMapHandle = std::shared_ptr<const ObstacleMap>;

NodalFunction evaluate(const ObstacleMap& map, const NodalFunction& u);
NodalFunction derivative_action(const ObstacleMap& map, const NodalFunction& u,
                                const NodalFunction& h);

// ---------------------------------------------------------------------------

struct PlateauParams {
  std::vector<double> levels;  ///< y_1 <= ... <= y_N, positive
  double eps = 0.25;           ///< plateau half-width
};

/// Pointwise map Phi(u)(x) = phi(u(x)) with a C^2 increasing scalar phi that is
/// constant (= y_j) on [y_j - eps, y_j + eps]. Neighbouring plateaus are
/// joined by a smoothstep; outside [y_1 - eps, y_N + eps] the slope ramps up
/// to 1 over a width eps.
class PlateauMap final : public ObstacleMap {
 public:
  explicit PlateauMap(PlateauParams params);

  MapKind kind() const override { return MapKind::PlateauPointwise; }
  NodalFunction evaluate(const NodalFunction& u) const override;
  NodalFunction derivative(const NodalFunction& u, const NodalFunction& h) const override;

  double scalar(double t) const;
  double scalar_derivative(double t) const;
  const PlateauParams& params() const { return params_; }

 private:
  PlateauParams params_;
};

/// Increasing scalar source g with g(0) = 0 and bounded derivative.
struct ScalarSource {
  enum class Type { Linear, Tanh };
  Type type = Type::Tanh;
  double scale = 1.0;  ///< g(r) = scale * r, or scale * tanh(r)

  double value(double r) const;
  double derivative(double r) const;
};

/// Phi(u) = L^{-1} g(u): the obstacle solves an elliptic equation whose source
/// depends on u.
class InverseEllipticMap final : public ObstacleMap {
 public:
  InverseEllipticMap(EllipticOperator L, ScalarSource g);

  MapKind kind() const override { return MapKind::InverseElliptic; }
  NodalFunction evaluate(const NodalFunction& u) const override;
  NodalFunction derivative(const NodalFunction& u, const NodalFunction& h) const override;

  const EllipticOperator& op() const { return L_; }
  const ScalarSource& source() const { return g_; }

 private:
  EllipticOperator L_;
  ScalarSource g_;
};

struct ThermoParams {
  double k = 1.0;      ///< reaction coefficient of the heat equation
  double M = 1.0;      ///< maximal heat transfer, g(0) = M
  double gamma = 0.1;  ///< mould growth per unit temperature, L = gamma * Id
  // Mould shape Phi_0 lives in ThermoformingMap since it carries the grid.
};

/// Heat transfer g(r) = M (1 - s(r)) for the gap r between mould and membrane:
/// g = M for r <= 0, g = 0 for r >= 1, decreasing and C^2 in between.
double heat_transfer(const ThermoParams& p, double gap);
double heat_transfer_derivative(const ThermoParams& p, double gap);

struct TemperatureSolve {
  NodalFunction T;
  int iterations = 0;
  double residual = 0.0;
  /// L^inf contraction factor gamma |g'|_inf / k of the fixed-point map.
  double contraction = 0.0;
  bool used_newton = false;
};

/// Mould deformed by heating: T solves (k - Laplace) T = g(gamma T + Phi_0 - u)
/// with homogeneous Neumann conditions and Phi(u) = Phi_0 + gamma T.
class ThermoformingMap final : public ObstacleMap {
 public:
  ThermoformingMap(ThermoParams params, NodalFunction mould);

  MapKind kind() const override { return MapKind::Thermoforming; }
  NodalFunction evaluate(const NodalFunction& u) const override;
  NodalFunction derivative(const NodalFunction& u, const NodalFunction& h) const override;

  /// Solves the semilinear temperature equation. Uses the damped fixed point
  /// when the contraction factor is below 0.9 and Newton otherwise; the
  /// a priori bound |T|_V <= C* is checked on every solve.
  TemperatureSolve temperature(const NodalFunction& u) const;

  /// C* = |g|_inf |Omega|^{1/2} / min(1, k).
  double temperature_bound() const;

  const ThermoParams& params() const { return params_; }
  const NodalFunction& mould() const { return mould_; }
  const EllipticOperator& heat_operator() const { return heat_; }

 private:
  ThermoParams params_;
  NodalFunction mould_;
  EllipticOperator heat_;
};

TemperatureSolve thermo_temperature(const ThermoformingMap& map, const NodalFunction& u);

// ---------------------------------------------------------------------------

/// Sampled lower bound on the Lipschitz constant of Phi in the V-ball
/// B_radius(center): the largest ratio |Phi(u) - Phi(v)|_V / |u - v|_V over
/// n_samples random pairs.
double lipschitz_estimate(const ObstacleMap& map, const NodalFunction& center, double radius,
                          int n_samples, std::uint64_t seed = 0);

/// Checks Phi(0) >= -tol and Phi(u) <= Phi(v) + tol over random ordered pairs
/// u <= v drawn around `around` (amplitude `spread`).
bool check_increasing(const ObstacleMap& map, const NodalFunction& around, double spread,
                      int trials, std::uint64_t seed = 0, double tol = 1e-9);

}  // namespace qvix
