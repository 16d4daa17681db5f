#include "qvix/obstacle_maps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace qvix {

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::PlateauPointwise:
      return "plateau";
    case MapKind::InverseElliptic:
      return "inverse_elliptic";
    case MapKind::Thermoforming:
      return "thermoforming";
  }
  return "unknown";
}

namespace smoothstep {

double value(double r) {
  if (r <= 0.0) return 0.0;
  if (r >= 1.0) return 1.0;
  return r * r * r * (10.0 + r * (-15.0 + 6.0 * r));
}

double derivative(double r) {
  if (r <= 0.0 || r >= 1.0) return 0.0;
  const double q = r * (1.0 - r);
  return 30.0 * q * q;
}

double second_derivative(double r) {
  if (r <= 0.0 || r >= 1.0) return 0.0;
  return 60.0 * r * (1.0 - r) * (1.0 - 2.0 * r);
}

double integral(double r) {
  if (r <= 0.0) return 0.0;
  if (r >= 1.0) return 0.5 + (r - 1.0);
  const double r4 = r * r * r * r;
  return r4 * (2.5 + r * (-3.0 + r));
}

}  // namespace smoothstep

NodalFunction evaluate(const ObstacleMap& map, const NodalFunction& u) { return map.evaluate(u); }

NodalFunction derivative_action(const ObstacleMap& map, const NodalFunction& u,
                                const NodalFunction& h) {
  return map.derivative(u, h);
}

// ---------------------------------------------------------------------------

PlateauMap::PlateauMap(PlateauParams params) : params_(std::move(params)) {
  const auto& y = params_.levels;
  if (y.empty()) throw InvalidArgument("plateau map needs at least one level");
  if (!(params_.eps > 0.0)) throw InvalidArgument("plateau half-width eps must be positive");
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (!(y[j] > 0.0)) throw InvalidArgument("plateau levels must be positive");
    if (j > 0 && !(y[j] - y[j - 1] > 2.0 * params_.eps)) {
      throw InvalidArgument("plateau levels must be separated by more than 2 eps");
    }
  }
}

double PlateauMap::scalar(double t) const {
  const auto& y = params_.levels;
  const double eps = params_.eps;
  if (t < y.front() - eps) {
    return y.front() - eps * smoothstep::integral((y.front() - eps - t) / eps);
  }
  if (t > y.back() + eps) {
    return y.back() + eps * smoothstep::integral((t - y.back() - eps) / eps);
  }
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (t <= y[j] + eps) {
      if (t >= y[j] - eps) return y[j];
      // t lies in the transition from y[j-1] to y[j].
      const double gap = y[j] - y[j - 1];
      const double r = (t - y[j - 1] - eps) / (gap - 2.0 * eps);
      return y[j - 1] + gap * smoothstep::value(r);
    }
  }
  return y.back();
}

double PlateauMap::scalar_derivative(double t) const {
  const auto& y = params_.levels;
  const double eps = params_.eps;
  if (t < y.front() - eps) return smoothstep::value((y.front() - eps - t) / eps);
  if (t > y.back() + eps) return smoothstep::value((t - y.back() - eps) / eps);
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (t <= y[j] + eps) {
      if (t >= y[j] - eps) return 0.0;
      const double gap = y[j] - y[j - 1];
      const double width = gap - 2.0 * eps;
      return gap * smoothstep::derivative((t - y[j - 1] - eps) / width) / width;
    }
  }
  return 0.0;
}

NodalFunction PlateauMap::evaluate(const NodalFunction& u) const {
  Eigen::VectorXd out(u.size());
  for (int i = 0; i < u.size(); ++i) out[i] = scalar(u[i]);
  return NodalFunction(u.grid(), std::move(out));
}

NodalFunction PlateauMap::derivative(const NodalFunction& u, const NodalFunction& h) const {
  u.require_same_grid(h);
  Eigen::VectorXd out(u.size());
  for (int i = 0; i < u.size(); ++i) out[i] = scalar_derivative(u[i]) * h[i];
  return NodalFunction(u.grid(), std::move(out));
}

// ---------------------------------------------------------------------------

double ScalarSource::value(double r) const {
  return type == Type::Linear ? scale * r : scale * std::tanh(r);
}

double ScalarSource::derivative(double r) const {
  if (type == Type::Linear) return scale;
  const double c = std::cosh(r);
  return scale / (c * c);
}

InverseEllipticMap::InverseEllipticMap(EllipticOperator L, ScalarSource g)
    : L_(std::move(L)), g_(g) {
  if (!(g_.scale >= 0.0)) throw InvalidArgument("source scale must be >= 0 (g increasing)");
}

NodalFunction InverseEllipticMap::evaluate(const NodalFunction& u) const {
  Eigen::VectorXd src = u.values().unaryExpr([this](double r) { return g_.value(r); });
  return L_.solve(DualElement(u.grid(), std::move(src)));
}

NodalFunction InverseEllipticMap::derivative(const NodalFunction& u,
                                             const NodalFunction& h) const {
  u.require_same_grid(h);
  Eigen::VectorXd src(u.size());
  for (int i = 0; i < u.size(); ++i) src[i] = g_.derivative(u[i]) * h[i];
  return L_.solve(DualElement(u.grid(), std::move(src)));
}

// ---------------------------------------------------------------------------

double heat_transfer(const ThermoParams& p, double gap) {
  return p.M * (1.0 - smoothstep::value(gap));
}

double heat_transfer_derivative(const ThermoParams& p, double gap) {
  return -p.M * smoothstep::derivative(gap);
}

ThermoformingMap::ThermoformingMap(ThermoParams params, NodalFunction mould)
    : params_(params),
      mould_(std::move(mould)),
      heat_(assemble_operator(mould_.grid(), params.k, BoundaryCondition::Neumann)) {
  if (!(params_.k > 0.0)) throw InvalidArgument("thermoforming k must be positive");
  if (!(params_.M > 0.0)) throw InvalidArgument("thermoforming M must be positive");
  if (!(params_.gamma > 0.0)) throw InvalidArgument("thermoforming gamma must be positive");
  if (!(mould_.values().array() > 0.0).all()) {
    throw InvalidArgument("mould shape must be positive");
  }
}

double ThermoformingMap::temperature_bound() const {
  return params_.M * std::sqrt(mould_.grid().length()) / std::min(1.0, params_.k);
}

namespace {

Eigen::VectorXd gap_of(const ThermoParams& p, const Eigen::VectorXd& T, const NodalFunction& mould,
                       const NodalFunction& u) {
  return p.gamma * T + mould.values() - u.values();
}

}  // namespace

TemperatureSolve ThermoformingMap::temperature(const NodalFunction& u) const {
  u.require_same_grid(mould_);
  const Grid& grid = u.grid();
  const Eigen::VectorXd w = grid.weights();
  const Tridiagonal& K = heat_.matrix();
  double row_norm = 0.0;
  for (int i = 0; i < grid.n_nodes(); ++i) {
    double s = std::abs(K.diag(i));
    if (i > 0) s += std::abs(K.lower(i));
    if (i + 1 < grid.n_nodes()) s += std::abs(K.upper(i));
    row_norm = std::max(row_norm, s / w[i]);
  }

  auto source = [&](const Eigen::VectorXd& T) -> Eigen::VectorXd {
    return gap_of(params_, T, mould_, u).unaryExpr(
        [this](double r) { return heat_transfer(params_, r); });
  };
  // Relative nodal residual of (k - Laplace) T - g(gamma T + Phi_0 - u).
  auto residual = [&](const Eigen::VectorXd& T) {
    const Eigen::VectorXd r = K.multiply(T).cwiseQuotient(w) - source(T);
    return r.cwiseAbs().maxCoeff() / (1.0 + params_.M + row_norm * T.cwiseAbs().maxCoeff());
  };

  TemperatureSolve out{NodalFunction::zeros(grid)};
  out.contraction = params_.gamma * smoothstep::kMaxSlope * params_.M / params_.k;
  constexpr double kResidualTol = 1e-11;

  Eigen::VectorXd T = Eigen::VectorXd::Zero(grid.n_nodes());
  bool done = false;
  if (out.contraction < 0.9) {
    for (int it = 1; it <= 2000; ++it) {
      Eigen::VectorXd next = K.solve(source(T).cwiseProduct(w));
      const double step = (next - T).cwiseAbs().maxCoeff();
      T = std::move(next);
      out.iterations = it;
      if (step <= 1e-15 * (1.0 + T.cwiseAbs().maxCoeff())) break;
    }
    done = residual(T) <= kResidualTol;
  }
  if (!done) {
    // Newton on F(T) = K T - W g(gap(T)); the Jacobian K - W gamma g'(gap) is
    // an M-matrix because g is decreasing.
    out.used_newton = true;
    double res = residual(T);
    for (int it = 1; it <= 100 && res > kResidualTol; ++it) {
      const Eigen::VectorXd gap = gap_of(params_, T, mould_, u);
      Tridiagonal J = K;
      for (int i = 0; i < grid.n_nodes(); ++i) {
        J.diag(i) -= w[i] * params_.gamma * heat_transfer_derivative(params_, gap[i]);
      }
      const Eigen::VectorXd F = K.multiply(T) - source(T).cwiseProduct(w);
      const Eigen::VectorXd step = J.solve(-F);
      double t = 1.0;
      Eigen::VectorXd trial = T + step;
      double trial_res = residual(trial);
      while (trial_res >= res && t > 1e-6) {
        t *= 0.5;
        trial = T + t * step;
        trial_res = residual(trial);
      }
      T = std::move(trial);
      res = trial_res;
      out.iterations += 1;
      if (t <= 1e-6) break;
    }
  }
  out.residual = residual(T);
  if (!(out.residual <= kResidualTol)) {
    std::ostringstream msg;
    msg << "temperature solve did not converge: residual " << out.residual
        << ", contraction factor " << out.contraction;
    throw ConvergenceError(msg.str());
  }
  out.T = NodalFunction(grid, std::move(T));
  const double bound = temperature_bound();
  if (v_norm(out.T) > bound + 1e-9) {
    std::ostringstream msg;
    msg << "temperature violates a priori bound: |T|_V = " << v_norm(out.T) << " > C* = "
        << bound;
    throw Error(msg.str());
  }
  return out;
}

TemperatureSolve thermo_temperature(const ThermoformingMap& map, const NodalFunction& u) {
  return map.temperature(u);
}

NodalFunction ThermoformingMap::evaluate(const NodalFunction& u) const {
  const TemperatureSolve ts = temperature(u);
  return mould_ + params_.gamma * ts.T;
}

NodalFunction ThermoformingMap::derivative(const NodalFunction& u, const NodalFunction& h) const {
  u.require_same_grid(h);
  const TemperatureSolve ts = temperature(u);
  const Grid& grid = u.grid();
  const Eigen::VectorXd w = grid.weights();
  const Eigen::VectorXd gap = gap_of(params_, ts.T.values(), mould_, u);
  // (k - Laplace) delta - g'(gap) gamma delta = g'(gap) h,  Phi'(u)(h) = -gamma delta.
  Tridiagonal J = heat_.matrix();
  Eigen::VectorXd rhs(grid.n_nodes());
  for (int i = 0; i < grid.n_nodes(); ++i) {
    const double gp = heat_transfer_derivative(params_, gap[i]);
    J.diag(i) -= w[i] * params_.gamma * gp;
    rhs[i] = w[i] * gp * h[i];
  }
  return NodalFunction(grid, -params_.gamma * J.solve(rhs));
}

// ---------------------------------------------------------------------------

namespace {

/// Random perturbation: smooth (few cosines) or rough (nodal noise), alternating.
Eigen::VectorXd random_direction(const Grid& grid, std::mt19937_64& rng, bool smooth) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(grid.n_nodes());
  if (smooth) {
    v.setZero();
    for (int k = 0; k < 4; ++k) {
      const double a = normal(rng);
      for (int i = 0; i < grid.n_nodes(); ++i) {
        v[i] += a * std::cos(k * std::numbers::pi * (grid.x(i) - grid.a()) / grid.length());
      }
    }
  } else {
    for (int i = 0; i < grid.n_nodes(); ++i) v[i] = normal(rng);
  }
  return v;
}

}  // namespace

double lipschitz_estimate(const ObstacleMap& map, const NodalFunction& center, double radius,
                          int n_samples, std::uint64_t seed) {
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  const Grid& grid = center.grid();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sample = [&](bool smooth) {
    NodalFunction dir(grid, random_direction(grid, rng, smooth));
    const double norm = v_norm(dir);
    return center + (radius * unit(rng) / norm) * dir;
  };
  double best = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const bool smooth = (k % 2) == 0;
    const NodalFunction u = sample(smooth);
    const NodalFunction v = sample(smooth);
    const double denom = v_norm(u - v);
    if (denom <= 1e-14 * (1.0 + v_norm(center))) continue;
    best = std::max(best, v_norm(map.evaluate(u) - map.evaluate(v)) / denom);
  }
  return best;
}

bool check_increasing(const ObstacleMap& map, const NodalFunction& around, double spread,
                      int trials, std::uint64_t seed, double tol) {
  const Grid& grid = around.grid();
  const NodalFunction phi0 = map.evaluate(NodalFunction::zeros(grid));
  if ((phi0.values().array() < -tol).any()) return false;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd base(grid.n_nodes());
    Eigen::VectorXd bump(grid.n_nodes());
    for (int i = 0; i < grid.n_nodes(); ++i) {
      base[i] = around[i] + spread * sym(rng);
      bump[i] = spread * pos(rng);
    }
    const NodalFunction u(grid, base);
    const NodalFunction v(grid, base + bump);
    if (!leq(map.evaluate(u), map.evaluate(v), tol)) return false;
  }
  return true;
}

}  // namespace qvix
