#pragma once

// Directional derivatives of the minimal map f -> m(f) (directions d >= 0) and
// the maximal map f -> M(f) (directions d <= 0).
//
// The derivative alpha solves a QVI over the critical cone at the base
// solution; it is computed as the monotone limit of VIs over shifted cones
// and checked against difference quotients (m(f + s d) - m(f)) / s.

#include <optional>
#include <string>
#include <vector>

#include "qvix/obstacle_maps.hpp"
#include "qvix/qvi_extremal.hpp"
#include "qvix/vi_core.hpp"

namespace qvix {

struct CriticalConeData {
  NodalFunction base;
  NodalFunction obstacle;  ///< Phi(base)
  ActiveSetPartition partition;
  DualElement lambda;  ///< f - A base
  ObstacleMapHandle map;

  /// h -> Phi'(base)(h)
  NodalFunction deriv_map(const NodalFunction& h) const;

  /// The cone shifted by Phi'(base)(w): free on inactive nodes, v <= shift on
  /// biactive nodes, v == shift on strict nodes.
  MixedConstraint constraint(const NodalFunction& w) const;
};

/// Classifies the base solution. Throws InvalidArgument if the base is not a
/// converged solution (qvi_residual above residual_tol).
CriticalConeData build_cone(const EllipticOperator& A, const DualElement& f,
                            ObstacleMapHandle map, const NodalFunction& base,
                            double residual_tol = 1e-8);

struct DerivativeOptions {
  double step_tol = 1e-11;      ///< stop when |alpha_n - alpha_{n-1}|_V <= step_tol
  double residual_tol = 1e-9;   ///< derivative QVI residual accepted on exit
  double monotone_tol = 1e-10;
  int max_iter = 500;
  SolverOptions vi;
};

struct FdRow {
  double s = 0.0;
  double error_vnorm = 0.0;  ///< |(u_s - base)/s - alpha|_V
  double noise_floor = 0.0;  ///< solver-accuracy floor for this s
  int outer_iterations = 0;
};

struct DerivativeReport {
  Extremal which = Extremal::Min;
  std::optional<NodalFunction> alpha;
  std::vector<NodalFunction> alpha_iterates;
  bool monotone = true;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  double monotone_tol = 1e-10;

  std::vector<FdRow> fd_table;
  /// Least-squares slope of log error against log s over the rows above
  /// their noise floor; empty when fewer than two rows qualify.
  std::optional<double> observed_order;
  bool error_decreasing = true;
  bool biactive_warning = false;
  double fd_tol = 0.0;
  bool fd_passed = false;
  int n_biactive = 0;
  int n_strict = 0;
  std::vector<std::string> warnings;
};

/// Derivative QVI residual of alpha: KKT residual of the VI over the cone
/// shifted by alpha itself.
double derivative_qvi_residual(const EllipticOperator& A, const CriticalConeData& cone,
                               const DualElement& d, const NodalFunction& alpha);

/// alpha_0 solves the VI over the cone shifted by 0, alpha_n the VI over the
/// cone shifted by alpha_{n-1}. Throws InvalidArgument if the sign of d does
/// not match `which` and ConvergenceError if the iteration does not settle.
DerivativeReport solve_derivative_qvi(const EllipticOperator& A, const CriticalConeData& cone,
                                      const DualElement& d, Extremal which,
                                      const DerivativeOptions& opts = {});

struct FdOptions {
  std::vector<double> s_list = {1e-1, 1e-2, 1e-3, 1e-4};
  /// Final-error tolerance; negative means 1e-3 (1 + |alpha|_V).
  double fd_tol = -1.0;
  ExtremalOptions extremal;
  DerivativeOptions derivative;
};

/// Smallest step accepted in s_list.
inline constexpr double kMinFdStep = 1e-5;

/// Computes the base extremal solution from the bracket, alpha, and the
/// difference quotients with the perturbed runs warm-started at the base.
DerivativeReport fd_validate(const EllipticOperator& A, const DualElement& f,
                             const DualElement& d, ObstacleMapHandle map,
                             const IntervalBracket& bracket, Extremal which,
                             const FdOptions& opts = {});

/// True iff the alpha iterates are nodally ordered (increasing for min,
/// decreasing for max) up to report.monotone_tol.
bool alpha_monotonicity_check(const DerivativeReport& report);

/// Throws InvalidArgument unless d >= 0 (min) or d <= 0 (max).
void require_direction_sign(const DualElement& d, Extremal which);

}  // namespace qvix
