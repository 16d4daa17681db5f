#pragma once

// Minimal and maximal solutions of the implicit obstacle problem
//
//   find u <= Phi(u) :  <Au - f, u - v> <= 0  for all v <= Phi(u)
//
// on an ordered interval [lower, upper], computed as monotone limits of
// u_n = S(f, Phi(u_{n-1})) started at a sub- or supersolution.

#include <optional>
#include <vector>

#include "qvix/grid_fem.hpp"
#include "qvix/obstacle_maps.hpp"
#include "qvix/vi_core.hpp"

namespace qvix {

enum class Extremal { Min, Max };

std::string to_string(Extremal which);

struct IntervalBracket {
  NodalFunction lower;  ///< subsolution: lower <= S(f, Phi(lower))
  NodalFunction upper;  ///< supersolution: upper >= S(f, Phi(upper))
};

struct ExtremalOptions {
  double tol_fp = 1e-10;        ///< stop when |u_n - u_{n-1}|_V <= tol_fp
  int max_outer = 500;
  double monotone_tol = 1e-10;  ///< allowed nodal step against the expected direction
  double residual_tol = 1e-8;   ///< qvi_residual accepted on exit
  SolverOptions vi;
  /// Re-solve every VI with oracle_vi and record the largest discrepancy.
  bool cross_check_oracle = false;
};

struct IterationRecord {
  int iter = 0;
  double step_vnorm = 0.0;
  double qvi_residual = 0.0;
  /// Smallest nodal step in the expected direction: min_i (u_n - u_{n-1})_i
  /// for the minimal run and min_i (u_{n-1} - u_n)_i for the maximal run.
  double min_node_delta = 0.0;
};

struct ExtremalRunReport {
  Extremal which = Extremal::Min;
  std::vector<NodalFunction> iterates;  ///< u_0 (the start), u_1, ..., u_n
  std::vector<IterationRecord> history;
  NodalFunction solution;
  NodalFunction obstacle;  ///< Phi(solution)
  std::optional<ViSolution> last_vi;  ///< final VI solve (multiplier, partition)
  bool monotone = true;
  bool converged = false;
  int n_iters = 0;
  double final_step_vnorm = 0.0;
  double qvi_residual = 0.0;
  /// Ratio of the last two step norms; an estimate of the tail contraction.
  double tail_contraction = 0.0;
  double oracle_max_discrepancy = 0.0;

  /// Converged, monotone and residual within tolerance.
  bool accepted(double residual_tol = 1e-8) const {
    return converged && monotone && qvi_residual <= residual_tol;
  }
};

/// A^{-1}(f + d) for d >= 0; a supersolution for S(f + s d, .) for s in [0, 1].
NodalFunction default_supersolution(const EllipticOperator& A, const DualElement& f,
                                    const DualElement& d);

/// S(f, Phi(u)) := solve_vi(A, f, Phi(u)).
ViSolution vi_map(const EllipticOperator& A, const DualElement& f, const ObstacleMap& map,
                  const NodalFunction& u, const SolverOptions& opts = {});

bool check_subsolution(const EllipticOperator& A, const DualElement& f, const ObstacleMap& map,
                       const NodalFunction& u, double tol = 1e-9);
bool check_supersolution(const EllipticOperator& A, const DualElement& f, const ObstacleMap& map,
                         const NodalFunction& u, double tol = 1e-9);

/// Increasing iteration from a subsolution. Throws MonotonicityViolation if
/// an iterate decreases by more than opts.monotone_tol at some node; a run
/// that exhausts max_outer is returned with converged = false.
ExtremalRunReport iterate_min(const EllipticOperator& A, const DualElement& f,
                              const ObstacleMap& map, const NodalFunction& start,
                              const ExtremalOptions& opts = {});

/// Decreasing iteration from a supersolution; same contract as iterate_min.
ExtremalRunReport iterate_max(const EllipticOperator& A, const DualElement& f,
                              const ObstacleMap& map, const NodalFunction& start,
                              const ExtremalOptions& opts = {});

ExtremalRunReport iterate_extremal(Extremal which, const EllipticOperator& A,
                                   const DualElement& f, const ObstacleMap& map,
                                   const NodalFunction& start, const ExtremalOptions& opts = {});

/// max of |(u - Phi(u))^+|_inf, |lambda^-|_inf and complementarity
/// max_i |lambda_i (Phi(u)_i - u_i)| with lambda = f - Au.
double qvi_residual(const EllipticOperator& A, const DualElement& f, const ObstacleMap& map,
                    const NodalFunction& u);
/// Same, with Phi(u) already evaluated.
double qvi_residual(const EllipticOperator& A, const DualElement& f, const NodalFunction& u,
                    const NodalFunction& phi_u);

/// For d >= 0 checks m(f + s d) >= m(f); for d <= 0 checks M(f) >= M(f + s d).
/// A zero direction checks both. Mixed-sign directions are rejected.
bool comparison_in_f(const EllipticOperator& A, const DualElement& f, const DualElement& d,
                     double s, const ObstacleMap& map, const IntervalBracket& bracket,
                     const ExtremalOptions& opts = {}, double tol = 1e-10);

}  // namespace qvix
