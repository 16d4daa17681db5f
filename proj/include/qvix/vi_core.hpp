#pragma once

// Obstacle-type variational inequalities
//
//   find u <= phi :  <Au - f, u - v> <= 0  for all v <= phi,
//
// equivalently the complementarity system u <= phi, lambda = f - Au >= 0,
// lambda (phi - u) = 0 at every node.

#include <string>
#include <vector>

#include "qvix/grid_fem.hpp"

namespace qvix {

struct SolverOptions {
  /// KKT residual accepted on exit.
  double tol = 1e-10;
  /// Maximum number of active-set updates.
  int max_iter = 200;
  /// Scaling in the active-set prediction lambda + c (u - phi) > 0.
  double c_pdas = 1.0;
};

enum class NodeClass : char { Inactive = 'I', Biactive = 'B', Strict = 'S' };

/// Per-node classification of a VI solution. Strict and biactive nodes
/// together form the coincidence set.
struct ActiveSetPartition {
  std::vector<NodeClass> classes;

  int size() const { return static_cast<int>(classes.size()); }
  NodeClass operator[](int i) const { return classes[i]; }
  bool in_coincidence_set(int i) const { return classes[i] != NodeClass::Inactive; }
  std::vector<int> indices(NodeClass c) const;
  int count(NodeClass c) const;
  /// One character per node, e.g. "IIBSSI".
  std::string to_string() const;
};

/// How a node is constrained in a (generalised) obstacle problem.
enum class NodeConstraint {
  Free,    ///< no constraint, stationarity holds
  Upper,   ///< u_i <= bound_i with complementarity
  Pinned,  ///< u_i == bound_i, multiplier free
};

/// Constraint set mixing free, one-sided and pinned nodes. The plain obstacle
/// problem uses Upper everywhere; the derivative problems need all three.
struct MixedConstraint {
  std::vector<NodeConstraint> kinds;
  NodalFunction bound;

  static MixedConstraint upper(const NodalFunction& phi);
};

struct ViSolution {
  NodalFunction u;
  /// lambda = f - Au; set to exactly zero where the solver kept the node free.
  DualElement lambda;
  ActiveSetPartition partition;
  int iterations = 0;
  double residual = 0.0;
};

/// Scale-aware classification tolerances.
struct ClassifyTolerances {
  double active;
  double multiplier;

  static ClassifyTolerances defaults(const DualElement& f, const NodalFunction& phi);
};

/// Primal-dual active set method. Throws ConvergenceError (with the last
/// iterate's residual in the message) if the active set does not settle.
ViSolution solve_vi(const EllipticOperator& A, const DualElement& f, const NodalFunction& phi,
                    const SolverOptions& opts = {});

/// Same method for a mixed constraint set.
ViSolution solve_mixed_vi(const EllipticOperator& A, const DualElement& f,
                          const MixedConstraint& constraint, const SolverOptions& opts = {});

/// Brute-force reference: enumerate all 2^n active sets of the Upper nodes,
/// solve each equality system with a dense LU and keep the one that is
/// feasible and has a nonnegative multiplier. Limited to 14 enumerable nodes.
ViSolution oracle_vi(const EllipticOperator& A, const DualElement& f, const NodalFunction& phi);
ViSolution oracle_mixed_vi(const EllipticOperator& A, const DualElement& f,
                           const MixedConstraint& constraint);

ActiveSetPartition classify_active(const EllipticOperator& A, const DualElement& f,
                                   const NodalFunction& u, const NodalFunction& phi,
                                   const ClassifyTolerances& tol);
ActiveSetPartition classify_active(const EllipticOperator& A, const DualElement& f,
                                   const NodalFunction& u, const NodalFunction& phi);

/// max of feasibility violation, multiplier sign violation, complementarity
/// and (relative) stationarity on free nodes, for a candidate (u, lambda).
double kkt_residual(const EllipticOperator& A, const DualElement& f,
                    const MixedConstraint& constraint, const NodalFunction& u);

/// Checks S(f1, phi1) <= S(f2, phi2) nodally. Requires f1 <= f2 and
/// phi1 <= phi2; throws InvalidArgument otherwise.
bool check_comparison(const EllipticOperator& A, const DualElement& f1, const DualElement& f2,
                      const NodalFunction& phi1, const NodalFunction& phi2, double tol = 1e-10);

}  // namespace qvix
