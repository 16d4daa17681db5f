#include "qvix/vi_core.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace qvix {

std::vector<int> ActiveSetPartition::indices(NodeClass c) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (classes[i] == c) out.push_back(i);
  }
  return out;
}

int ActiveSetPartition::count(NodeClass c) const {
  return static_cast<int>(std::count(classes.begin(), classes.end(), c));
}

std::string ActiveSetPartition::to_string() const {
  std::string s;
  s.reserve(classes.size());
  for (NodeClass c : classes) s.push_back(static_cast<char>(c));
  return s;
}

MixedConstraint MixedConstraint::upper(const NodalFunction& phi) {
  return MixedConstraint{std::vector<NodeConstraint>(phi.size(), NodeConstraint::Upper), phi};
}

ClassifyTolerances ClassifyTolerances::defaults(const DualElement& f, const NodalFunction& phi) {
  return ClassifyTolerances{1e-8 * (1.0 + sup_norm(phi)), 1e-8 * (1.0 + sup_norm(f))};
}

namespace {

void check_inputs(const EllipticOperator& A, const DualElement& f,
                  const MixedConstraint& constraint) {
  const Grid& g = A.grid();
  if (!(f.grid() == g) || !(constraint.bound.grid() == g)) throw InvalidArgument("grid mismatch");
  if (static_cast<int>(constraint.kinds.size()) != g.n_nodes()) {
    throw InvalidArgument("constraint kinds do not match grid");
  }
  for (int i = 0; i < g.n_nodes(); ++i) {
    if (!A.is_pinned(i)) continue;
    const double b = constraint.bound[i];
    const NodeConstraint k = constraint.kinds[i];
    if ((k == NodeConstraint::Upper && b < 0.0) || (k == NodeConstraint::Pinned && b != 0.0)) {
      throw InvalidArgument("constraint incompatible with homogeneous Dirichlet node " +
                            std::to_string(i));
    }
  }
}

/// Max absolute row sum of the nodal operator, used to scale stationarity.
double operator_row_norm(const EllipticOperator& A) {
  const Tridiagonal& m = A.matrix();
  const Grid& g = A.grid();
  double best = 0.0;
  for (int i = 0; i < g.n_nodes(); ++i) {
    double s = std::abs(m.diag(i));
    if (i > 0) s += std::abs(m.lower(i));
    if (i + 1 < g.n_nodes()) s += std::abs(m.upper(i));
    best = std::max(best, s / g.weight(i));
  }
  return best;
}

/// Solves A u = load on free rows with u = bound on the rows flagged active.
Eigen::VectorXd solve_restricted(const EllipticOperator& A, const Eigen::VectorXd& load,
                                 const Eigen::VectorXd& bound, const std::vector<bool>& active) {
  Tridiagonal sys = A.matrix();
  Eigen::VectorXd rhs = load;
  for (int i = 0; i < sys.size(); ++i) {
    if (!active[i] || A.is_pinned(i)) continue;
    sys.diag(i) = 1.0;
    sys.lower(i) = 0.0;
    sys.upper(i) = 0.0;
    rhs[i] = bound[i];
  }
  return sys.solve(rhs);
}

ViSolution finish(const EllipticOperator& A, const DualElement& f,
                  const MixedConstraint& constraint, Eigen::VectorXd u, Eigen::VectorXd lambda,
                  int iterations) {
  NodalFunction sol(A.grid(), std::move(u));
  ClassifyTolerances tol = ClassifyTolerances::defaults(f, constraint.bound);
  ActiveSetPartition partition = classify_active(A, f, sol, constraint.bound, tol);
  for (int i = 0; i < partition.size(); ++i) {
    if (constraint.kinds[i] == NodeConstraint::Free) partition.classes[i] = NodeClass::Inactive;
  }
  const double residual = kkt_residual(A, f, constraint, sol);
  return ViSolution{sol, DualElement(A.grid(), std::move(lambda)), std::move(partition),
                    iterations, residual};
}

}  // namespace

double kkt_residual(const EllipticOperator& A, const DualElement& f,
                    const MixedConstraint& constraint, const NodalFunction& u) {
  check_inputs(A, f, constraint);
  const Eigen::VectorXd r = (f - A.apply(u)).values();
  const double scale = 1.0 + sup_norm(f) + operator_row_norm(A) * sup_norm(u);
  double res = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    if (A.is_pinned(i)) {
      res = std::max(res, std::abs(u[i]));
      continue;
    }
    const double b = constraint.bound[i];
    switch (constraint.kinds[i]) {
      case NodeConstraint::Free:
        res = std::max(res, std::abs(r[i]) / scale);
        break;
      case NodeConstraint::Pinned:
        res = std::max(res, std::abs(u[i] - b));
        break;
      case NodeConstraint::Upper:
        // Natural residual |min(lambda, phi - u)| plus sign violations.
        res = std::max(res, std::max(0.0, u[i] - b));
        res = std::max(res, std::abs(std::min(r[i] / scale, b - u[i])));
        break;
    }
  }
  return res;
}

ViSolution solve_mixed_vi(const EllipticOperator& A, const DualElement& f,
                          const MixedConstraint& constraint, const SolverOptions& opts) {
  check_inputs(A, f, constraint);
  const int n = A.grid().n_nodes();
  const Eigen::VectorXd load = A.load(f);
  const Eigen::VectorXd& bound = constraint.bound.values();
  const Eigen::VectorXd w = A.grid().weights();

  std::vector<bool> active(n, false);
  for (int i = 0; i < n; ++i) active[i] = constraint.kinds[i] == NodeConstraint::Pinned;

  Eigen::VectorXd u;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
  for (int it = 1; it <= opts.max_iter; ++it) {
    u = solve_restricted(A, load, bound, active);
    const Eigen::VectorXd residual = (load - A.matrix().multiply(u)).cwiseQuotient(w);
    for (int i = 0; i < n; ++i) lambda[i] = (active[i] && !A.is_pinned(i)) ? residual[i] : 0.0;

    bool changed = false;
    for (int i = 0; i < n; ++i) {
      if (constraint.kinds[i] != NodeConstraint::Upper || A.is_pinned(i)) continue;
      const bool next = lambda[i] + opts.c_pdas * (u[i] - bound[i]) > 0.0;
      if (next != active[i]) {
        active[i] = next;
        changed = true;
      }
    }
    if (!changed) {
      ViSolution sol = finish(A, f, constraint, u, lambda, it);
      if (!(sol.residual <= opts.tol)) {
        std::ostringstream msg;
        msg << "active set settled after " << it << " iterations but KKT residual "
            << sol.residual << " exceeds " << opts.tol;
        throw ConvergenceError(msg.str());
      }
      return sol;
    }
  }
  std::ostringstream msg;
  msg << "primal-dual active set did not settle in " << opts.max_iter
      << " iterations; last KKT residual "
      << kkt_residual(A, f, constraint, NodalFunction(A.grid(), u));
  throw ConvergenceError(msg.str());
}

ViSolution solve_vi(const EllipticOperator& A, const DualElement& f, const NodalFunction& phi,
                    const SolverOptions& opts) {
  return solve_mixed_vi(A, f, MixedConstraint::upper(phi), opts);
}

ViSolution oracle_mixed_vi(const EllipticOperator& A, const DualElement& f,
                           const MixedConstraint& constraint) {
  check_inputs(A, f, constraint);
  const int n = A.grid().n_nodes();
  std::vector<int> free_choice;
  for (int i = 0; i < n; ++i) {
    if (constraint.kinds[i] == NodeConstraint::Upper && !A.is_pinned(i)) free_choice.push_back(i);
  }
  const int m = static_cast<int>(free_choice.size());
  if (m > 14) throw InvalidArgument("oracle limited to 14 enumerable nodes, got " + std::to_string(m));

  const Eigen::MatrixXd dense = A.matrix().dense();
  const Eigen::VectorXd load = A.load(f);
  const Eigen::VectorXd& bound = constraint.bound.values();
  const Eigen::VectorXd w = A.grid().weights();
  const double tol_feas = 1e-10 * (1.0 + bound.cwiseAbs().maxCoeff());

  std::optional<ViSolution> found;
  for (long mask = 0; mask < (1L << m); ++mask) {
    std::vector<bool> active(n, false);
    for (int i = 0; i < n; ++i) active[i] = constraint.kinds[i] == NodeConstraint::Pinned;
    for (int k = 0; k < m; ++k) {
      if (mask & (1L << k)) active[free_choice[k]] = true;
    }
    Eigen::MatrixXd sys = dense;
    Eigen::VectorXd rhs = load;
    for (int i = 0; i < n; ++i) {
      if (!active[i] || A.is_pinned(i)) continue;
      sys.row(i).setZero();
      sys(i, i) = 1.0;
      rhs[i] = bound[i];
    }
    const Eigen::VectorXd u = sys.fullPivLu().solve(rhs);
    const Eigen::VectorXd r = (load - dense * u).cwiseQuotient(w);
    const double tol_mult = 1e-10 * (1.0 + f.values().cwiseAbs().maxCoeff() +
                                     (dense.cwiseAbs().rowwise().sum().cwiseQuotient(w))
                                             .maxCoeff() * u.cwiseAbs().maxCoeff());
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      if (A.is_pinned(i) || constraint.kinds[i] != NodeConstraint::Upper) continue;
      if (u[i] > bound[i] + tol_feas) ok = false;
      if (active[i] && r[i] < -tol_mult) ok = false;
    }
    if (!ok) continue;
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) lambda[i] = (active[i] && !A.is_pinned(i)) ? r[i] : 0.0;
    if (!found) {
      found = finish(A, f, constraint, u, lambda, static_cast<int>(mask));
    } else if ((found->u.values() - u).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + u.cwiseAbs().maxCoeff())) {
      throw Error("oracle found two distinct complementary solutions; operator is not an M-matrix?");
    }
  }
  if (!found) throw Error("oracle found no feasible complementary active set");
  return *found;
}

ViSolution oracle_vi(const EllipticOperator& A, const DualElement& f, const NodalFunction& phi) {
  return oracle_mixed_vi(A, f, MixedConstraint::upper(phi));
}

ActiveSetPartition classify_active(const EllipticOperator& A, const DualElement& f,
                                   const NodalFunction& u, const NodalFunction& phi,
                                   const ClassifyTolerances& tol) {
  const DualElement lambda = f - A.apply(u);
  ActiveSetPartition p;
  p.classes.resize(u.size(), NodeClass::Inactive);
  for (int i = 0; i < u.size(); ++i) {
    if (A.is_pinned(i) || u[i] < phi[i] - tol.active) continue;
    p.classes[i] = lambda[i] > tol.multiplier ? NodeClass::Strict : NodeClass::Biactive;
  }
  return p;
}

ActiveSetPartition classify_active(const EllipticOperator& A, const DualElement& f,
                                   const NodalFunction& u, const NodalFunction& phi) {
  return classify_active(A, f, u, phi, ClassifyTolerances::defaults(f, phi));
}

bool check_comparison(const EllipticOperator& A, const DualElement& f1, const DualElement& f2,
                      const NodalFunction& phi1, const NodalFunction& phi2, double tol) {
  if (!((f2 - f1).values().array() >= 0.0).all()) {
    throw InvalidArgument("check_comparison requires f1 <= f2");
  }
  if (!leq(phi1, phi2)) throw InvalidArgument("check_comparison requires phi1 <= phi2");
  return leq(solve_vi(A, f1, phi1).u, solve_vi(A, f2, phi2).u, tol);
}

}  // namespace qvix
