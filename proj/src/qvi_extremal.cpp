#include "qvix/qvi_extremal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qvix {

std::string to_string(Extremal which) { return which == Extremal::Min ? "min" : "max"; }

NodalFunction default_supersolution(const EllipticOperator& A, const DualElement& f,
                                    const DualElement& d) {
  if ((d.values().array() < 0.0).any()) {
    throw InvalidArgument("default_supersolution requires a nonnegative direction");
  }
  return A.solve(f + d);
}

ViSolution vi_map(const EllipticOperator& A, const DualElement& f, const ObstacleMap& map,
                  const NodalFunction& u, const SolverOptions& opts) {
  return solve_vi(A, f, map.evaluate(u), opts);
}

bool check_subsolution(const EllipticOperator& A, const DualElement& f, const ObstacleMap& map,
                       const NodalFunction& u, double tol) {
  return leq(u, vi_map(A, f, map, u).u, tol * (1.0 + sup_norm(u)));
}

bool check_supersolution(const EllipticOperator& A, const DualElement& f, const ObstacleMap& map,
                         const NodalFunction& u, double tol) {
  return leq(vi_map(A, f, map, u).u, u, tol * (1.0 + sup_norm(u)));
}

double qvi_residual(const EllipticOperator& A, const DualElement& f, const NodalFunction& u,
                    const NodalFunction& phi_u) {
  const Eigen::VectorXd lambda = (f - A.apply(u)).values();
  double res = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    if (A.is_pinned(i)) continue;
    res = std::max(res, u[i] - phi_u[i]);
    res = std::max(res, -lambda[i]);
    res = std::max(res, std::abs(lambda[i] * (phi_u[i] - u[i])));
  }
  return res;
}

double qvi_residual(const EllipticOperator& A, const DualElement& f, const ObstacleMap& map,
                    const NodalFunction& u) {
  return qvi_residual(A, f, u, map.evaluate(u));
}

ExtremalRunReport iterate_extremal(Extremal which, const EllipticOperator& A,
                                   const DualElement& f, const ObstacleMap& map,
                                   const NodalFunction& start, const ExtremalOptions& opts) {
  ExtremalRunReport rep{.which = which,
                        .iterates = {start},
                        .history = {},
                        .solution = start,
                        .obstacle = map.evaluate(start),
                        .last_vi = std::nullopt};
  NodalFunction u = start;
  NodalFunction phi = rep.obstacle;
  double prev_step = 0.0;
  for (int n = 1; n <= opts.max_outer; ++n) {
    ViSolution vi = solve_vi(A, f, phi, opts.vi);
    if (opts.cross_check_oracle) {
      const ViSolution ref = oracle_vi(A, f, phi);
      rep.oracle_max_discrepancy =
          std::max(rep.oracle_max_discrepancy, sup_norm(ref.u - vi.u));
    }
    const NodalFunction& next = vi.u;
    const Eigen::VectorXd delta =
        which == Extremal::Min ? (next - u).values() : (u - next).values();
    IterationRecord rec;
    rec.iter = n;
    rec.min_node_delta = delta.minCoeff();
    if (rec.min_node_delta < -opts.monotone_tol) {
      rep.monotone = false;
      std::ostringstream msg;
      msg << to_string(which) << " iteration not monotone at step " << n << ": node moved by "
          << rec.min_node_delta << " against the expected direction";
      throw MonotonicityViolation(msg.str());
    }
    rec.step_vnorm = v_norm(next - u);
    phi = map.evaluate(next);
    rec.qvi_residual = qvi_residual(A, f, next, phi);
    rep.history.push_back(rec);
    rep.iterates.push_back(next);
    if (n > 1 && prev_step > 0.0) rep.tail_contraction = rec.step_vnorm / prev_step;
    prev_step = rec.step_vnorm;
    u = next;
    rep.last_vi = std::move(vi);
    rep.n_iters = n;
    if (rec.step_vnorm <= opts.tol_fp) {
      rep.converged = true;
      break;
    }
  }
  rep.solution = u;
  rep.obstacle = phi;
  rep.final_step_vnorm = rep.history.empty() ? 0.0 : rep.history.back().step_vnorm;
  rep.qvi_residual = rep.history.empty() ? qvi_residual(A, f, u, phi)
                                         : rep.history.back().qvi_residual;
  return rep;
}

ExtremalRunReport iterate_min(const EllipticOperator& A, const DualElement& f,
                              const ObstacleMap& map, const NodalFunction& start,
                              const ExtremalOptions& opts) {
  return iterate_extremal(Extremal::Min, A, f, map, start, opts);
}

ExtremalRunReport iterate_max(const EllipticOperator& A, const DualElement& f,
                              const ObstacleMap& map, const NodalFunction& start,
                              const ExtremalOptions& opts) {
  return iterate_extremal(Extremal::Max, A, f, map, start, opts);
}

bool comparison_in_f(const EllipticOperator& A, const DualElement& f, const DualElement& d,
                     double s, const ObstacleMap& map, const IntervalBracket& bracket,
                     const ExtremalOptions& opts, double tol) {
  if (!(s >= 0.0)) throw InvalidArgument("comparison_in_f requires s >= 0");
  const bool nonneg = (d.values().array() >= 0.0).all();
  const bool nonpos = (d.values().array() <= 0.0).all();
  if (!nonneg && !nonpos) throw InvalidArgument("comparison_in_f requires a signed direction");
  const DualElement fs = f + s * d;
  bool ok = true;
  if (nonneg) {
    const NodalFunction m = iterate_min(A, f, map, bracket.lower, opts).solution;
    const NodalFunction ms = iterate_min(A, fs, map, bracket.lower, opts).solution;
    ok = ok && leq(m, ms, tol);
  }
  if (nonpos) {
    const NodalFunction M = iterate_max(A, f, map, bracket.upper, opts).solution;
    const NodalFunction Ms = iterate_max(A, fs, map, bracket.upper, opts).solution;
    ok = ok && leq(Ms, M, tol);
  }
  return ok;
}

}  // namespace qvix
