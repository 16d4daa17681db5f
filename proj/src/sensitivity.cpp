#include "qvix/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qvix {

NodalFunction CriticalConeData::deriv_map(const NodalFunction& h) const {
  return map->derivative(base, h);
}

MixedConstraint CriticalConeData::constraint(const NodalFunction& w) const {
  MixedConstraint c{.kinds = std::vector<NodeConstraint>(base.size(), NodeConstraint::Free),
                    .bound = deriv_map(w)};
  for (int i = 0; i < base.size(); ++i) {
    switch (partition[i]) {
      case NodeClass::Inactive: c.kinds[i] = NodeConstraint::Free; break;
      case NodeClass::Biactive: c.kinds[i] = NodeConstraint::Upper; break;
      case NodeClass::Strict: c.kinds[i] = NodeConstraint::Pinned; break;
    }
  }
  return c;
}

CriticalConeData build_cone(const EllipticOperator& A, const DualElement& f,
                            ObstacleMapHandle map, const NodalFunction& base,
                            double residual_tol) {
  if (!map) throw InvalidArgument("build_cone needs an obstacle map");
  NodalFunction phi = map->evaluate(base);
  const double res = qvi_residual(A, f, base, phi);
  if (!(res <= residual_tol)) {
    std::ostringstream msg;
    msg << "base is not a converged solution: qvi_residual " << res << " > " << residual_tol;
    throw InvalidArgument(msg.str());
  }
  ActiveSetPartition partition = classify_active(A, f, base, phi);
  DualElement lambda = f - A.apply(base);
  return CriticalConeData{.base = base,
                          .obstacle = std::move(phi),
                          .partition = std::move(partition),
                          .lambda = std::move(lambda),
                          .map = std::move(map)};
}

void require_direction_sign(const DualElement& d, Extremal which) {
  if (which == Extremal::Min && (d.values().array() < 0.0).any()) {
    throw InvalidArgument("minimal-map derivative needs a direction d >= 0");
  }
  if (which == Extremal::Max && (d.values().array() > 0.0).any()) {
    throw InvalidArgument("maximal-map derivative needs a direction d <= 0");
  }
}

double derivative_qvi_residual(const EllipticOperator& A, const CriticalConeData& cone,
                               const DualElement& d, const NodalFunction& alpha) {
  return kkt_residual(A, d, cone.constraint(alpha), alpha);
}

namespace {

// Smallest nodal step in the expected direction.
double min_step(const NodalFunction& prev, const NodalFunction& next, Extremal which) {
  const Eigen::VectorXd delta =
      which == Extremal::Min ? (next - prev).values() : (prev - next).values();
  return delta.minCoeff();
}

}  // namespace

DerivativeReport solve_derivative_qvi(const EllipticOperator& A, const CriticalConeData& cone,
                                      const DualElement& d, Extremal which,
                                      const DerivativeOptions& opts) {
  require_direction_sign(d, which);
  DerivativeReport rep;
  rep.which = which;
  rep.monotone_tol = opts.monotone_tol;
  rep.n_biactive = cone.partition.count(NodeClass::Biactive);
  rep.n_strict = cone.partition.count(NodeClass::Strict);

  const NodalFunction zero = NodalFunction::zeros(A.grid());
  NodalFunction alpha = solve_mixed_vi(A, d, cone.constraint(zero), opts.vi).u;
  rep.alpha_iterates.push_back(alpha);
  for (int n = 1; n <= opts.max_iter; ++n) {
    NodalFunction next = solve_mixed_vi(A, d, cone.constraint(alpha), opts.vi).u;
    if (min_step(alpha, next, which) < -opts.monotone_tol) rep.monotone = false;
    const double step = v_norm(next - alpha);
    rep.alpha_iterates.push_back(next);
    alpha = std::move(next);
    rep.iterations = n;
    if (step <= opts.step_tol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged) {
    std::ostringstream msg;
    msg << "derivative iteration did not settle in " << opts.max_iter << " steps";
    throw ConvergenceError(msg.str());
  }
  rep.residual = derivative_qvi_residual(A, cone, d, alpha);
  if (!rep.monotone) rep.warnings.push_back("alpha iterates not monotone");
  if (rep.residual > opts.residual_tol) {
    std::ostringstream msg;
    msg << "derivative QVI residual " << rep.residual << " above " << opts.residual_tol;
    rep.warnings.push_back(msg.str());
  }
  rep.alpha = std::move(alpha);
  return rep;
}

bool alpha_monotonicity_check(const DerivativeReport& report) {
  for (size_t k = 1; k < report.alpha_iterates.size(); ++k) {
    if (min_step(report.alpha_iterates[k - 1], report.alpha_iterates[k], report.which) <
        -report.monotone_tol) {
      return false;
    }
  }
  return true;
}

DerivativeReport fd_validate(const EllipticOperator& A, const DualElement& f,
                             const DualElement& d, ObstacleMapHandle map,
                             const IntervalBracket& bracket, Extremal which,
                             const FdOptions& opts) {
  if (!map) throw InvalidArgument("fd_validate needs an obstacle map");
  require_direction_sign(d, which);
  if (opts.s_list.empty()) throw InvalidArgument("s_list is empty");
  for (size_t k = 0; k < opts.s_list.size(); ++k) {
    const double s = opts.s_list[k];
    if (!(s >= kMinFdStep)) throw InvalidArgument("s_list entries must be >= 1e-5");
    if (k > 0 && !(s < opts.s_list[k - 1])) {
      throw InvalidArgument("s_list must be strictly decreasing");
    }
  }

  const DualElement f_far = f + opts.s_list.front() * d;
  const bool bracket_ok = which == Extremal::Min
                              ? check_supersolution(A, f_far, *map, bracket.upper)
                              : check_subsolution(A, f_far, *map, bracket.lower);
  if (!bracket_ok) {
    throw InvalidArgument("bracket is not valid for f + s_max d");
  }

  const NodalFunction& start = which == Extremal::Min ? bracket.lower : bracket.upper;
  const ExtremalRunReport base_run = iterate_extremal(which, A, f, *map, start, opts.extremal);
  if (!base_run.accepted(opts.extremal.residual_tol)) {
    throw ConvergenceError("base extremal run not accepted (residual " +
                           std::to_string(base_run.qvi_residual) + ")");
  }
  const NodalFunction& base = base_run.solution;
  const CriticalConeData cone = build_cone(A, f, map, base, opts.extremal.residual_tol);
  DerivativeReport rep = solve_derivative_qvi(A, cone, d, which, opts.derivative);
  const NodalFunction& alpha = *rep.alpha;

  const double alpha_norm = v_norm(alpha);
  rep.fd_tol = opts.fd_tol >= 0.0 ? opts.fd_tol : 1e-3 * (1.0 + alpha_norm);
  rep.biactive_warning = rep.n_biactive > 0;
  if (rep.biactive_warning) {
    rep.warnings.push_back("base has " + std::to_string(rep.n_biactive) +
                           " biactive nodes; error table reported, not asserted");
  }

  // Perturbed solutions are accurate to about tol_fp in V, so the quotient
  // carries an error of order tol_fp / s regardless of the true remainder.
  const double noise = 10.0 * opts.extremal.tol_fp * (1.0 + v_norm(base));
  for (double s : opts.s_list) {
    const ExtremalRunReport run = iterate_extremal(which, A, f + s * d, *map, base, opts.extremal);
    if (!run.accepted(opts.extremal.residual_tol)) {
      rep.warnings.push_back("perturbed run at s = " + std::to_string(s) + " not accepted");
    }
    const NodalFunction quotient = (1.0 / s) * (run.solution - base);
    rep.fd_table.push_back(FdRow{.s = s,
                                 .error_vnorm = v_norm(quotient - alpha),
                                 .noise_floor = noise / s,
                                 .outer_iterations = run.n_iters});
  }

  for (size_t k = 1; k < rep.fd_table.size(); ++k) {
    const FdRow& r = rep.fd_table[k];
    if (r.error_vnorm > rep.fd_table[k - 1].error_vnorm && r.error_vnorm > r.noise_floor) {
      rep.error_decreasing = false;
    }
  }
  if (!rep.error_decreasing) rep.warnings.push_back("difference-quotient error not decreasing");

  std::vector<double> lx;
  std::vector<double> ly;
  for (const FdRow& r : rep.fd_table) {
    if (r.error_vnorm > r.noise_floor) {
      lx.push_back(std::log(r.s));
      ly.push_back(std::log(r.error_vnorm));
    }
  }
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i] / n;
      my += ly[i] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.observed_order = sxy / sxx;
  }

  const bool final_ok = rep.fd_table.back().error_vnorm <= rep.fd_tol;
  rep.fd_passed = final_ok && (rep.error_decreasing || rep.biactive_warning);
  return rep;
}

}  // namespace qvix
