#include "qvix/experiment.hpp"

#include <spdlog/spdlog.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace qvix {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

bool runs(RunMode mode, Extremal which) {
  return mode == RunMode::Both || (mode == RunMode::Min) == (which == Extremal::Min);
}

Extremal sensitivity_target(const ExperimentConfig& c) {
  if (c.run == RunMode::Min) return Extremal::Min;
  if (c.run == RunMode::Max) return Extremal::Max;
  return c.direction.sign == DirectionSign::Nonnegative ? Extremal::Min : Extremal::Max;
}

void run_sensitivity(RunArtifacts& art, const EllipticOperator& A, const DualElement& f,
                     const DualElement& d, const ObstacleMapHandle& map,
                     const IntervalBracket& bracket, const ExtremalOptions& xopts) {
  const ExperimentConfig& cfg = art.config;
  SensitivityOutcome out;
  out.which = sensitivity_target(cfg);
  const std::string tag = "sensitivity_" + to_string(out.which);
  try {
    FdOptions fo;
    fo.s_list = cfg.sensitivity.s_list;
    fo.fd_tol = cfg.sensitivity.fd_tol.value_or(-1.0);
    fo.extremal = xopts;
    DerivativeReport rep = fd_validate(A, f, d, map, bracket, out.which, fo);

    // Positive homogeneity on the same cone.
    const ExtremalRunReport base =
        iterate_extremal(out.which, A, f, *map,
                         out.which == Extremal::Min ? bracket.lower : bracket.upper, xopts);
    const CriticalConeData cone = build_cone(A, f, map, base.solution, xopts.residual_tol);
    const NodalFunction& alpha = *rep.alpha;
    const NodalFunction a2 = *solve_derivative_qvi(A, cone, 2.0 * d, out.which).alpha;
    const NodalFunction a10 = *solve_derivative_qvi(A, cone, 10.0 * d, out.which).alpha;
    out.homogeneity_error_2 = v_norm(a2 - 2.0 * alpha);
    out.homogeneity_error_10 = v_norm(a10 - 10.0 * alpha);

    spdlog::info("{}: |alpha|_V = {:.3e}, {} iterations, residual {:.2e}", tag, v_norm(alpha),
                 rep.iterations, rep.residual);
    for (const FdRow& r : rep.fd_table) {
      spdlog::info("{}: s = {:.0e}  error = {:.3e}", tag, r.s, r.error_vnorm);
    }
    for (const std::string& w : rep.warnings) {
      spdlog::warn("{}: {}", tag, w);
      art.warnings.push_back(tag + ": " + w);
    }

    if (!rep.converged) art.failures.push_back(tag + ": alpha iteration did not converge");
    if (rep.residual > DerivativeOptions{}.residual_tol) {
      art.failures.push_back(tag + ": derivative QVI residual above tolerance");
    }
    if (!alpha_monotonicity_check(rep)) art.failures.push_back(tag + ": alpha not monotone");
    if (!rep.fd_passed) art.failures.push_back(tag + ": difference-quotient validation failed");
    if (!rep.biactive_warning && rep.observed_order && *rep.observed_order < kMinFdOrder) {
      art.failures.push_back(tag + ": observed FD order below 0.9");
    }
    if (out.homogeneity_error_2 > kHomogeneityTol || out.homogeneity_error_10 > kHomogeneityTol) {
      art.failures.push_back(tag + ": positive homogeneity violated");
    }
    out.report = std::move(rep);
  } catch (const Error& e) {
    out.error = e.what();
    art.failures.push_back(tag + ": " + out.error);
    spdlog::error("{}: {}", tag, out.error);
  }
  art.sensitivity = std::move(out);
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  validate_config(config);
  RunArtifacts art;
  art.config = config;
  art.options = options;
  if (options.force_oracle && config.grid.n_nodes > 14) {
    throw ConfigError("grid.n_nodes", "oracle mode needs at most 14 nodes");
  }

  const Grid grid = make_grid(config);
  const EllipticOperator A = make_operator(config);
  const ObstacleMapHandle map = make_map(config);
  const DualElement f(grid, config.forcing.evaluate(grid));
  const DualElement d(grid, config.direction.value.evaluate(grid));

  art.coercivity = A.coercivity();
  art.boundedness = A.boundedness();
  art.threshold = art.coercivity / (art.coercivity + art.boundedness);

  const auto* thermo = dynamic_cast<const ThermoformingMap*>(map.get());
  if (thermo != nullptr) {
    art.temperature_bound = thermo->temperature_bound();
    art.threshold_lhs = thermo->mould().values().minCoeff();
    art.threshold_rhs =
        1.0 + embedding_constant(grid, config.op.bc) * dual_norm(f, config.op.bc) / art.coercivity;
  }

  ExtremalOptions xopts;
  xopts.cross_check_oracle = options.force_oracle;

  const NodalFunction lower(grid, config.bracket_lower ? config.bracket_lower->evaluate(grid)
                                                       : Eigen::VectorXd::Zero(grid.n_nodes()));
  const DualElement d_plus(grid, d.values().cwiseMax(0.0));
  const NodalFunction upper = A.solve(f + d_plus);
  art.lower_bracket_valid = check_subsolution(A, f, *map, lower) && leq(lower, upper);
  art.upper_bracket_valid = check_supersolution(A, f, *map, upper);
  spdlog::info("bracket: lower {}, upper {}", art.lower_bracket_valid ? "valid" : "INVALID",
               art.upper_bracket_valid ? "valid" : "INVALID");
  const IntervalBracket bracket{.lower = lower, .upper = upper};

  for (Extremal which : {Extremal::Min, Extremal::Max}) {
    if (!runs(config.run, which)) continue;
    ExtremalOutcome out;
    out.which = which;
    const std::string tag = to_string(which);
    const bool valid = which == Extremal::Min ? art.lower_bracket_valid : art.upper_bracket_valid;
    if (!valid) {
      out.error = "start is not a " +
                  std::string(which == Extremal::Min ? "subsolution" : "supersolution");
      art.failures.push_back(tag + ": " + out.error);
      art.extremal.push_back(std::move(out));
      continue;
    }
    try {
      ExtremalRunReport rep = iterate_extremal(
          which, A, f, *map, which == Extremal::Min ? lower : upper, xopts);
      for (const IterationRecord& r : rep.history) {
        spdlog::debug("{} iter {}: step {:.3e} residual {:.3e}", tag, r.iter, r.step_vnorm,
                      r.qvi_residual);
      }
      spdlog::info("{}: {} iterations, residual {:.2e}, converged {}", tag, rep.n_iters,
                   rep.qvi_residual, rep.converged);
      if (!rep.converged) art.failures.push_back(tag + ": iteration did not converge");
      if (!rep.monotone) art.failures.push_back(tag + ": iterates not monotone");
      if (rep.qvi_residual > xopts.residual_tol) {
        art.failures.push_back(tag + ": qvi_residual above tolerance");
      }
      if (options.force_oracle && rep.oracle_max_discrepancy > options.oracle_tol) {
        art.failures.push_back(tag + ": oracle discrepancy above tolerance");
      }
      out.partition = classify_active(A, f, rep.solution, rep.obstacle);
      out.lambda = f - A.apply(rep.solution);
      if (thermo != nullptr) {
        out.temperature_vnorm = v_norm(thermo->temperature(rep.solution).T);
        if (*out.temperature_vnorm > *art.temperature_bound + 1e-9) {
          art.failures.push_back(tag + ": temperature a priori bound violated");
        }
      }
      out.run = std::move(rep);
    } catch (const Error& e) {
      out.error = e.what();
      art.failures.push_back(tag + ": " + out.error);
      spdlog::error("{}: {}", tag, out.error);
    }
    art.extremal.push_back(std::move(out));
  }

  try {
    const ExtremalOutcome* first = nullptr;
    for (const auto& o : art.extremal) {
      if (o.run && first == nullptr) first = &o;
    }
    const NodalFunction& center = first != nullptr ? first->run->solution : lower;
    art.lipschitz_estimate = lipschitz_estimate(*map, center, 0.5, 24, config.seed);
  } catch (const Error& e) {
    art.warnings.push_back(std::string("lipschitz estimate: ") + e.what());
  }

  if (config.sensitivity.enabled) {
    const Extremal target = sensitivity_target(config);
    const bool start_ok =
        target == Extremal::Min ? art.lower_bracket_valid : art.upper_bracket_valid;
    if (start_ok) {
      run_sensitivity(art, A, f, d, map, bracket, xopts);
    } else {
      art.failures.push_back("sensitivity: no valid start for the base run");
    }
  }

  if (art.ok()) {
    spdlog::info("all checks passed");
  } else {
    for (const std::string& msg : art.failures) spdlog::error("FAILED {}", msg);
  }
  return art;
}

std::string solution_csv(const ExtremalOutcome& out) {
  std::string s = "x,u,phi_u,lambda,class\n";
  if (!out.run) return s;
  const ExtremalRunReport& r = *out.run;
  const Grid& g = r.solution.grid();
  for (int i = 0; i < g.n_nodes(); ++i) {
    s += num(g.x(i)) + "," + num(r.solution[i]) + "," + num(r.obstacle[i]) + "," +
         num((*out.lambda)[i]) + "," + static_cast<char>((*out.partition)[i]) + "\n";
  }
  return s;
}

std::string history_csv(const ExtremalOutcome& out) {
  std::string s = "iter,step_vnorm,qvi_residual,min_node_delta\n";
  if (!out.run) return s;
  for (const IterationRecord& r : out.run->history) {
    s += std::to_string(r.iter) + "," + num(r.step_vnorm) + "," + num(r.qvi_residual) + "," +
         num(r.min_node_delta) + "\n";
  }
  return s;
}

std::string sensitivity_csv(const SensitivityOutcome& out) {
  std::string s = "s,quotient_error_vnorm\n";
  if (!out.report) return s;
  for (const FdRow& r : out.report->fd_table) s += num(r.s) + "," + num(r.error_vnorm) + "\n";
  return s;
}

nlohmann::json summary_json(const RunArtifacts& art) {
  nlohmann::json j;
  j["config"] = to_json(art.config);
  j["oracle_mode"] = art.options.force_oracle;
  j["constants"] = {{"C_a", art.coercivity},
                    {"C_b", art.boundedness},
                    {"threshold", art.threshold},
                    {"C_phi_estimate", opt(art.lipschitz_estimate)}};
  j["bracket"] = {{"lower_valid", art.lower_bracket_valid},
                  {"upper_valid", art.upper_bracket_valid}};
  if (art.temperature_bound) {
    j["thermoforming"] = {{"temperature_bound", *art.temperature_bound},
                          {"lipschitz_threshold",
                           {{"min_mould", *art.threshold_lhs},
                            {"rhs", *art.threshold_rhs},
                            {"holds", *art.threshold_lhs > *art.threshold_rhs}}}};
  }
  nlohmann::json runs = nlohmann::json::object();
  for (const ExtremalOutcome& o : art.extremal) {
    nlohmann::json r;
    if (o.run) {
      const ExtremalRunReport& rep = *o.run;
      r["iterations"] = rep.n_iters;
      r["converged"] = rep.converged;
      r["monotone"] = rep.monotone;
      r["qvi_residual"] = rep.qvi_residual;
      r["final_step_vnorm"] = rep.final_step_vnorm;
      r["tail_contraction"] = rep.tail_contraction;
      r["solution_vnorm"] = v_norm(rep.solution);
      r["solution_min"] = rep.solution.values().minCoeff();
      r["solution_max"] = rep.solution.values().maxCoeff();
      r["partition"] = {{"inactive", o.partition->count(NodeClass::Inactive)},
                        {"biactive", o.partition->count(NodeClass::Biactive)},
                        {"strict", o.partition->count(NodeClass::Strict)}};
      if (art.options.force_oracle) r["oracle_max_discrepancy"] = rep.oracle_max_discrepancy;
      if (o.temperature_vnorm) r["temperature_vnorm"] = *o.temperature_vnorm;
    }
    r["error"] = o.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(o.error);
    runs[to_string(o.which)] = r;
  }
  j["runs"] = runs;
  if (art.sensitivity) {
    const SensitivityOutcome& s = *art.sensitivity;
    nlohmann::json sj;
    sj["which"] = to_string(s.which);
    if (s.report) {
      const DerivativeReport& rep = *s.report;
      sj["alpha_vnorm"] = v_norm(*rep.alpha);
      sj["iterations"] = rep.iterations;
      sj["residual"] = rep.residual;
      sj["monotone"] = alpha_monotonicity_check(rep);
      sj["biactive_nodes"] = rep.n_biactive;
      sj["strict_nodes"] = rep.n_strict;
      nlohmann::json table = nlohmann::json::array();
      for (const FdRow& r : rep.fd_table) {
        table.push_back({{"s", r.s},
                         {"error_vnorm", r.error_vnorm},
                         {"noise_floor", r.noise_floor},
                         {"outer_iterations", r.outer_iterations}});
      }
      sj["fd_table"] = table;
      sj["observed_order"] = opt(rep.observed_order);
      sj["error_decreasing"] = rep.error_decreasing;
      sj["biactive_warning"] = rep.biactive_warning;
      sj["fd_tol"] = rep.fd_tol;
      sj["fd_passed"] = rep.fd_passed;
      sj["homogeneity"] = {{"error_2", s.homogeneity_error_2},
                           {"error_10", s.homogeneity_error_10},
                           {"tol", kHomogeneityTol}};
    }
    sj["error"] = s.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(s.error);
    j["sensitivity"] = sj;
  }
  j["warnings"] = art.warnings;
  j["failures"] = art.failures;
  j["ok"] = art.ok();
  return j;
}

void emit_report(const RunArtifacts& art, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& content) {
    const fs::path p = fs::path(dir) / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw Error("failed to write " + p.string());
    spdlog::debug("wrote {}", p.string());
  };
  for (const ExtremalOutcome& o : art.extremal) {
    const std::string tag = to_string(o.which);
    write("solution_" + tag + ".csv", solution_csv(o));
    write("history_" + tag + ".csv", history_csv(o));
  }
  if (art.sensitivity) {
    write("sensitivity_" + to_string(art.sensitivity->which) + ".csv",
          sensitivity_csv(*art.sensitivity));
  }
  write("summary.json", summary_json(art).dump(2) + "\n");
}

}  // namespace qvix
