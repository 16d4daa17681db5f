#pragma once

// Config-driven pipeline: bracket construction, extremal runs, optional
// sensitivity with difference-quotient validation, and the written report.

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "qvix/experiment_config.hpp"
#include "qvix/qvi_extremal.hpp"
#include "qvix/sensitivity.hpp"

namespace qvix {

struct RunOptions {
  /// Cross-check every VI solve against the enumeration oracle (n <= 14).
  bool force_oracle = false;
  /// Largest accepted solve_vi / oracle_vi discrepancy in oracle mode.
  double oracle_tol = 1e-9;
};

struct ExtremalOutcome {
  Extremal which = Extremal::Min;
  std::optional<ExtremalRunReport> run;
  std::optional<ActiveSetPartition> partition;  ///< classify_active at the solution
  std::optional<DualElement> lambda;            ///< f - A u at the solution
  std::optional<double> temperature_vnorm;      ///< thermoforming only
  std::string error;
};

struct SensitivityOutcome {
  Extremal which = Extremal::Min;
  std::optional<DerivativeReport> report;
  double homogeneity_error_2 = 0.0;   ///< |alpha(2d) - 2 alpha(d)|_V
  double homogeneity_error_10 = 0.0;  ///< |alpha(10d) - 10 alpha(d)|_V
  std::string error;
};

struct RunArtifacts {
  ExperimentConfig config;
  RunOptions options;

  double coercivity = 0.0;    ///< C_a
  double boundedness = 0.0;   ///< C_b
  double threshold = 0.0;     ///< C_a / (C_a + C_b)
  std::optional<double> lipschitz_estimate;
  std::optional<double> temperature_bound;  ///< C*, thermoforming only
  /// Thermoforming: min Phi_0 against 1 + K |f|_{V*} / C_a.
  std::optional<double> threshold_lhs;
  std::optional<double> threshold_rhs;

  bool lower_bracket_valid = false;
  bool upper_bracket_valid = false;

  std::vector<ExtremalOutcome> extremal;
  std::optional<SensitivityOutcome> sensitivity;

  /// Names of failed asserted invariants; empty means success.
  std::vector<std::string> failures;
  std::vector<std::string> warnings;

  bool ok() const { return failures.empty(); }
};

/// Homogeneity tolerance (V-norm) for alpha(c d) = c alpha(d).
inline constexpr double kHomogeneityTol = 1e-9;
/// Derivative orders below this are flagged on smooth instances.
inline constexpr double kMinFdOrder = 0.9;

RunArtifacts run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Writes solution_*.csv, history_*.csv, sensitivity_*.csv and summary.json
/// into `dir` (created if missing). Throws Error on I/O failure.
void emit_report(const RunArtifacts& artifacts, const std::string& dir);

nlohmann::json summary_json(const RunArtifacts& artifacts);

std::string solution_csv(const ExtremalOutcome& outcome);
std::string history_csv(const ExtremalOutcome& outcome);
std::string sensitivity_csv(const SensitivityOutcome& outcome);

}  // namespace qvix
