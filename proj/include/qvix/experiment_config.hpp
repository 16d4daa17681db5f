#pragma once

// JSON experiment description for the qvix runner.

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qvix/grid_fem.hpp"
#include "qvix/nodal_expression.hpp"
#include "qvix/obstacle_maps.hpp"

namespace qvix {

inline constexpr int kConfigVersion = 1;

/// Validation failure; the message starts with the offending field path.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : InvalidArgument(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class RunMode { Min, Max, Both };
enum class DirectionSign { Nonnegative, Nonpositive };

std::string to_string(RunMode mode);
std::string to_string(DirectionSign sign);

struct GridConfig {
  int n_nodes = 101;
  double a = 0.0;
  double b = 1.0;
  bool operator==(const GridConfig&) const = default;
};

struct OperatorConfig {
  double c = 1.0;
  BoundaryCondition bc = BoundaryCondition::Neumann;
  bool operator==(const OperatorConfig&) const = default;
};

struct MapConfig {
  MapKind kind = MapKind::PlateauPointwise;
  // plateau
  std::vector<double> levels;
  double eps = 0.25;
  // inverse_elliptic
  OperatorConfig inner;
  ScalarSource::Type source_type = ScalarSource::Type::Tanh;
  double source_scale = 1.0;
  // thermoforming
  double k = 1.0;
  double M = 1.0;
  double gamma = 0.1;
  NodalExpression mould;

  bool operator==(const MapConfig&) const = default;
};

struct DirectionConfig {
  NodalExpression value;
  DirectionSign sign = DirectionSign::Nonnegative;
  bool operator==(const DirectionConfig&) const = default;
};

struct SensitivityConfig {
  bool enabled = false;
  std::vector<double> s_list = {1e-1, 1e-2, 1e-3, 1e-4};
  std::optional<double> fd_tol;  ///< empty: 1e-3 (1 + |alpha|_V)
  bool operator==(const SensitivityConfig&) const = default;
};

struct ExperimentConfig {
  int version = kConfigVersion;
  GridConfig grid;
  OperatorConfig op;
  MapConfig map;
  NodalExpression forcing;
  DirectionConfig direction;
  std::optional<NodalExpression> bracket_lower;  ///< default: 0
  RunMode run = RunMode::Both;
  SensitivityConfig sensitivity;
  std::string output_dir = "qvix_out";
  std::uint64_t seed = 0;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates. Unknown fields, type errors and violated
/// invariants raise ConfigError naming the field path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Semantic checks that need the grid: direction sign against the tag and
/// the run mode, plateau ordering, mould/forcing finiteness.
void validate_config(const ExperimentConfig& config);

Grid make_grid(const ExperimentConfig& config);
EllipticOperator make_operator(const ExperimentConfig& config);
ObstacleMapHandle make_map(const ExperimentConfig& config);

}  // namespace qvix
