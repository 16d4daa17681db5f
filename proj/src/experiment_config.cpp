#include "qvix/experiment_config.hpp"

#include <fstream>
#include <sstream>

#include "json_fields.hpp"

namespace qvix {

using detail::allow_only;
using detail::field;
using detail::join;
using detail::number;
using detail::text;

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Min: return "min";
    case RunMode::Max: return "max";
    case RunMode::Both: return "both";
  }
  return "both";
}

std::string to_string(DirectionSign sign) {
  return sign == DirectionSign::Nonnegative ? "nonnegative" : "nonpositive";
}

namespace {

int integer(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<int>();
}

BoundaryCondition parse_bc(const nlohmann::json& j, const std::string& path) {
  try {
    return parse_boundary_condition(text(j, path));
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
}

OperatorConfig parse_operator(const nlohmann::json& j, const std::string& path) {
  allow_only(j, path, {"c", "bc"});
  OperatorConfig op;
  op.c = number(field(j, path, "c"), join(path, "c"));
  if (j.contains("bc")) op.bc = parse_bc(j.at("bc"), join(path, "bc"));
  if (op.c < 0.0) throw ConfigError(join(path, "c"), "must be >= 0");
  return op;
}

MapConfig parse_map(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const std::string type = text(field(j, path, "type"), join(path, "type"));
  MapConfig m;
  if (type == "plateau") {
    allow_only(j, path, {"type", "levels", "eps"});
    m.kind = MapKind::PlateauPointwise;
    const auto& lv = field(j, path, "levels");
    if (!lv.is_array() || lv.empty()) {
      throw ConfigError(join(path, "levels"), "expected a nonempty array");
    }
    for (size_t k = 0; k < lv.size(); ++k) {
      m.levels.push_back(number(lv[k], join(path, "levels[" + std::to_string(k) + "]")));
    }
    if (j.contains("eps")) m.eps = number(j.at("eps"), join(path, "eps"));
  } else if (type == "inverse_elliptic") {
    allow_only(j, path, {"type", "operator", "source"});
    m.kind = MapKind::InverseElliptic;
    m.inner = parse_operator(field(j, path, "operator"), join(path, "operator"));
    const std::string sp = join(path, "source");
    const auto& src = field(j, path, "source");
    allow_only(src, sp, {"type", "scale"});
    const std::string st = text(field(src, sp, "type"), join(sp, "type"));
    if (st == "linear") {
      m.source_type = ScalarSource::Type::Linear;
    } else if (st == "tanh") {
      m.source_type = ScalarSource::Type::Tanh;
    } else {
      throw ConfigError(join(sp, "type"), "expected 'linear' or 'tanh'");
    }
    if (src.contains("scale")) m.source_scale = number(src.at("scale"), join(sp, "scale"));
  } else if (type == "thermoforming") {
    allow_only(j, path, {"type", "k", "M", "gamma", "mould"});
    m.kind = MapKind::Thermoforming;
    m.k = number(field(j, path, "k"), join(path, "k"));
    m.M = number(field(j, path, "M"), join(path, "M"));
    m.gamma = number(field(j, path, "gamma"), join(path, "gamma"));
    m.mould = parse_expression(field(j, path, "mould"), join(path, "mould"));
  } else {
    throw ConfigError(join(path, "type"),
                      "expected 'plateau', 'inverse_elliptic' or 'thermoforming'");
  }
  return m;
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
  allow_only(j, "", {"version", "grid", "operator", "map", "forcing", "direction", "bracket",
                     "run", "sensitivity", "output_dir", "seed"});
  ExperimentConfig c;
  c.version = integer(field(j, "", "version"), "version");
  if (c.version != kConfigVersion) {
    throw ConfigError("version", "unsupported version " + std::to_string(c.version));
  }

  const auto& g = field(j, "", "grid");
  allow_only(g, "grid", {"n_nodes", "interval"});
  c.grid.n_nodes = integer(field(g, "grid", "n_nodes"), "grid.n_nodes");
  if (c.grid.n_nodes < 2) throw ConfigError("grid.n_nodes", "must be >= 2");
  if (g.contains("interval")) {
    const auto& iv = g.at("interval");
    if (!iv.is_array() || iv.size() != 2) {
      throw ConfigError("grid.interval", "expected [a, b]");
    }
    c.grid.a = number(iv[0], "grid.interval[0]");
    c.grid.b = number(iv[1], "grid.interval[1]");
    if (!(c.grid.b > c.grid.a)) throw ConfigError("grid.interval", "need a < b");
  }

  c.op = parse_operator(field(j, "", "operator"), "operator");
  c.map = parse_map(field(j, "", "map"), "map");
  c.forcing = parse_expression(field(j, "", "forcing"), "forcing");

  const auto& d = field(j, "", "direction");
  allow_only(d, "direction", {"value", "sign"});
  c.direction.value = parse_expression(field(d, "direction", "value"), "direction.value");
  const std::string sign = text(field(d, "direction", "sign"), "direction.sign");
  if (sign == "nonnegative") {
    c.direction.sign = DirectionSign::Nonnegative;
  } else if (sign == "nonpositive") {
    c.direction.sign = DirectionSign::Nonpositive;
  } else {
    throw ConfigError("direction.sign", "expected 'nonnegative' or 'nonpositive'");
  }

  if (j.contains("bracket")) {
    const auto& b = j.at("bracket");
    allow_only(b, "bracket", {"lower"});
    if (b.contains("lower")) c.bracket_lower = parse_expression(b.at("lower"), "bracket.lower");
  }

  if (j.contains("run")) {
    const std::string run = text(j.at("run"), "run");
    if (run == "min") {
      c.run = RunMode::Min;
    } else if (run == "max") {
      c.run = RunMode::Max;
    } else if (run == "both") {
      c.run = RunMode::Both;
    } else {
      throw ConfigError("run", "expected 'min', 'max' or 'both'");
    }
  }

  if (j.contains("sensitivity")) {
    const auto& s = j.at("sensitivity");
    allow_only(s, "sensitivity", {"enabled", "s_list", "fd_tol"});
    const auto& en = field(s, "sensitivity", "enabled");
    if (!en.is_boolean()) throw ConfigError("sensitivity.enabled", "expected a boolean");
    c.sensitivity.enabled = en.get<bool>();
    if (s.contains("s_list")) {
      const auto& sl = s.at("s_list");
      if (!sl.is_array() || sl.empty()) {
        throw ConfigError("sensitivity.s_list", "expected a nonempty array");
      }
      c.sensitivity.s_list.clear();
      for (size_t k = 0; k < sl.size(); ++k) {
        c.sensitivity.s_list.push_back(
            number(sl[k], "sensitivity.s_list[" + std::to_string(k) + "]"));
      }
    }
    if (s.contains("fd_tol") && !s.at("fd_tol").is_null()) {
      c.sensitivity.fd_tol = number(s.at("fd_tol"), "sensitivity.fd_tol");
    }
  }

  if (j.contains("output_dir")) c.output_dir = text(j.at("output_dir"), "output_dir");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) {
      throw ConfigError("seed", "expected a nonnegative integer");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  }

  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("(file)", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["version"] = c.version;
  j["grid"] = {{"n_nodes", c.grid.n_nodes}, {"interval", {c.grid.a, c.grid.b}}};
  j["operator"] = {{"c", c.op.c}, {"bc", to_string(c.op.bc)}};
  nlohmann::json m;
  m["type"] = to_string(c.map.kind);
  switch (c.map.kind) {
    case MapKind::PlateauPointwise:
      m["levels"] = c.map.levels;
      m["eps"] = c.map.eps;
      break;
    case MapKind::InverseElliptic:
      m["operator"] = {{"c", c.map.inner.c}, {"bc", to_string(c.map.inner.bc)}};
      m["source"] = {
          {"type", c.map.source_type == ScalarSource::Type::Linear ? "linear" : "tanh"},
          {"scale", c.map.source_scale}};
      break;
    case MapKind::Thermoforming:
      m["k"] = c.map.k;
      m["M"] = c.map.M;
      m["gamma"] = c.map.gamma;
      m["mould"] = to_json(c.map.mould);
      break;
  }
  j["map"] = m;
  j["forcing"] = to_json(c.forcing);
  j["direction"] = {{"value", to_json(c.direction.value)}, {"sign", to_string(c.direction.sign)}};
  if (c.bracket_lower) j["bracket"] = {{"lower", to_json(*c.bracket_lower)}};
  j["run"] = to_string(c.run);
  j["sensitivity"] = {{"enabled", c.sensitivity.enabled},
                      {"s_list", c.sensitivity.s_list},
                      {"fd_tol", c.sensitivity.fd_tol ? nlohmann::json(*c.sensitivity.fd_tol)
                                                      : nlohmann::json(nullptr)}};
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j;
}

void validate_config(const ExperimentConfig& c) {
  Grid grid(c.grid.n_nodes, c.grid.a, c.grid.b);
  try {
    assemble_operator(grid, c.op.c, c.op.bc);
  } catch (const InvalidArgument& e) {
    throw ConfigError("operator", e.what());
  }
  try {
    make_map(c);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("map", e.what());
  }

  const Eigen::VectorXd d = c.direction.value.evaluate(grid);
  const bool nonneg = (d.array() >= 0.0).all();
  const bool nonpos = (d.array() <= 0.0).all();
  if (!d.allFinite()) throw ConfigError("direction.value", "must be finite at every node");
  if (!c.forcing.evaluate(grid).allFinite()) {
    throw ConfigError("forcing", "must be finite at every node");
  }
  if (c.sensitivity.enabled && !nonneg && !nonpos) {
    throw ConfigError("direction.value", "mixed sign; sensitivity needs a signed direction");
  }
  if (c.direction.sign == DirectionSign::Nonnegative && !nonneg) {
    throw ConfigError("direction.sign", "tag 'nonnegative' but direction has negative values");
  }
  if (c.direction.sign == DirectionSign::Nonpositive && !nonpos) {
    throw ConfigError("direction.sign", "tag 'nonpositive' but direction has positive values");
  }
  if (c.sensitivity.enabled) {
    if (c.run == RunMode::Min && c.direction.sign != DirectionSign::Nonnegative) {
      throw ConfigError("direction.sign", "minimal-map sensitivity needs 'nonnegative'");
    }
    if (c.run == RunMode::Max && c.direction.sign != DirectionSign::Nonpositive) {
      throw ConfigError("direction.sign", "maximal-map sensitivity needs 'nonpositive'");
    }
    const auto& sl = c.sensitivity.s_list;
    for (size_t k = 0; k < sl.size(); ++k) {
      const std::string p = "sensitivity.s_list[" + std::to_string(k) + "]";
      if (!(sl[k] >= 1e-5 && sl[k] <= 1.0)) throw ConfigError(p, "must lie in [1e-5, 1]");
      if (k > 0 && !(sl[k] < sl[k - 1])) throw ConfigError(p, "s_list must be decreasing");
    }
    if (c.sensitivity.fd_tol && !(*c.sensitivity.fd_tol > 0.0)) {
      throw ConfigError("sensitivity.fd_tol", "must be positive");
    }
  }
  if (c.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

Grid make_grid(const ExperimentConfig& c) { return Grid(c.grid.n_nodes, c.grid.a, c.grid.b); }

EllipticOperator make_operator(const ExperimentConfig& c) {
  return assemble_operator(make_grid(c), c.op.c, c.op.bc);
}

ObstacleMapHandle make_map(const ExperimentConfig& c) {
  const Grid grid = make_grid(c);
  switch (c.map.kind) {
    case MapKind::PlateauPointwise:
      return std::make_shared<PlateauMap>(PlateauParams{.levels = c.map.levels, .eps = c.map.eps});
    case MapKind::InverseElliptic: {
      EllipticOperator L = [&] {
        try {
          return assemble_operator(grid, c.map.inner.c, c.map.inner.bc);
        } catch (const InvalidArgument& e) {
          throw ConfigError("map.operator", e.what());
        }
      }();
      return std::make_shared<InverseEllipticMap>(
          std::move(L), ScalarSource{.type = c.map.source_type, .scale = c.map.source_scale});
    }
    case MapKind::Thermoforming:
      return std::make_shared<ThermoformingMap>(
          ThermoParams{.k = c.map.k, .M = c.map.M, .gamma = c.map.gamma},
          NodalFunction(grid, c.map.mould.evaluate(grid)));
  }
  throw ConfigError("map.type", "unknown map");
}

}  // namespace qvix
