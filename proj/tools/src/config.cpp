#include "qneq/cli/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "qneq/error.hpp"

namespace qneq::cli {

namespace {

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

std::string path_of(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

template <class T>
void read(const YAML::Node& node, const std::string& where, const std::string& key, T& out) {
  const auto v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path_of(where, key) + ": invalid value");
  }
}

void read_vec3(const YAML::Node& node, const std::string& where, const std::string& key, Vec3& out) {
  const auto v = node[key];
  if (!v) return;
  std::vector<double> xs;
  read(node, where, key, xs);
  if (xs.size() != 3) throw ConfigError(path_of(where, key) + ": expected three numbers");
  out = {xs[0], xs[1], xs[2]};
}

ShapeConfig read_shape(const YAML::Node& node, const std::string& where) {
  ShapeConfig s;
  if (!node) return s;
  check_keys(node, where, {"shape", "u0", "edges", "masses", "u", "f"});
  read(node, where, "shape", s.kind);
  read(node, where, "u0", s.u0);
  read(node, where, "edges", s.edges);
  read(node, where, "masses", s.masses);
  read(node, where, "u", s.u);
  read(node, where, "f", s.f);
  if (s.kind != "uniform" && s.kind != "delta" && s.kind != "histogram" && s.kind != "piecewise_linear")
    throw ConfigError(where + ".shape: expected uniform, delta, histogram or piecewise_linear");
  return s;
}

SignDensity build_shape(const ShapeConfig& s) {
  if (s.kind == "delta") return SignDensity(shape::Delta{s.u0});
  if (s.kind == "histogram") return SignDensity(shape::Histogram{s.edges, s.masses});
  if (s.kind == "piecewise_linear") return SignDensity(shape::PiecewiseLinear{s.u, s.f});
  return SignDensity(shape::Uniform{});
}

nlohmann::ordered_json shape_json(const ShapeConfig& s) {
  nlohmann::ordered_json j;
  j["shape"] = s.kind;
  if (s.kind == "delta") j["u0"] = s.u0;
  if (s.kind == "histogram") {
    j["edges"] = s.edges;
    j["masses"] = s.masses;
  }
  if (s.kind == "piecewise_linear") {
    j["u"] = s.u;
    j["f"] = s.f;
  }
  return j;
}

// Module invariants are checked by the module constructors; any violation
// there is a configuration error here.
template <class F>
auto as_config(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

std::vector<double> ProtocolConfig::resolved_angles() const {
  return angles.empty() ? uniform_angle_grid(angle_count) : angles;
}

ModelSpec RunConfig::model() const {
  return as_config("model", [&] { return ModelSpec(UnitAxis(axis), polarisation); });
}

LambdaDensity RunConfig::lambda_density() const {
  if (density.kind == "equilibrium") return LambdaDensity::equilibrium(model());
  return as_config("density", [&] {
    return LambdaDensity(density.weight_plus, build_shape(density.plus), build_shape(density.minus));
  });
}

ProtocolSpec RunConfig::protocol_spec() const {
  ProtocolSpec spec{protocol.mode, protocol.resolved_angles(), protocol.photons, seed};
  as_config("protocol", [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

OrthonormalTriad RunConfig::triad() const {
  return as_config("additivity.triad", [&] {
    return OrthonormalTriad(std::array<UnitAxis, 3>{UnitAxis(additivity.triad[0]), UnitAxis(additivity.triad[1]),
                                                    UnitAxis(additivity.triad[2])});
  });
}

RelaxationConfig RunConfig::relaxation_spec() const {
  RelaxationConfig r = relaxation;
  r.seed = seed;
  return r;
}

void RunConfig::validate() const {
  model();
  lambda_density();
  protocol_spec();
  triad();
  if (analysis.k_alt < 2) throw ConfigError("analysis.k_alt: must be at least 2");
  if (analysis.bins != 0 && analysis.bins < static_cast<std::size_t>(2 * analysis.k_alt + 1))
    throw ConfigError("analysis.bins: must be 0 or at least 2 k_alt + 1");
  if (!(analysis.significance > 0 && analysis.significance < 1))
    throw ConfigError("analysis.significance: must lie in (0, 1)");
  if (analysis.additivity_coefficients.size() != 2)
    throw ConfigError("analysis.additivity.coefficients: expected two numbers");
  const auto& ac = analysis.additivity_coefficients;
  if (std::fabs(ac[0] * ac[0] + ac[1] * ac[1] - 1.0) > 1e-10)
    throw ConfigError("analysis.additivity.coefficients: must have unit norm");
  const auto& c = additivity.coefficients;
  if (std::fabs(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] - 1.0) > 1e-10)
    throw ConfigError("additivity.coefficients: must have unit norm");
  if (additivity.photons < 1) throw ConfigError("additivity.photons: must be positive");
  if (relaxation.modes < 2) throw ConfigError("relaxation.modes: must be at least 2");
  if (relaxation.trajectories < 1) throw ConfigError("relaxation.trajectories: must be positive");
  if (relaxation.cells < 8) throw ConfigError("relaxation.cells: must be at least 8");
  if (relaxation.checkpoints < 1) throw ConfigError("relaxation.checkpoints: must be positive");
  if (!(relaxation.tolerance > 0)) throw ConfigError("relaxation.tolerance: must be positive");
  if (output.events_format != "csv" && output.events_format != "jsonl")
    throw ConfigError("output.events_format: expected csv or jsonl");
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig c;
  if (root.IsNull()) return c;
  check_keys(root, "config", {"seed", "model", "density", "protocol", "analysis", "additivity", "relaxation", "output"});
  read(root, "", "seed", c.seed);

  if (const auto m = root["model"]) {
    check_keys(m, "model", {"axis", "polarisation"});
    read_vec3(m, "model", "axis", c.axis);
    read(m, "model", "polarisation", c.polarisation);
  }
  if (const auto d = root["density"]) {
    check_keys(d, "density", {"kind", "weight_plus", "plus", "minus"});
    read(d, "density", "kind", c.density.kind);
    if (c.density.kind != "equilibrium" && c.density.kind != "custom")
      throw ConfigError("density.kind: expected equilibrium or custom");
    if (c.density.kind == "equilibrium" && (d["weight_plus"] || d["plus"] || d["minus"]))
      throw ConfigError("density: weight_plus/plus/minus need kind: custom");
    read(d, "density", "weight_plus", c.density.weight_plus);
    c.density.plus = read_shape(d["plus"], "density.plus");
    c.density.minus = read_shape(d["minus"], "density.minus");
  }
  if (const auto p = root["protocol"]) {
    check_keys(p, "protocol", {"mode", "angles", "photons"});
    std::string mode = "random_reset";
    read(p, "protocol", "mode", mode);
    if (mode == "random_reset") c.protocol.mode = ProtocolMode::RandomReset;
    else if (mode == "fixed_grid") c.protocol.mode = ProtocolMode::FixedGrid;
    else throw ConfigError("protocol.mode: expected random_reset or fixed_grid");
    if (const auto a = p["angles"]) {
      if (a.IsSequence()) read(p, "protocol", "angles", c.protocol.angles);
      else read(p, "protocol", "angles", c.protocol.angle_count);
    }
    read(p, "protocol", "photons", c.protocol.photons);
  }
  if (const auto a = root["analysis"]) {
    check_keys(a, "analysis", {"bins", "k_alt", "significance", "additivity"});
    read(a, "analysis", "bins", c.analysis.bins);
    read(a, "analysis", "k_alt", c.analysis.k_alt);
    read(a, "analysis", "significance", c.analysis.significance);
    if (const auto add = a["additivity"]) {
      check_keys(add, "analysis.additivity", {"theta1", "coefficients"});
      double theta1 = 0;
      if (add["theta1"]) {
        read(add, "analysis.additivity", "theta1", theta1);
        c.analysis.additivity_theta1 = theta1;
      }
      read(add, "analysis.additivity", "coefficients", c.analysis.additivity_coefficients);
    }
  }
  if (const auto a = root["additivity"]) {
    check_keys(a, "additivity", {"triad", "coefficients", "photons"});
    if (const auto t = a["triad"]) {
      std::vector<std::vector<double>> rows;
      read(a, "additivity", "triad", rows);
      if (rows.size() != 3) throw ConfigError("additivity.triad: expected three axes");
      for (std::size_t i = 0; i < 3; ++i) {
        if (rows[i].size() != 3) throw ConfigError("additivity.triad: each axis needs three numbers");
        c.additivity.triad[i] = {rows[i][0], rows[i][1], rows[i][2]};
      }
    }
    read_vec3(a, "additivity", "coefficients", c.additivity.coefficients);
    read(a, "additivity", "photons", c.additivity.photons);
  }
  if (const auto r = root["relaxation"]) {
    check_keys(r, "relaxation", {"modes", "trajectories", "cells", "t_end", "checkpoints", "tolerance", "initial"});
    read(r, "relaxation", "modes", c.relaxation.modes);
    read(r, "relaxation", "trajectories", c.relaxation.trajectories);
    read(r, "relaxation", "cells", c.relaxation.cells);
    read(r, "relaxation", "t_end", c.relaxation.t_end);
    read(r, "relaxation", "checkpoints", c.relaxation.checkpoints);
    read(r, "relaxation", "tolerance", c.relaxation.tolerance);
    std::string initial = "uniform";
    read(r, "relaxation", "initial", initial);
    if (initial == "uniform") c.relaxation.initial = InitialDensity::Uniform;
    else if (initial == "born") c.relaxation.initial = InitialDensity::Born;
    else throw ConfigError("relaxation.initial: expected uniform or born");
  }
  if (const auto o = root["output"]) {
    check_keys(o, "output", {"directory", "events_format"});
    read(o, "output", "directory", c.output.directory);
    read(o, "output", "events_format", c.output.events_format);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["model"] = {{"axis", c.axis}, {"polarisation", c.polarisation}};
  nlohmann::ordered_json d;
  d["kind"] = c.density.kind;
  if (c.density.kind == "custom") {
    d["weight_plus"] = c.density.weight_plus;
    d["plus"] = shape_json(c.density.plus);
    d["minus"] = shape_json(c.density.minus);
  }
  j["density"] = d;
  j["protocol"] = {{"mode", c.protocol.mode == ProtocolMode::RandomReset ? "random_reset" : "fixed_grid"},
                   {"angles", c.protocol.resolved_angles()},
                   {"photons", c.protocol.photons}};
  nlohmann::ordered_json a{{"bins", c.analysis.bins}, {"k_alt", c.analysis.k_alt},
                           {"significance", c.analysis.significance}};
  nlohmann::ordered_json add;
  add["theta1"] = c.analysis.additivity_theta1 ? nlohmann::ordered_json(*c.analysis.additivity_theta1) : nlohmann::ordered_json(nullptr);
  add["coefficients"] = c.analysis.additivity_coefficients;
  a["additivity"] = add;
  j["analysis"] = a;
  j["additivity"] = {{"triad", c.additivity.triad},
                     {"coefficients", c.additivity.coefficients},
                     {"photons", c.additivity.photons}};
  j["relaxation"] = {{"modes", c.relaxation.modes},
                     {"trajectories", c.relaxation.trajectories},
                     {"cells", c.relaxation.cells},
                     {"t_end", c.relaxation.resolved_t_end()},
                     {"checkpoints", c.relaxation.checkpoints},
                     {"tolerance", c.relaxation.tolerance},
                     {"initial", c.relaxation.initial == InitialDensity::Uniform ? "uniform" : "born"}};
  j["output"] = {{"directory", c.output.directory}, {"events_format", c.output.events_format}};
  return j;
}

}  // namespace qneq::cli
