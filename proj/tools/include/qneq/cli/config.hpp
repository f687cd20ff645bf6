#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qneq/experiment.hpp"
#include "qneq/hidden_variables.hpp"
#include "qneq/relaxation.hpp"

namespace qneq::cli {

struct ShapeConfig {
  std::string kind = "uniform";  // uniform | delta | histogram | piecewise_linear
  double u0 = 0.0;
  std::vector<double> edges, masses;
  std::vector<double> u, f;
};

struct DensityConfig {
  std::string kind = "equilibrium";  // equilibrium | custom
  double weight_plus = 0.5;
  ShapeConfig plus, minus;
};

struct ProtocolConfig {
  ProtocolMode mode = ProtocolMode::RandomReset;
  std::size_t angle_count = 12;
  std::vector<double> angles;  // explicit list, overrides angle_count when non-empty
  std::uint64_t photons = 1000000;

  std::vector<double> resolved_angles() const;
};

struct AnalysisConfig {
  std::size_t bins = 0;  // 0 keeps the observed settings
  int k_alt = 3;
  double significance = 0.01;
  // Probe angles theta1, theta1 + pi/4 and theta1 + atan2(c2, c1)/2 for the
  // additivity test on event data.
  std::optional<double> additivity_theta1;
  std::vector<double> additivity_coefficients{0.7071067811865476, 0.7071067811865476};
};

struct AdditivityConfig {
  std::array<Vec3, 3> triad{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  Vec3 coefficients{0.7071067811865476, 0.7071067811865476, 0.0};
  std::uint64_t photons = 1000000;
};

struct OutputConfig {
  std::string directory = ".";
  std::string events_format = "csv";  // csv | jsonl
};

struct RunConfig {
  std::uint64_t seed = 0;
  Vec3 axis{0, 0, 1};
  double polarisation = 0.8;
  DensityConfig density;
  ProtocolConfig protocol;
  AnalysisConfig analysis;
  AdditivityConfig additivity;
  RelaxationConfig relaxation;
  OutputConfig output;

  ModelSpec model() const;
  LambdaDensity lambda_density() const;
  ProtocolSpec protocol_spec() const;
  OrthonormalTriad triad() const;
  RelaxationConfig relaxation_spec() const;  // relaxation with the run seed
  void validate() const;
};

/// Parses YAML text; absent keys keep their defaults, unknown keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const RunConfig& config);

}  // namespace qneq::cli
