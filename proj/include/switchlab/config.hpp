#pragma once

// Experiment configuration: one JSON document. Cost and nu presets expand at
// parse time; serialization always writes the expanded matrices, so
// parse(serialize(cfg)) == cfg.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "switchlab/scheduling.hpp"
#include "switchlab/traffic.hpp"
#include "switchlab/wlinalg.hpp"

namespace switchlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  int n = 2;
  std::string cost_preset = "ones";  // provenance only once expanded
  std::vector<double> cost;          // n*n, row-major
  ArrivalKind arrival_kind = ArrivalKind::bernoulli;
  std::vector<double> nu;            // n*n, row-major
  int a_max = 1;
  std::vector<double> epsilon_grid{0.1, 0.05, 0.02};
  std::int64_t slots = 1'000'000;
  std::optional<std::int64_t> warmup;  // default_warmup(eps) when absent
  int replications = 1;
  int batch_count = 30;
  std::uint64_t seed = 1;
  MatcherConfig matcher{};
  std::int64_t ssc_sampling_stride = 100;
  std::string output_dir = ".";

  CostMatrix cost_matrix() const;
  FlatVector nu_vector() const;
  ArrivalModel model(double epsilon) const;
  std::int64_t warmup_for(double epsilon) const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates; throws ConfigError with a readable message.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Expands a named cost preset: ones, checker(a, b), random(seed, lo, hi).
std::vector<double> expand_cost_preset(const nlohmann::json& spec, int n);

/// FNV-1a of the compact serialized config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace switchlab
