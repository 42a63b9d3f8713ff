#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lfv/measures.hpp"

namespace lfv {

struct MeasureSpec {
  std::string family = "kingman";  // kingman | beta | uniform | custom
  double beta = 1.0;
  double atom0 = 1.0;
  double atom1 = 0.0;
  std::vector<std::pair<double, double>> density_table;  // custom only

  bool operator==(const MeasureSpec&) const = default;
};

struct SimulationSpec {
  int n = 50;
  int d = 2;
  double T = 1.0;
  std::string init = "origin";  // origin | uniform (unit cube)
  std::vector<double> snapshot_times;
  bool record_events = true;
  double max_expected_events = 5e7;

  bool operator==(const SimulationSpec&) const = default;
};

struct AnalysisSpec {
  int replicates = 10;
  double tolerance = 1e-10;
  double alpha = 1.0;
  // modulus
  int grid_depth = 8;
  int min_depth = 4;
  double required_fraction = 0.95;
  // dimension and range; empty scales means diameter * 2^-k for k in scale_k
  std::vector<double> scales;
  std::pair<int, int> scale_k{2, 7};
  std::pair<double, double> window{0.5, 1.0};
  int snapshot_count = 64;
  // radius
  std::vector<double> t_grid;
  // cdi
  std::string cdi_method = "both";  // gamma | psi | both
  std::vector<int> gamma_levels;
  std::vector<double> psi_grid;
  double psi_a = 1.0;
  std::vector<int> m_grid{2, 4, 8, 16};
  int tm_n = 50;
  int max_blocks = 50;

  bool operator==(const AnalysisSpec&) const = default;
};

struct ExperimentConfig {
  MeasureSpec measure;
  SimulationSpec simulation;
  AnalysisSpec analysis;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

// Missing fields take defaults (some derived from others, e.g. the range
// window from T); the result is fully explicit, so to_json/parse round-trips.
// Throws ConfigError naming the dotted field path.
ExperimentConfig parse_config(const nlohmann::json& document);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

LambdaMeasure build_measure(const MeasureSpec& spec);

}  // namespace lfv
