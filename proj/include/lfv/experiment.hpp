#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lfv/config.hpp"
#include "lfv/errors.hpp"
#include "lfv/lookdown.hpp"

namespace lfv {

enum class Pipeline {
  Rates,
  SimulateCoalescent,
  SimulateLookdown,
  Cdi,
  Modulus,
  Dimension,
  Radius,
  Range,
  Report,
};

std::string to_string(Pipeline pipeline);
// Accepts the CLI subcommand names; throws ConfigError otherwise.
Pipeline parse_pipeline(std::string_view name);

// A module error raised while processing one replicate. The original error is
// nested (std::rethrow_if_nested recovers it).
class ReplicateError : public Error {
 public:
  ReplicateError(std::uint64_t replicate, const std::string& message)
      : Error("replicate " + std::to_string(replicate) + ": " + message),
        replicate_(replicate) {}
  std::uint64_t replicate() const noexcept { return replicate_; }

 private:
  std::uint64_t replicate_;
};

struct OutputFile {
  std::string name;
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct RunManifest {
  std::string pipeline;
  std::string config_hash;
  std::string version;
  std::uint64_t seed = 0;
  std::vector<std::string> replicate_keys;            // hex, one per replicate
  std::vector<std::pair<std::string, double>> wall_times;  // seconds per stage
  std::vector<OutputFile> outputs;
  bool complete = false;
};

nlohmann::json to_json(const RunManifest& manifest);

// Initial positions for one replicate: empty for "origin", otherwise uniform
// in the unit cube drawn from the replicate's own stream.
InitialCondition initial_condition(const SimulationSpec& sim, std::uint64_t seed,
                                   std::uint64_t replicate);

// Runs the pipeline, writes CSV/JSON artifacts into config.output_dir, then
// writes manifest.json last. Any stale manifest is removed first, so an
// interrupted run never leaves one behind.
RunManifest run_experiment(const ExperimentConfig& config, Pipeline pipeline);

}  // namespace lfv
