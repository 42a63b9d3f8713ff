// lambda-fv-lab: command-line front end for the experiment pipelines.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lfv/config.hpp"
#include "lfv/csv.hpp"
#include "lfv/experiment.hpp"

namespace {

using nlohmann::json;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  // cdi
  std::string measure_config;
  std::string method;
  std::optional<double> alpha;
  std::vector<int> m_grid;
  std::optional<int> n;
  std::optional<int> replicates;
  // simulate-lookdown
  std::optional<int> d;
  std::optional<double> T;
  std::vector<double> snapshot_times;
};

json load_json(const std::string& path) {
  try {
    return json::parse(lfv::read_file(path));
  } catch (const json::parse_error& e) {
    throw lfv::ConfigError("<root>", path + " is not valid JSON: " + e.what());
  }
}

json build_document(const Options& o, lfv::Pipeline pipeline) {
  json doc = o.config_path.empty() ? json::object() : load_json(o.config_path);
  if (!o.measure_config.empty()) {
    json m = load_json(o.measure_config);
    doc["measure"] = m.contains("measure") ? m["measure"] : m;
  }
  if (o.seed) doc["seed"] = *o.seed;
  if (!o.out.empty()) doc["output_dir"] = o.out;
  if (o.n) {
    doc["simulation"]["n"] = *o.n;
    if (pipeline == lfv::Pipeline::Cdi) doc["analysis"]["tm_n"] = *o.n;
  }
  if (o.d) doc["simulation"]["d"] = *o.d;
  if (o.T) doc["simulation"]["T"] = *o.T;
  if (!o.snapshot_times.empty()) doc["simulation"]["snapshot_times"] = o.snapshot_times;
  if (o.replicates) doc["analysis"]["replicates"] = *o.replicates;
  if (o.alpha) doc["analysis"]["alpha"] = *o.alpha;
  if (!o.m_grid.empty()) doc["analysis"]["m_grid"] = o.m_grid;
  if (!o.method.empty()) doc["analysis"]["cdi_method"] = o.method;
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lambda-Fleming-Viot laboratory: rates, coalescents, lookdown supports"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LFV_VERSION);
  Options o;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"rates", "print and write the rate table"},
      {"simulate-coalescent", "simulate restricted coalescent paths"},
      {"simulate-lookdown", "simulate the lookdown particle system"},
      {"cdi", "coming-down-from-infinity diagnostics and T_m estimates"},
      {"modulus", "modulus-of-continuity envelope"},
      {"dimension", "box-counting dimension of supports"},
      {"radius", "radius profile from a point mass at the origin"},
      {"range", "box-counting dimension of the range over a window"},
      {"report", "run every pipeline"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config_path, "experiment config (JSON)");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output directory");
    if (name == "cdi" || name == "simulate-lookdown") {
      sub->add_option("--measure-config", o.measure_config, "JSON file with the measure block");
      sub->add_option("--n", o.n, "number of levels / initial blocks");
    }
    if (name == "cdi") {
      sub->add_option("--method", o.method, "gamma, psi or both")
          ->check(CLI::IsMember({"gamma", "psi", "both"}));
      sub->add_option("--alpha", o.alpha, "exponent for condition checks");
      sub->add_option("--m-grid", o.m_grid, "block targets m")->delimiter(',');
      sub->add_option("--replicates", o.replicates, "Monte Carlo replicates");
    }
    if (name == "simulate-lookdown") {
      sub->add_option("--d", o.d, "spatial dimension");
      sub->add_option("--T", o.T, "time horizon");
      sub->add_option("--snapshot-times", o.snapshot_times, "observation times")
          ->delimiter(',');
    }
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const lfv::Pipeline pipeline = lfv::parse_pipeline(command);
    const lfv::ExperimentConfig config = lfv::parse_config(build_document(o, pipeline));
    const lfv::RunManifest manifest = lfv::run_experiment(config, pipeline);
    if (pipeline == lfv::Pipeline::Rates) {
      std::cout << lfv::read_file(std::filesystem::path(config.output_dir) / "rate_totals.csv");
    }
    for (const auto& f : manifest.outputs) {
      std::cerr << "wrote " << config.output_dir << "/" << f.name << " (" << f.bytes
                << " bytes)\n";
    }
    return 0;
  } catch (const lfv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    try {
      std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
      std::cerr << "  caused by: " << inner.what() << "\n";
    }
    return 1;
  }
}
