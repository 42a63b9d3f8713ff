#include "lfv/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lfv/cdi.hpp"
#include "lfv/csv.hpp"
#include "lfv/errors.hpp"

namespace lfv {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported.
class Section {
 public:
  Section(const json& node, std::string path) : path_(std::move(path)) {
    if (node.is_null()) {
      node_ = json::object();
    } else if (!node.is_object()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    } else {
      node_ = node;
    }
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!node_.contains(key) || node_.at(key).is_null()) return fallback;
    try {
      return node_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(key), std::string("wrong type: ") + e.what());
    }
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown field");
    }
  }

 private:
  json node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

MeasureSpec parse_measure(const json& node) {
  Section s(node, "measure");
  MeasureSpec m;
  m.family = s.get<std::string>("family", "kingman");
  require(m.family == "kingman" || m.family == "beta" || m.family == "uniform" ||
              m.family == "custom",
          s.field("family"), "must be kingman, beta, uniform or custom");
  m.beta = s.get<double>("beta", 1.0);
  m.atom0 = s.get<double>("atom0", m.family == "kingman" ? 1.0 : 0.0);
  m.atom1 = s.get<double>("atom1", 0.0);
  m.density_table = s.get<std::vector<std::pair<double, double>>>("density_table", {});
  s.finish();
  require(finite_nonneg(m.atom0), s.field("atom0"), "must be finite and nonnegative");
  require(finite_nonneg(m.atom1), s.field("atom1"), "must be finite and nonnegative");
  if (m.family == "beta") {
    require(m.beta > 0.0 && m.beta < 2.0, s.field("beta"), "must lie in (0, 2)");
  }
  if (m.family == "custom") {
    require(!m.density_table.empty(), s.field("density_table"),
            "custom measures need a density table");
  } else {
    require(m.density_table.empty(), s.field("density_table"),
            "only custom measures take a density table");
  }
  try {
    build_measure(m);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("measure", e.what());
  }
  return m;
}

SimulationSpec parse_simulation(const json& node) {
  Section s(node, "simulation");
  SimulationSpec sim;
  sim.n = s.get<int>("n", sim.n);
  sim.d = s.get<int>("d", sim.d);
  sim.T = s.get<double>("T", sim.T);
  sim.init = s.get<std::string>("init", sim.init);
  sim.snapshot_times = s.get<std::vector<double>>("snapshot_times", {});
  sim.record_events = s.get<bool>("record_events", sim.record_events);
  sim.max_expected_events = s.get<double>("max_expected_events", sim.max_expected_events);
  s.finish();
  require(sim.n >= 1, s.field("n"), "must be at least 1");
  require(sim.d >= 1 && sim.d <= 16, s.field("d"), "must lie in [1, 16]");
  require(std::isfinite(sim.T) && sim.T > 0.0, s.field("T"), "must be positive");
  require(sim.init == "origin" || sim.init == "uniform", s.field("init"),
          "must be origin or uniform");
  for (double t : sim.snapshot_times) {
    require(t >= 0.0 && t <= sim.T, s.field("snapshot_times"), "times must lie in [0, T]");
  }
  require(sim.max_expected_events > 0.0, s.field("max_expected_events"), "must be positive");
  return sim;
}

AnalysisSpec parse_analysis(const json& node, const SimulationSpec& sim) {
  Section s(node, "analysis");
  AnalysisSpec a;
  a.replicates = s.get<int>("replicates", a.replicates);
  a.tolerance = s.get<double>("tolerance", a.tolerance);
  a.alpha = s.get<double>("alpha", a.alpha);
  a.grid_depth = s.get<int>("grid_depth", a.grid_depth);
  a.min_depth = s.get<int>("min_depth", a.min_depth);
  a.required_fraction = s.get<double>("required_fraction", a.required_fraction);
  a.scales = s.get<std::vector<double>>("scales", {});
  a.scale_k = s.get<std::pair<int, int>>("scale_k", a.scale_k);
  a.window = s.get<std::pair<double, double>>("window", {sim.T / 2.0, sim.T});
  a.snapshot_count = s.get<int>("snapshot_count", a.snapshot_count);
  std::vector<double> t_grid;
  for (int k = 3; k <= 10; ++k) {
    if (std::ldexp(1.0, -k) <= sim.T) t_grid.push_back(std::ldexp(1.0, -k));
  }
  a.t_grid = s.get<std::vector<double>>("t_grid", t_grid);
  a.cdi_method = s.get<std::string>("cdi_method", a.cdi_method);
  a.gamma_levels = s.get<std::vector<int>>("gamma_levels", default_gamma_levels());
  a.psi_grid = s.get<std::vector<double>>("psi_grid", default_psi_grid());
  a.psi_a = s.get<double>("psi_a", a.psi_a);
  a.m_grid = s.get<std::vector<int>>("m_grid", a.m_grid);
  a.tm_n = s.get<int>("tm_n", sim.n);
  a.max_blocks = s.get<int>("max_blocks", std::max(sim.n, 2));
  s.finish();

  require(a.replicates >= 1, s.field("replicates"), "must be at least 1");
  require(a.tolerance > 0.0 && a.tolerance < 1e-2, s.field("tolerance"), "must lie in (0, 0.01)");
  require(std::isfinite(a.alpha) && a.alpha > 0.0, s.field("alpha"), "must be positive");
  require(a.grid_depth >= 2 && a.grid_depth <= 20, s.field("grid_depth"), "must lie in [2, 20]");
  require(a.min_depth >= 2 && a.min_depth <= a.grid_depth, s.field("min_depth"),
          "must lie in [2, grid_depth]");
  require(a.required_fraction > 0.0 && a.required_fraction <= 1.0, s.field("required_fraction"),
          "must lie in (0, 1]");
  for (std::size_t i = 0; i < a.scales.size(); ++i) {
    require(a.scales[i] > 0.0 && (i == 0 || a.scales[i] < a.scales[i - 1]), s.field("scales"),
            "box sizes must be positive and decreasing");
  }
  require(a.scale_k.first >= 0 && a.scale_k.second >= a.scale_k.first + 3, s.field("scale_k"),
          "needs k_min >= 0 and at least 4 scales");
  require(a.window.first >= 0.0 && a.window.first <= a.window.second && a.window.second <= sim.T,
          s.field("window"), "needs 0 <= t0 <= t1 <= T");
  require(a.snapshot_count >= 1, s.field("snapshot_count"), "must be at least 1");
  for (std::size_t i = 0; i < a.t_grid.size(); ++i) {
    require(a.t_grid[i] > 0.0 && a.t_grid[i] < 1.0 && a.t_grid[i] <= sim.T &&
                (i == 0 || a.t_grid[i] < a.t_grid[i - 1]),
            s.field("t_grid"), "times must decrease within (0, min(1, T)]");
  }
  require(a.cdi_method == "gamma" || a.cdi_method == "psi" || a.cdi_method == "both",
          s.field("cdi_method"), "must be gamma, psi or both");
  for (std::size_t i = 0; i < a.gamma_levels.size(); ++i) {
    require(a.gamma_levels[i] >= 2 && (i == 0 || a.gamma_levels[i] > a.gamma_levels[i - 1]),
            s.field("gamma_levels"), "levels must increase from 2");
  }
  for (std::size_t i = 0; i < a.psi_grid.size(); ++i) {
    require(a.psi_grid[i] > a.psi_a && (i == 0 || a.psi_grid[i] > a.psi_grid[i - 1]),
            s.field("psi_grid"), "grid must increase and exceed psi_a");
  }
  require(a.psi_a > 0.0, s.field("psi_a"), "must be positive");
  for (int m : a.m_grid) require(m >= 2, s.field("m_grid"), "entries must be at least 2");
  require(a.tm_n >= 2, s.field("tm_n"), "must be at least 2");
  require(a.max_blocks >= 2 && a.max_blocks <= 5000, s.field("max_blocks"),
          "must lie in [2, 5000]");
  return a;
}

}  // namespace

LambdaMeasure build_measure(const MeasureSpec& spec) {
  if (spec.family == "kingman") {
    if (spec.atom1 != 0.0) return LambdaMeasure::piecewise_linear({{0.5, 0.0}}, spec.atom0, spec.atom1);
    return LambdaMeasure::kingman(spec.atom0);
  }
  if (spec.family == "beta") return LambdaMeasure::beta(spec.beta, spec.atom0, spec.atom1);
  if (spec.family == "uniform") return LambdaMeasure::uniform(spec.atom0, spec.atom1);
  if (spec.family == "custom") {
    return LambdaMeasure::piecewise_linear(spec.density_table, spec.atom0, spec.atom1);
  }
  throw ConfigError("measure.family", "unknown family " + spec.family);
}

ExperimentConfig parse_config(const json& document) {
  Section root(document, "");
  ExperimentConfig c;
  c.measure = parse_measure(root.has("measure") ? root.raw("measure") : json());
  c.simulation = parse_simulation(root.has("simulation") ? root.raw("simulation") : json());
  c.analysis =
      parse_analysis(root.has("analysis") ? root.raw("analysis") : json(), c.simulation);
  if (root.has("seed") && !root.raw("seed").is_number_integer()) {
    throw ConfigError("seed", "must be a nonnegative integer");
  }
  if (root.has("seed") && !root.raw("seed").is_number_unsigned() &&
      root.raw("seed").get<std::int64_t>() < 0) {
    throw ConfigError("seed", "must be a nonnegative integer");
  }
  c.seed = root.get<std::uint64_t>("seed", c.seed);
  c.output_dir = root.get<std::string>("output_dir", c.output_dir);
  root.finish();
  require(!c.output_dir.empty(), "output_dir", "must not be empty");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json m = {{"family", c.measure.family},
            {"beta", c.measure.beta},
            {"atom0", c.measure.atom0},
            {"atom1", c.measure.atom1},
            {"density_table", c.measure.density_table}};
  json s = {{"n", c.simulation.n},
            {"d", c.simulation.d},
            {"T", c.simulation.T},
            {"init", c.simulation.init},
            {"snapshot_times", c.simulation.snapshot_times},
            {"record_events", c.simulation.record_events},
            {"max_expected_events", c.simulation.max_expected_events}};
  const auto& a = c.analysis;
  json an = {{"replicates", a.replicates},
             {"tolerance", a.tolerance},
             {"alpha", a.alpha},
             {"grid_depth", a.grid_depth},
             {"min_depth", a.min_depth},
             {"required_fraction", a.required_fraction},
             {"scales", a.scales},
             {"scale_k", a.scale_k},
             {"window", a.window},
             {"snapshot_count", a.snapshot_count},
             {"t_grid", a.t_grid},
             {"cdi_method", a.cdi_method},
             {"gamma_levels", a.gamma_levels},
             {"psi_grid", a.psi_grid},
             {"psi_a", a.psi_a},
             {"m_grid", a.m_grid},
             {"tm_n", a.tm_n},
             {"max_blocks", a.max_blocks}};
  return {{"measure", m},
          {"simulation", s},
          {"analysis", an},
          {"seed", c.seed},
          {"output_dir", c.output_dir}};
}

}  // namespace lfv
