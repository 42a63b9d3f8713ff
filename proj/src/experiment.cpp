#include "lfv/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>

#include "lfv/cdi.hpp"
#include "lfv/coalescent.hpp"
#include "lfv/csv.hpp"
#include "lfv/parallel.hpp"
#include "lfv/rng.hpp"
#include "lfv/stats.hpp"
#include "lfv/support.hpp"

#ifndef LFV_VERSION
#define LFV_VERSION "0.0.0"
#endif

namespace lfv {

using nlohmann::json;

namespace {

constexpr std::pair<Pipeline, std::string_view> kNames[] = {
    {Pipeline::Rates, "rates"},
    {Pipeline::SimulateCoalescent, "simulate-coalescent"},
    {Pipeline::SimulateLookdown, "simulate-lookdown"},
    {Pipeline::Cdi, "cdi"},
    {Pipeline::Modulus, "modulus"},
    {Pipeline::Dimension, "dimension"},
    {Pipeline::Radius, "radius"},
    {Pipeline::Range, "range"},
    {Pipeline::Report, "report"},
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Runs body(rep) for every replicate; module errors are rethrown wrapped in a
// ReplicateError that names the replicate.
template <class Body>
void for_each_replicate(std::size_t count, Body&& body) {
  parallel_for(count, [&](std::size_t rep) {
    try {
      body(rep);
    } catch (const Error& e) {
      std::throw_with_nested(ReplicateError(rep, e.what()));
    }
  });
}

class Run {
 public:
  Run(const ExperimentConfig& config, RunManifest& manifest)
      : config_(config), manifest_(manifest), dir_(config.output_dir),
        measure_(build_measure(config.measure)) {}

  const ExperimentConfig& config() const { return config_; }
  const LambdaMeasure& measure() const { return measure_; }
  json& summary() { return summary_; }

  void emit(const std::string& name, const std::string& content) {
    write_file_atomic(dir_ / name, content);
    manifest_.outputs.push_back({name, sha256_hex(content), content.size()});
  }

  void stage(const std::string& name, const std::function<void()>& body) {
    const auto start = std::chrono::steady_clock::now();
    body();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    manifest_.wall_times.emplace_back(name, elapsed.count());
  }

  LookdownConfig lookdown_config(std::uint64_t rep, std::vector<double> extra_times,
                                 bool record_events) const {
    const auto& sim = config_.simulation;
    LookdownConfig lc;
    lc.n = sim.n;
    lc.d = sim.d;
    lc.horizon = sim.T;
    lc.init = initial_condition(sim, config_.seed, rep);
    lc.observation_times = sim.snapshot_times;
    lc.observation_times.insert(lc.observation_times.end(), extra_times.begin(),
                                extra_times.end());
    lc.record_events = record_events;
    lc.max_expected_events = sim.max_expected_events;
    return lc;
  }

  void finish_summary(const std::string& pipeline) {
    summary_["pipeline"] = pipeline;
    summary_["measure"] = measure_.description();
    emit("summary.json", summary_.dump(2) + "\n");
  }

 private:
  const ExperimentConfig& config_;
  RunManifest& manifest_;
  std::filesystem::path dir_;
  LambdaMeasure measure_;
  json summary_ = json::object();
};

void run_rates(Run& run) {
  const auto& a = run.config().analysis;
  const RateTable table = build_rate_table(run.measure(), a.max_blocks, a.tolerance);
  CsvWriter rates({"b", "k", "lambda"});
  CsvWriter totals({"b", "lambda_b", "gamma_b"});
  for (int b = 2; b <= a.max_blocks; ++b) {
    for (int k = 2; k <= b; ++k) rates.field(b).field(k).field(table(b, k)).end_row();
    totals.field(b).field(total_rate(table, b)).field(decrease_rate(table, b)).end_row();
  }
  run.emit("rates.csv", rates.text());
  run.emit("rate_totals.csv", totals.text());
  run.summary()["rates"] = {{"max_blocks", a.max_blocks},
                            {"consistency_defect", table.consistency_defect()}};
}

void run_simulate_coalescent(Run& run) {
  const auto& c = run.config();
  const int n = c.simulation.n;
  if (n < 2) throw ConfigError("simulation.n", "coalescent simulation needs n >= 2");
  const RateTable table = build_rate_table(run.measure(), n, c.analysis.tolerance);
  std::vector<std::string> rows(c.analysis.replicates);
  std::vector<int> final_blocks(c.analysis.replicates);
  for_each_replicate(rows.size(), [&](std::size_t rep) {
    const CoalescentPath path = simulate_coalescent(table, n, c.simulation.T, c.seed, rep);
    CsvWriter w({"replicate", "event_index", "time", "block_count_after", "merge_size"});
    for (std::size_t i = 0; i < path.events.size(); ++i) {
      const auto& e = path.events[i];
      w.field(static_cast<std::uint64_t>(rep)).field(static_cast<std::uint64_t>(i)).field(e.time)
          .field(e.after.block_count()).field(static_cast<std::uint64_t>(e.merged_blocks.size()));
      w.end_row();
    }
    final_blocks[rep] = path.events.empty() ? n : path.events.back().after.block_count();
    const std::string& t = w.text();
    rows[rep] = t.substr(t.find('\n') + 1);
  });
  std::string text = "replicate,event_index,time,block_count_after,merge_size\n";
  for (const auto& r : rows) text += r;
  run.emit("coalescent_paths.csv", text);
  run.summary()["simulate_coalescent"] = {{"n", n}, {"final_block_counts", final_blocks}};
}

void run_simulate_lookdown(Run& run) {
  const auto& c = run.config();
  const int d = c.simulation.d;
  const std::size_t R = c.analysis.replicates;
  std::vector<std::string> snaps(R), events(R);
  std::vector<std::uint64_t> counts(R);
  for_each_replicate(R, [&](std::size_t rep) {
    const auto traj = simulate_lookdown(run.measure(),
                                        run.lookdown_config(rep, {}, c.simulation.record_events),
                                        c.seed, rep);
    counts[rep] = traj.event_count();
    std::vector<std::string> header{"replicate", "t", "level"};
    for (int i = 1; i <= d; ++i) header.push_back("x_" + std::to_string(i));
    CsvWriter w(header);
    for (std::size_t k = 0; k < traj.observation_times().size(); ++k) {
      for (int level = 1; level <= traj.n(); ++level) {
        w.field(static_cast<std::uint64_t>(rep)).field(traj.observation_times()[k]).field(level);
        for (double x : traj.position(k, level)) w.field(x);
        w.end_row();
      }
    }
    snaps[rep] = w.text().substr(w.text().find('\n') + 1);
    if (traj.has_event_log()) {
      CsvWriter e({"replicate", "time", "kind", "levels", "parent"});
      for (const auto& ev : traj.events()) {
        std::string levels;
        for (int l : ev.levels) levels += (levels.empty() ? "" : ";") + std::to_string(l);
        e.field(static_cast<std::uint64_t>(rep)).field(ev.time)
            .field(std::string_view(ev.kind == BirthKind::Single ? "single" : "multi"))
            .field(std::string_view(levels)).field(ev.parent_level);
        e.end_row();
      }
      events[rep] = e.text().substr(e.text().find('\n') + 1);
    }
  });
  std::string header = "replicate,t,level";
  for (int i = 1; i <= d; ++i) header += ",x_" + std::to_string(i);
  std::string text = header + "\n";
  for (const auto& s : snaps) text += s;
  run.emit("snapshots.csv", text);
  if (c.simulation.record_events) {
    std::string etext = "replicate,time,kind,levels,parent\n";
    for (const auto& s : events) etext += s;
    run.emit("events.csv", etext);
  }
  run.summary()["simulate_lookdown"] = {{"event_counts", counts}};
}

void run_cdi(Run& run) {
  const auto& c = run.config();
  const auto& a = c.analysis;
  CsvWriter w({"method", "level", "value", "verdict"});
  json verdicts = json::object();
  auto write = [&](const CdiVerdict& v) {
    const std::string method = to_string(v.method);
    const std::string outcome = to_string(v.outcome);
    for (std::size_t i = 0; i < v.evidence.levels.size(); ++i) {
      w.field(std::string_view(method)).field(v.evidence.levels[i])
          .field(v.evidence.partial[i]).field(std::string_view(outcome));
      w.end_row();
    }
    verdicts[method] = outcome;
  };
  std::optional<CdiVerdict> gamma, psi_v;
  if (a.cdi_method != "psi") gamma = cdi_gamma_series(run.measure(), a.gamma_levels, a.tolerance);
  if (a.cdi_method != "gamma") psi_v = cdi_psi_integral(run.measure(), a.psi_a, a.psi_grid, a.tolerance);
  if (gamma) write(*gamma);
  if (psi_v) write(*psi_v);
  run.emit("cdi.csv", w.text());
  json cdi = {{"verdicts", verdicts}};
  if (gamma && psi_v) {
    cdi["agree"] = gamma->outcome == psi_v->outcome ||
                   gamma->outcome == CdiOutcome::Inconclusive ||
                   psi_v->outcome == CdiOutcome::Inconclusive;
  }

  const RateTable table = build_rate_table(run.measure(), a.tm_n, a.tolerance);
  std::vector<int> grid;
  for (int m : a.m_grid) {
    if (m >= 2 && 2 * m < a.tm_n) grid.push_back(m);
  }
  if (grid.size() >= 2) {
    CsvWriter cw({"kind", "m", "partial_sum", "scaled", "tail_estimate", "scaled_with_tail",
                  "verdict"});
    for (auto kind : {ConditionKind::A, ConditionKind::B}) {
      const auto report = check_condition(table, a.alpha, grid, kind);
      const std::string_view k = kind == ConditionKind::A ? "A" : "B";
      const std::string verdict = to_string(report.verdict);
      for (const auto& row : report.rows) {
        cw.field(k).field(row.m).field(row.partial_sum).field(row.scaled)
            .field(row.tail_estimate).field(row.scaled_with_tail).field(std::string_view(verdict));
        cw.end_row();
      }
      cdi[std::string("condition_") + std::string(k)] = verdict;
    }
    run.emit("conditions.csv", cw.text());
  }

  CsvWriter tw({"n", "m", "replicates", "mean", "std_error", "censored_fraction",
                "bound_gamma", "bound_lambda"});
  for (int m : a.m_grid) {
    if (m >= a.tm_n) continue;
    const TmEstimate est = estimate_Tm(table, m, a.tm_n, 0.0, a.replicates, c.seed);
    tw.field(est.n).field(est.m).field(est.replicates).field(est.mean).field(est.std_error)
        .field(est.censored_fraction).field(est.bound_gamma).field(est.bound_lambda);
    tw.end_row();
  }
  run.emit("tm.csv", tw.text());
  run.summary()["cdi"] = cdi;
}

void run_modulus(Run& run) {
  const auto& c = run.config();
  const auto& a = c.analysis;
  const double T = c.simulation.T;
  modulus_depths(a.grid_depth, a.min_depth, T);
  const auto grid = dyadic_grid(T, a.grid_depth);
  std::vector<ModulusSample> samples(a.replicates);
  for_each_replicate(samples.size(), [&](std::size_t rep) {
    const auto traj = simulate_lookdown(run.measure(), run.lookdown_config(rep, grid, false),
                                        c.seed, rep);
    samples[rep] = modulus_sample(traj, a.grid_depth, a.min_depth);
  });
  const ModulusReport report = modulus_report(samples, c.simulation.d, T, a.grid_depth, a.alpha,
                                              a.min_depth, a.required_fraction);
  CsvWriter w({"scale", "c_hat", "c_theory", "pass", "depth", "pass_fraction", "c1"});
  CsvWriter per({"replicate", "scale", "ratio"});
  json scales = json::array();
  for (const auto& s : report.scales) {
    w.field(s.delta).field(s.c_hat).field(report.c_theory).field(s.pass).field(s.depth)
        .field(s.pass_fraction).field(report.c1);
    w.end_row();
    for (std::size_t rep = 0; rep < s.per_replicate.size(); ++rep) {
      per.field(static_cast<std::uint64_t>(rep)).field(s.delta).field(s.per_replicate[rep]);
      per.end_row();
    }
    scales.push_back({{"scale", s.delta}, {"c_hat", s.c_hat}, {"pass", s.pass},
                      {"pass_fraction", s.pass_fraction}});
  }
  CsvWriter pairs({"r", "s", "ratio"});
  for (const auto& p : report.pairs) pairs.field(p.r).field(p.s).field(p.max_ratio).end_row();
  run.emit("modulus.csv", w.text());
  run.emit("modulus_replicates.csv", per.text());
  run.emit("modulus_pairs.csv", pairs.text());
  run.summary()["modulus"] = {{"c_theory", report.c_theory}, {"c1", report.c1},
                              {"below_theory", report.below_theory},
                              {"bounded_trend", report.bounded_trend}, {"scales", scales}};
}

void write_dimension(Run& run, const std::string& file, const std::string& key,
                     const std::vector<DimensionEstimate>& estimates) {
  CsvWriter w({"scale", "count", "slope", "ci_lo", "ci_hi", "replicate"});
  std::vector<double> slopes;
  for (std::size_t rep = 0; rep < estimates.size(); ++rep) {
    const auto& e = estimates[rep];
    for (std::size_t i = 0; i < e.scales.size(); ++i) {
      w.field(e.scales[i]).field(e.counts[i]).field(e.slope).field(e.ci_lo).field(e.ci_hi)
          .field(static_cast<std::uint64_t>(rep));
      w.end_row();
    }
    slopes.push_back(e.slope);
  }
  run.emit(file, w.text());
  run.summary()[key] = {{"slopes", slopes},
                        {"max_slope", *std::max_element(slopes.begin(), slopes.end())}};
}

std::vector<double> dimension_scales(const AnalysisSpec& a, const PointCloud& cloud) {
  if (!a.scales.empty()) return a.scales;
  return relative_scales(cloud, a.scale_k.first, a.scale_k.second);
}

void run_dimension(Run& run) {
  const auto& c = run.config();
  std::vector<DimensionEstimate> est(c.analysis.replicates);
  for_each_replicate(est.size(), [&](std::size_t rep) {
    const auto traj = simulate_lookdown(run.measure(), run.lookdown_config(rep, {}, false),
                                        c.seed, rep);
    const PointCloud cloud = empirical_support(traj, c.simulation.T, rep);
    est[rep] = box_counting_dimension(cloud, dimension_scales(c.analysis, cloud));
  });
  write_dimension(run, "dimension.csv", "dimension", est);
}

void run_range(Run& run) {
  const auto& c = run.config();
  const auto& a = c.analysis;
  const auto times = range_snapshot_times(a.window.first, a.window.second, a.snapshot_count);
  std::vector<DimensionEstimate> est(a.replicates);
  for_each_replicate(est.size(), [&](std::size_t rep) {
    const auto traj = simulate_lookdown(run.measure(), run.lookdown_config(rep, times, false),
                                        c.seed, rep);
    const PointCloud cloud =
        range_union(traj, a.window.first, a.window.second, a.snapshot_count, rep);
    est[rep] = box_counting_dimension(cloud, dimension_scales(a, cloud));
  });
  write_dimension(run, "range.csv", "range", est);
}

void run_radius(Run& run) {
  const auto& c = run.config();
  const auto& a = c.analysis;
  if (c.simulation.init != "origin") {
    throw WrongInitialization("radius profile needs simulation.init = origin");
  }
  std::vector<std::vector<double>> ratios(a.replicates);
  for_each_replicate(ratios.size(), [&](std::size_t rep) {
    const auto traj = simulate_lookdown(run.measure(), run.lookdown_config(rep, a.t_grid, false),
                                        c.seed, rep);
    ratios[rep] = radius_ratios(traj, a.t_grid);
  });
  const RadiusReport report = radius_report(ratios, a.t_grid, c.simulation.d, a.alpha);
  CsvWriter w({"t", "ratio", "replicate"});
  for (const auto& row : report.rows) {
    for (std::size_t rep = 0; rep < row.ratio.size(); ++rep) {
      w.field(row.t).field(row.ratio[rep]).field(static_cast<std::uint64_t>(rep)).end_row();
    }
  }
  run.emit("radius.csv", w.text());
  run.summary()["radius"] = {{"c_theory", report.c_theory},
                             {"bounded_fraction", report.bounded_fraction}};
}

}  // namespace

std::string to_string(Pipeline pipeline) {
  for (const auto& [p, name] : kNames) {
    if (p == pipeline) return std::string(name);
  }
  return "unknown";
}

Pipeline parse_pipeline(std::string_view name) {
  for (const auto& [p, n] : kNames) {
    if (n == name) return p;
  }
  throw ConfigError("pipeline", "unknown subcommand " + std::string(name));
}

json to_json(const RunManifest& m) {
  json outputs = json::array();
  for (const auto& o : m.outputs) {
    outputs.push_back({{"file", o.name}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  }
  json times = json::object();
  for (const auto& [stage, seconds] : m.wall_times) times[stage] = seconds;
  return {{"pipeline", m.pipeline},     {"config_hash", m.config_hash},
          {"version", m.version},       {"seed", m.seed},
          {"replicate_keys", m.replicate_keys}, {"wall_times", times},
          {"outputs", outputs},         {"complete", m.complete}};
}

InitialCondition initial_condition(const SimulationSpec& sim, std::uint64_t seed,
                                   std::uint64_t replicate) {
  InitialCondition init;
  if (sim.init == "origin") return init;
  Stream rng = stream_for(seed, replicate, StreamRole::InitialPosition);
  init.points.resize(static_cast<std::size_t>(sim.n) * sim.d);
  for (double& x : init.points) x = rng.uniform_open();
  return init;
}

RunManifest run_experiment(const ExperimentConfig& config, Pipeline pipeline) {
  const std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::filesystem::remove(dir / "manifest.json", ec);

  RunManifest manifest;
  manifest.pipeline = to_string(pipeline);
  json hashed = to_json(config);
  hashed.erase("output_dir");
  manifest.config_hash = sha256_hex(hashed.dump());
  manifest.version = LFV_VERSION;
  manifest.seed = config.seed;
  for (int rep = 0; rep < config.analysis.replicates; ++rep) {
    manifest.replicate_keys.push_back(
        hex64(stream_key(config.seed, static_cast<std::uint64_t>(rep), StreamRole::CoalescentClock)));
  }

  Run run(config, manifest);
  run.emit("config.json", to_json(config).dump(2) + "\n");
  auto one = [&](Pipeline p) {
    switch (p) {
      case Pipeline::Rates: run.stage("rates", [&] { run_rates(run); }); break;
      case Pipeline::SimulateCoalescent:
        run.stage("simulate-coalescent", [&] { run_simulate_coalescent(run); });
        break;
      case Pipeline::SimulateLookdown:
        run.stage("simulate-lookdown", [&] { run_simulate_lookdown(run); });
        break;
      case Pipeline::Cdi: run.stage("cdi", [&] { run_cdi(run); }); break;
      case Pipeline::Modulus: run.stage("modulus", [&] { run_modulus(run); }); break;
      case Pipeline::Dimension: run.stage("dimension", [&] { run_dimension(run); }); break;
      case Pipeline::Radius: run.stage("radius", [&] { run_radius(run); }); break;
      case Pipeline::Range: run.stage("range", [&] { run_range(run); }); break;
      case Pipeline::Report: break;
    }
  };
  if (pipeline == Pipeline::Report) {
    for (auto p : {Pipeline::Rates, Pipeline::SimulateCoalescent, Pipeline::SimulateLookdown,
                   Pipeline::Cdi, Pipeline::Modulus, Pipeline::Dimension, Pipeline::Range}) {
      one(p);
    }
    if (config.simulation.init == "origin") one(Pipeline::Radius);
  } else {
    one(pipeline);
  }
  run.finish_summary(manifest.pipeline);

  manifest.complete = true;
  write_file_atomic(dir / "manifest.json", to_json(manifest).dump(2) + "\n");
  return manifest;
}

}  // namespace lfv
