// Command-line front end: closed-loop simulations, lambda sweep, synthetic
// inputs and thermal step response.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "occmpc/harness.hpp"

namespace fs = std::filesystem;
using namespace occmpc;
using namespace occmpc::harness;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> settings;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key = value scenario file")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", c.seed, "seed for synthetic generators");
  cmd->add_option("--set", c.settings, "override a setting, key=value (repeatable)");
}

ScenarioConfig resolve(const Common& c) {
  ScenarioConfig config = c.config_path.empty() ? ScenarioConfig{} : load_config(c.config_path);
  for (const auto& s : c.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + s + "'");
    apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.seed) config.seed = *c.seed;
  return config;
}

fs::path prepare(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  return fs::path(dir);
}

void print_metrics(const std::string& name, const MetricsSummary& m) {
  std::printf("%-11s energy %9.1f kWh  discomfort %8.2f  peak %6.2f  variance %7.4f", name.c_str(),
              m.total_energy_kwh, m.total_discomfort, m.peak_discomfort, m.discomfort_variance);
  if (m.savings_vs_reference) std::printf("  savings %6.1f%%", *m.savings_vs_reference);
  std::printf("\n");
}

int simulate(const Common& c, const std::string& controller) {
  ScenarioConfig config = resolve(c);
  const fs::path out = prepare(c.out_dir);
  if (controller != "all") {
    if (!controller.empty()) config.controller = parse_controller(controller);
    const auto result = run_simulation(config);
    emit_reports(result.trace, result.metrics, out.string());
    print_metrics(controller_name(config.controller), result.metrics);
    return 0;
  }
  std::map<std::string, SimulationResult> runs;
  for (auto kind : {ControllerKind::kPredictive, ControllerKind::kTriggered, ControllerKind::kScheduled}) {
    config.controller = kind;
    runs.emplace(controller_name(kind), run_simulation(config));
  }
  const double reference = runs.at("scheduled").metrics.total_energy_kwh;
  std::map<std::string, MetricsSummary> summary;
  for (auto& [name, run] : runs) {
    if (reference > 0.0) run.metrics.savings_vs_reference = savings_percent(reference, run.metrics.total_energy_kwh);
    emit_reports(run.trace, run.metrics, (out / name).string());
    summary.emplace(name, run.metrics);
    print_metrics(name, run.metrics);
  }
  if (reference > 0.0) write_comparison(summary, "scheduled", (out / "comparison.csv").string());
  return 0;
}

int sweep(const Common& c, std::vector<double> lambdas) {
  const ScenarioConfig config = resolve(c);
  if (lambdas.empty()) {
    for (int i = 0; i <= 8; ++i) lambdas.push_back(0.5 + 0.05 * i);
    for (int i = 91; i <= 100; ++i) lambdas.push_back(i / 100.0);
    lambdas.push_back(0.974);
    std::sort(lambdas.begin(), lambdas.end());
  }
  const auto points = lambda_sweep(config, lambdas);
  write_sweep_csv(points, (prepare(c.out_dir) / "sweep.csv").string());
  std::printf("lambda      rms     final-window\n");
  for (const auto& p : points) std::printf("%.3f  %.5f  %.5f\n", p.lambda, p.rms, p.final_window_rms);
  return 0;
}

int synth_occ(const Common& c) {
  const ScenarioConfig config = resolve(c);
  const fs::path out = prepare(c.out_dir);
  SynthOccupancyParams p = config.occupancy;
  p.start_time = config.effective_start();
  p.days = config.pretrain_days + config.days;
  p.dwell = config.dwell;
  const auto events = synth_occupancy(config.seed, p);
  ingest::write_pulse_csv(events, (out / "pulses.csv").string());
  const auto series = ingest::discretize(ingest::merge_pulses(events, config.dwell), p.start_time, ingest::kHour,
                                         static_cast<std::size_t>(config.total_steps()));
  ingest::write_occupancy_csv(series, (out / "occupancy.csv").string());
  std::printf("%zu pulses, %zu hourly steps\n", events.size(), series.gammas.size());
  return 0;
}

int synth_wx(const Common& c) {
  ScenarioConfig config = resolve(c);
  config.weather_file.clear();
  const auto weather = scenario_weather(config);
  ingest::write_weather_csv(weather, (prepare(c.out_dir) / "weather.csv").string());
  std::printf("%zu hourly rows\n", weather.size());
  return 0;
}

int step_response(const Common& c, double initial, double boundary, int steps) {
  const ScenarioConfig config = resolve(c);
  const auto plant = scenario_plant(config);
  const fs::path out = prepare(c.out_dir);
  const auto trace = thermal::step_response_report(plant, initial, boundary, steps);
  std::ofstream csv(out / "step_response.csv");
  if (!csv) throw IoError("cannot write step_response.csv");
  csv << "step,zone_c\n";
  char buf[32];
  for (std::size_t k = 0; k < trace.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", trace[k]);
    csv << k << ',' << buf << '\n';
  }
  thermal::write_model_file(plant, (out / "model.txt").string());
  std::printf("states %ld  spectral radius %.6f  dominant time constant %.1f h  final zone %.4f C\n",
              static_cast<long>(plant.states()), thermal::spectral_radius(plant),
              thermal::dominant_time_constant(plant) / 3600.0, trace.back());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occupancy-predictive heating control simulator"};
  app.require_subcommand(1);

  Common sim_opts, sweep_opts, occ_opts, wx_opts, step_opts;
  std::string controller;
  std::vector<double> lambdas;
  double initial = 20.0, boundary = 0.0;
  int steps = 240;

  auto* sim = app.add_subcommand("simulate", "closed-loop simulation with reports");
  add_common(sim, sim_opts);
  sim->add_option("--controller", controller, "predictive|triggered|scheduled|all")
      ->check(CLI::IsMember({"predictive", "triggered", "scheduled", "all"}));

  auto* sw = app.add_subcommand("sweep-lambda", "one-step RMS prediction error per forgetting factor");
  add_common(sw, sweep_opts);
  sw->add_option("--lambdas", lambdas, "forgetting factors")->delimiter(',');

  auto* so = app.add_subcommand("synth-occupancy", "write synthetic pulse and occupancy CSVs");
  add_common(so, occ_opts);
  auto* sx = app.add_subcommand("synth-weather", "write a synthetic hourly weather CSV");
  add_common(sx, wx_opts);

  auto* sr = app.add_subcommand("step-response", "zone response to a stepped boundary temperature");
  add_common(sr, step_opts);
  sr->add_option("--initial", initial, "initial temperature of every node")->capture_default_str();
  sr->add_option("--boundary", boundary, "stepped boundary temperature")->capture_default_str();
  sr->add_option("--steps", steps, "number of steps")->capture_default_str()->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return simulate(sim_opts, controller);
    if (*sw) return sweep(sweep_opts, lambdas);
    if (*so) return synth_occ(occ_opts);
    if (*sx) return synth_wx(wx_opts);
    if (*sr) return step_response(step_opts, initial, boundary, steps);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
