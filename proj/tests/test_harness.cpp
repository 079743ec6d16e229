#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "occmpc/harness.hpp"

using namespace occmpc;
using namespace occmpc::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("occmpc_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ScenarioConfig short_scenario() {
  ScenarioConfig c;
  c.pretrain_days = 3;
  c.days = 7;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(OCCMPC_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesKeysAndResolvesPaths) {
  const auto dir = scratch("config");
  std::ofstream(dir / "w.csv") << "timestamp,dry_bulb_c,ground_c\n";
  std::ofstream(dir / "s.cfg") << "# demo\n"
                                  "controller = triggered\n"
                                  "lambda = 0.9   # trailing\n"
                                  "horizon = 12\n"
                                  "start = 2007-03-05\n"
                                  "weather_file = w.csv\n"
                                  "occupancy.drift_hours = 2\n"
                                  "building.wall_layers = 0.01,0.16,800,1090; 0.1,0.04,30,840\n"
                                  "\n";
  const auto c = load_config((dir / "s.cfg").string());
  EXPECT_EQ(c.controller, ControllerKind::kTriggered);
  EXPECT_EQ(c.lambda, 0.9);
  EXPECT_EQ(c.mpc.horizon, 12);
  EXPECT_EQ(c.effective_start(), ingest::epoch_from_date(2007, 3, 5));
  EXPECT_EQ(fs::path(c.weather_file), dir / "w.csv");
  EXPECT_EQ(c.occupancy.drift_hours, 2.0);
  ASSERT_EQ(c.building.wall_layers.size(), 2u);
  EXPECT_EQ(c.building.wall_layers[1].conductivity, 0.04);
}

TEST(Config, Errors) {
  const auto dir = scratch("config_err");
  std::ofstream(dir / "bad_key.cfg") << "controller = predictive\nflux = 3\n";
  try {
    load_config((dir / "bad_key.cfg").string());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2u);
  }
  std::ofstream(dir / "bad_value.cfg") << "lambda = abc\n";
  EXPECT_THROW(load_config((dir / "bad_value.cfg").string()), ParseError);
  std::ofstream(dir / "no_eq.cfg") << "lambda 0.9\n";
  EXPECT_THROW(load_config((dir / "no_eq.cfg").string()), ParseError);
  EXPECT_THROW(load_config((dir / "missing.cfg").string()), IoError);

  ScenarioConfig c;
  EXPECT_THROW(apply_setting(c, "controller", "fuzzy"), InvalidArgument);
  EXPECT_THROW(apply_setting(c, "building.roof_layers", "1,2,3"), InvalidArgument);
  c.pretrain_days = -1;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = ScenarioConfig{};
  c.lambda = 1.2;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = ScenarioConfig{};
  c.pulse_file = (dir / "absent.csv").string();
  EXPECT_THROW(c.validate(), IoError);
}

TEST(Controllers, NamesRoundTrip) {
  for (auto k : {ControllerKind::kPredictive, ControllerKind::kTriggered, ControllerKind::kScheduled})
    EXPECT_EQ(parse_controller(controller_name(k)), k);
}

TEST(Simulation, Bookkeeping) {
  const auto r = run_simulation(short_scenario());
  const auto& recs = r.trace.records;
  ASSERT_EQ(recs.size(), 7u * 24u);
  double energy = 0.0, discomfort = 0.0, peak = 0.0;
  for (const auto& rec : recs) {
    EXPECT_GE(rec.u_w, 0.0);
    EXPECT_LE(rec.u_w, 8000.0);
    EXPECT_EQ(rec.energy_kwh, rec.u_w * 3600.0 / 3.6e6);
    EXPECT_EQ(rec.discomfort, rec.gamma_observed * std::abs(rec.zone_c - 23.0));
    energy += rec.energy_kwh;
    discomfort += rec.discomfort;
    peak = std::max(peak, rec.discomfort);
  }
  EXPECT_NEAR(r.metrics.total_energy_kwh, energy, 1e-9 * energy);
  EXPECT_NEAR(r.metrics.total_discomfort, discomfort, 1e-9 * std::max(1.0, discomfort));
  EXPECT_EQ(r.metrics.peak_discomfort, peak);
  std::size_t counted = 0;
  for (auto n : r.metrics.histogram_counts) counted += n;
  EXPECT_EQ(counted, recs.size());
  EXPECT_EQ(r.metrics.histogram_edges.size(), r.metrics.histogram_counts.size() + 1);
  for (std::size_t i = 1; i < recs.size(); ++i) EXPECT_EQ(recs[i].clock - recs[i - 1].clock, 3600.0);
}

TEST(Simulation, WeekendsForceSetback) {
  auto c = short_scenario();
  c.controller = ControllerKind::kScheduled;
  const auto r = run_simulation(c);
  int weekend_heat = 0;
  for (const auto& rec : r.trace.records)
    if (ingest::is_weekend(rec.clock - 3600.0) && ingest::is_weekend(rec.clock) && rec.u_w > 0.0) ++weekend_heat;
  // A 10 degC setback with zero weight never pays for energy.
  EXPECT_EQ(weekend_heat, 0);
}

TEST(Simulation, ZeroOccupancyPredictiveBeatsSchedule) {
  auto c = short_scenario();
  c.occupancy.pulse_rate_per_hour = 0.0;
  const auto predictive = run_simulation(c);
  c.controller = ControllerKind::kScheduled;
  const auto scheduled = run_simulation(c);
  EXPECT_LT(predictive.metrics.total_energy_kwh, scheduled.metrics.total_energy_kwh);
  EXPECT_GT(scheduled.metrics.total_energy_kwh, 0.0);
}

TEST(Simulation, Deterministic) {
  const auto dir = scratch("determinism");
  const auto c = short_scenario();
  const auto a = run_simulation(c);
  const auto b = run_simulation(c);
  emit_reports(a.trace, a.metrics, (dir / "a").string());
  emit_reports(b.trace, b.metrics, (dir / "b").string());
  for (const char* f : {"trace.csv", "metrics.txt", "histogram.csv"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  // Overwrite is identical too.
  emit_reports(a.trace, a.metrics, (dir / "b").string());
  EXPECT_EQ(slurp(dir / "a" / "trace.csv"), slurp(dir / "b" / "trace.csv"));
}

TEST(Simulation, SeedChangesSyntheticInputs) {
  auto c = short_scenario();
  const auto a = run_simulation(c);
  c.seed = 99;
  const auto b = run_simulation(c);
  EXPECT_NE(a.metrics.total_energy_kwh, b.metrics.total_energy_kwh);
}

TEST(Metrics, HistogramAndVariance) {
  SimulationTrace t;
  for (double d : {0.0, 0.2, 0.5, 0.7, 1.6, 0.0}) {
    TraceRecord r;
    r.discomfort = d;
    t.records.push_back(r);
  }
  const auto m = compute_metrics(t);
  EXPECT_NEAR(m.total_discomfort, 3.0, 1e-15);
  EXPECT_EQ(m.peak_discomfort, 1.6);
  const double mean = 0.5;
  double var = 0.0;
  for (double d : {0.0, 0.2, 0.5, 0.7, 1.6, 0.0}) var += (d - mean) * (d - mean);
  EXPECT_NEAR(m.discomfort_variance, var / 6.0, 1e-15);
  ASSERT_GE(m.histogram_counts.size(), 4u);
  EXPECT_EQ(m.histogram_counts[0], 3u);
  EXPECT_EQ(m.histogram_counts[1], 2u);
  EXPECT_EQ(m.histogram_counts[3], 1u);
}

TEST(Metrics, SavingsFormula) {
  EXPECT_DOUBLE_EQ(savings_percent(3088.0, 2493.0), (3088.0 - 2493.0) / 3088.0 * 100.0);
  EXPECT_NEAR(savings_percent(3088.0, 2493.0), 19.27, 0.01);
  EXPECT_EQ(savings_percent(100.0, 100.0), 0.0);
  EXPECT_LT(savings_percent(100.0, 120.0), 0.0);
  EXPECT_THROW(savings_percent(0.0, 1.0), InvalidArgument);
}

TEST(LambdaSweep, ConstantVacantStreamConverges) {
  ingest::OccupancySeries s;
  s.start_time = ingest::epoch_from_date(2007, 2, 5);
  s.gammas.assign(24 * 60, 0.0);
  const auto sweep = lambda_sweep(s, {0.99, 0.995, 1.0}, 24, 201, false);
  for (const auto& p : sweep) {
    EXPECT_LT(p.final_window_rms, 0.05) << p.lambda;
    EXPECT_EQ(p.evaluated, s.gammas.size() - 1);
  }
}

TEST(LambdaSweep, FairCoinNoiseFloor) {
  ingest::OccupancySeries s;
  s.start_time = ingest::epoch_from_date(2007, 2, 5);
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < 24 * 200; ++i) s.gammas.push_back(coin(rng) ? 1.0 : 0.0);
  for (const auto& p : lambda_sweep(s, {0.9, 0.974, 1.0}, 24, 201, false))
    EXPECT_NEAR(p.rms, 0.5, 0.05) << p.lambda;
}

TEST(LambdaSweep, RejectsOutOfRangeLambda) {
  ScenarioConfig c = short_scenario();
  EXPECT_THROW(lambda_sweep(c, {1.5}), InvalidArgument);
}

TEST(SynthOccupancy, DeterministicPerSeed) {
  SynthOccupancyParams p;
  p.days = 14;
  p.start_time = ingest::epoch_from_date(2007, 2, 5);
  const auto a = synth_occupancy(3, p);
  const auto b = synth_occupancy(3, p);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].timestamp, b[i].timestamp);
  EXPECT_NE(synth_occupancy(4, p).front().timestamp, a.front().timestamp);
  p.pulse_rate_per_hour = 0.0;
  EXPECT_TRUE(synth_occupancy(3, p).empty());
}

TEST(SynthOccupancy, MeanDailyHoursNearTarget) {
  SynthOccupancyParams p;
  p.days = 60;
  p.start_time = ingest::epoch_from_date(2007, 2, 5);
  const auto events = synth_occupancy(11, p);
  const auto merged = ingest::merge_pulses(events);
  double hours = 0.0;
  for (const auto& iv : merged) hours += iv.length() / 3600.0;
  int weekdays = 0;
  for (int d = 0; d < p.days; ++d) weekdays += ingest::is_weekend(p.start_time + d * 86400.0) ? 0 : 1;
  const double target = p.end_hour - p.start_hour;
  EXPECT_NEAR(hours / weekdays, target, 0.1 * target);
  for (const auto& e : events) EXPECT_FALSE(ingest::is_weekend(e.timestamp));
}

TEST(SynthWeather, ShapeAndDeterminism) {
  SynthWeatherParams p;
  p.days = 10;
  const auto a = synth_weather(2, p);
  const auto b = synth_weather(2, p);
  ASSERT_EQ(a.outdoor_dry_bulb.size(), 240u);
  EXPECT_EQ(a.outdoor_dry_bulb, b.outdoor_dry_bulb);
  double mean = 0.0;
  for (double v : a.outdoor_dry_bulb) mean += v / 240.0;
  EXPECT_NEAR(mean, p.mean_c, 2.5);
}

TEST(Preconditioning, CountsHeatBeforeOnset) {
  SimulationTrace t;
  const double monday = ingest::epoch_from_date(2007, 2, 5);
  // Two weekdays with onset in the interval starting at 09:00; heat at 08:00 on the first only.
  for (int d = 0; d < 2; ++d)
    for (int h = 1; h <= 24; ++h) {
      TraceRecord r;
      r.clock = monday + d * 86400.0 + h * 3600.0;
      r.gamma_observed = (h - 1 >= 9 && h - 1 < 17) ? 1.0 : 0.0;
      r.u_w = (d == 0 && h == 8) ? 1000.0 : 0.0;  // covers [08:00, 09:00)
      t.records.push_back(r);
    }
  const auto rep = preconditioning(t);
  EXPECT_EQ(rep.onset_hour, 9);
  EXPECT_EQ(rep.eligible_days, 2);
  EXPECT_EQ(rep.preheated_days, 1);
  EXPECT_DOUBLE_EQ(rep.fraction(), 0.5);
}

TEST(Reports, SweepAndComparisonFiles) {
  const auto dir = scratch("reports");
  write_sweep_csv({{0.9, 0.3, 0.2, 10}}, (dir / "sweep.csv").string());
  EXPECT_EQ(slurp(dir / "sweep.csv"), "lambda,rms,final_window_rms,evaluated\n0.90000000000000002,0.29999999999999999,"
                                      "0.20000000000000001,10\n");
  MetricsSummary a, b;
  a.total_energy_kwh = 80.0;
  b.total_energy_kwh = 100.0;
  write_comparison({{"predictive", a}, {"scheduled", b}}, "scheduled", (dir / "cmp.csv").string());
  const auto text = slurp(dir / "cmp.csv");
  EXPECT_NE(text.find("predictive,80,0,0,0,20\n"), std::string::npos) << text;
  EXPECT_THROW(write_trace_csv({}, "/nonexistent_dir/x/trace.csv"), IoError);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  EXPECT_EQ(run_cli("synth-weather --out " + (dir / "w").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "w" / "weather.csv"));
  EXPECT_EQ(run_cli("synth-occupancy --seed 4 --out " + (dir / "o").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o" / "pulses.csv"));
  EXPECT_EQ(run_cli("step-response --out " + (dir / "s").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "s" / "step_response.csv"));
  EXPECT_EQ(run_cli("simulate --set days=2 --set pretrain_days=1 --out " + (dir / "sim").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "sim" / "trace.csv"));
  EXPECT_EQ(run_cli("sweep-lambda --lambdas 0.9,1.0 --set days=7 --out " + (dir / "sw").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "sw" / "sweep.csv"));

  EXPECT_NE(run_cli("simulate --config " + (dir / "nope.cfg").string()), 0);
  EXPECT_NE(run_cli("simulate --controller fuzzy --out " + (dir / "x").string()), 0);
  EXPECT_NE(run_cli("simulate --set lambda=2 --out " + (dir / "x").string()), 0);
  EXPECT_NE(run_cli("bogus"), 0);
}
