#pragma once

// Closed-loop simulation of occupancy data, thermal plant and controller;
// metrics, forgetting-factor sweep, synthetic inputs and report files.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "occmpc/control.hpp"
#include "occmpc/ingest.hpp"
#include "occmpc/occupancy.hpp"
#include "occmpc/thermal.hpp"

namespace occmpc::harness {

using ingest::Seconds;

enum class ControllerKind { kPredictive, kTriggered, kScheduled };

ControllerKind parse_controller(const std::string& name);
std::string controller_name(ControllerKind kind);

/// Weekday meeting-style pulse logs.
struct SynthOccupancyParams {
  int days = 70;
  Seconds start_time = 0.0;      // midnight UTC of the first day
  double start_hour = 9.0;       // session start, hours after midnight
  double end_hour = 17.0;
  double jitter_minutes = 10.0;  // std. dev. of start and end times
  double pulse_rate_per_hour = 30.0;
  double attendance = 1.0;       // probability a weekday has a session
  double drift_hours = 0.0;      // shift added to start_hour from drift_day on
  int drift_day = -1;            // -1: no drift
  bool weekends = false;         // generate sessions on Sat/Sun as well
  Seconds dwell = ingest::kDefaultDwell;  // last pulse is this long before the session end
  std::string sensor_id = "452";
};

std::vector<ingest::PulseEvent> synth_occupancy(std::uint64_t seed, const SynthOccupancyParams& params);

/// Cold-season hourly weather: sinusoidal daily cycle around a mean that
/// wanders with a multi-day period, plus small noise.
struct SynthWeatherParams {
  int days = 70;
  Seconds start_time = 0.0;
  double mean_c = 0.0;
  double daily_amplitude_c = 4.0;   // half peak-to-peak, minimum near 05:00
  double synoptic_amplitude_c = 4.0;
  double synoptic_period_days = 6.0;
  double noise_c = 0.5;
  double ground_c = 4.0;
};

ingest::WeatherSeries synth_weather(std::uint64_t seed, const SynthWeatherParams& params);

struct ScenarioConfig {
  std::string pulse_file;    // empty: synthesize from `occupancy`
  std::string weather_file;  // empty: synthesize from `weather`
  std::string model_file;    // empty: discretize `building`
  thermal::BuildingParams building = thermal::demo_building();
  ControllerKind controller = ControllerKind::kPredictive;
  MpcConfig<double> mpc;
  double lambda = 0.974;
  int period = 24;
  Eigen::Index grid_size = kDefaultGridSize;
  Seconds dwell = ingest::kDefaultDwell;
  int pretrain_days = 7;
  int days = 56;  // simulated (logged) days after pre-training
  bool weekend_policy = true;
  std::uint64_t seed = 1;
  Seconds start_time = 0.0;  // first pre-training midnight; 0 means 2007-02-05
  double initial_temp_c = 15.0;
  SynthOccupancyParams occupancy;
  SynthWeatherParams weather;

  Seconds effective_start() const;
  int total_steps() const { return (pretrain_days + days) * 24; }
  void validate() const;
};

/// Reads "key = value" lines ('#' starts a comment). Unknown keys and
/// malformed values are errors.
ScenarioConfig load_config(const std::string& path);
void apply_setting(ScenarioConfig& config, const std::string& key, const std::string& value);

struct TraceRecord {
  Seconds clock = 0.0;
  double gamma_observed = 0.0;   // occupancy of the hour ending at `clock`
  double gamma_predicted = 0.0;  // one-step prediction made an hour earlier
  double zone_c = 0.0;           // zone temperature at `clock`
  double outdoor_c = 0.0;        // outdoor temperature over the next hour
  double u_w = 0.0;              // heat input over the next hour
  double discomfort = 0.0;       // gamma * |zone - tau| * hours
  double energy_kwh = 0.0;       // u * step
};

struct SimulationTrace {
  std::vector<TraceRecord> records;
  Seconds step_seconds = ingest::kHour;
};

struct MetricsSummary {
  double total_discomfort = 0.0;
  double peak_discomfort = 0.0;
  double discomfort_variance = 0.0;
  double total_energy_kwh = 0.0;
  std::optional<double> savings_vs_reference;  // percent
  double histogram_bin_width = 0.5;
  std::vector<double> histogram_edges;         // bins + 1 edges
  std::vector<std::size_t> histogram_counts;
};

MetricsSummary compute_metrics(const SimulationTrace& trace, double bin_width = 0.5);
/// (reference - self) / reference * 100.
double savings_percent(double reference_kwh, double self_kwh);

struct SimulationResult {
  SimulationTrace trace;
  MetricsSummary metrics;
  OccupancyModel<double> model{1, 3, 1.0};
};

/// Occupancy series covering the whole scenario (pre-training included).
ingest::OccupancySeries scenario_occupancy(const ScenarioConfig& config);
ingest::WeatherSeries scenario_weather(const ScenarioConfig& config);
thermal::StateSpaceModel<double> scenario_plant(const ScenarioConfig& config);

SimulationResult run_simulation(const ScenarioConfig& config);

struct SweepPoint {
  double lambda = 0.0;
  double rms = 0.0;               // over every evaluated step
  double final_window_rms = 0.0;  // over the last `window` evaluated steps
  std::size_t evaluated = 0;
};

/// One-step-ahead RMS prediction error for each forgetting factor, training
/// a fresh model on the series while scoring each observation against the
/// prediction made one step earlier. With `skip_weekends`, transitions that
/// touch a Saturday or Sunday are neither trained nor scored.
std::vector<SweepPoint> lambda_sweep(const ingest::OccupancySeries& series,
                                     const std::vector<double>& lambdas, int period,
                                     Eigen::Index grid_size, bool skip_weekends,
                                     std::size_t window = 24 * 5);
std::vector<SweepPoint> lambda_sweep(const ScenarioConfig& config, const std::vector<double>& lambdas);

/// Per-day pre-heating check on a trace: for weekdays whose occupancy onset
/// falls in the most common onset hour, whether heat was applied during the
/// hour immediately before onset.
struct PreconditioningReport {
  int onset_hour = -1;
  int eligible_days = 0;
  int preheated_days = 0;
  double fraction() const { return eligible_days ? double(preheated_days) / eligible_days : 0.0; }
};

PreconditioningReport preconditioning(const SimulationTrace& trace);

// Report files.
void write_trace_csv(const SimulationTrace& trace, const std::string& path);
void write_metrics(const MetricsSummary& metrics, const std::string& path);
void write_histogram_csv(const MetricsSummary& metrics, const std::string& path);
void write_sweep_csv(const std::vector<SweepPoint>& sweep, const std::string& path);
/// Writes trace.csv, metrics.txt and histogram.csv into out_dir.
void emit_reports(const SimulationTrace& trace, const MetricsSummary& metrics, const std::string& out_dir);
/// Side-by-side summary of several controllers, savings against `reference`.
void write_comparison(const std::map<std::string, MetricsSummary>& results, const std::string& reference,
                      const std::string& path);

}  // namespace occmpc::harness
