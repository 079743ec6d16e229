#include "occmpc/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace occmpc::harness {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out))
    throw InvalidArgument("setting '" + key + "' expects a number, got '" + value + "'");
  return out;
}

long to_int(const std::string& key, const std::string& value) {
  long out = 0;
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw InvalidArgument("setting '" + key + "' expects an integer, got '" + value + "'");
  return out;
}

std::vector<thermal::Layer> to_layers(const std::string& key, const std::string& value) {
  // "thickness,conductivity,density,specific_heat; ..." from inside to outside.
  std::vector<thermal::Layer> layers;
  std::stringstream all(value);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (trim(item).empty()) continue;
    std::stringstream fields(item);
    std::string f;
    std::vector<double> v;
    while (std::getline(fields, f, ',')) v.push_back(to_double(key, trim(f)));
    if (v.size() != 4) throw InvalidArgument("setting '" + key + "' expects layers of 4 numbers");
    layers.push_back({v[0], v[1], v[2], v[3]});
  }
  return layers;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw InvalidArgument("setting '" + key + "' expects true/false, got '" + value + "'");
}

}  // namespace

ControllerKind parse_controller(const std::string& name) {
  if (name == "predictive") return ControllerKind::kPredictive;
  if (name == "triggered") return ControllerKind::kTriggered;
  if (name == "scheduled") return ControllerKind::kScheduled;
  throw InvalidArgument("unknown controller '" + name + "' (predictive|triggered|scheduled)");
}

std::string controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kPredictive: return "predictive";
    case ControllerKind::kTriggered: return "triggered";
    case ControllerKind::kScheduled: return "scheduled";
  }
  return "unknown";
}

Seconds ScenarioConfig::effective_start() const {
  return start_time != 0.0 ? start_time : ingest::epoch_from_date(2007, 2, 5);
}

void ScenarioConfig::validate() const {
  mpc.validate();
  if (pretrain_days < 0) throw InvalidArgument("pretrain_days must be nonnegative");
  if (days < 1) throw InvalidArgument("days must be at least 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0,1]");
  if (period < 1) throw InvalidArgument("period must be at least 1");
  if (grid_size < 3) throw InvalidArgument("grid_size must be at least 3");
  if (!(dwell > 0.0)) throw InvalidArgument("dwell must be positive");
  for (const auto* path : {&pulse_file, &weather_file, &model_file})
    if (!path->empty() && !std::filesystem::exists(*path))
      throw IoError("referenced file '" + *path + "' does not exist");
}

void apply_setting(ScenarioConfig& c, const std::string& key, const std::string& value) {
  using Setter = std::function<void(const std::string&)>;
  auto num = [&](double& field) -> Setter { return [&field, key](const std::string& v) { field = to_double(key, v); }; };
  auto integer = [&](int& field) -> Setter {
    return [&field, key](const std::string& v) { field = static_cast<int>(to_int(key, v)); };
  };
  auto flag = [&](bool& field) -> Setter { return [&field, key](const std::string& v) { field = to_bool(key, v); }; };
  auto text = [&](std::string& field) -> Setter { return [&field](const std::string& v) { field = v; }; };

  const std::map<std::string, Setter> setters = {
      {"controller", [&](const std::string& v) { c.controller = parse_controller(v); }},
      {"pulse_file", text(c.pulse_file)},
      {"weather_file", text(c.weather_file)},
      {"model_file", text(c.model_file)},
      {"lambda", num(c.lambda)},
      {"period", integer(c.period)},
      {"grid_size", [&](const std::string& v) { c.grid_size = to_int(key, v); }},
      {"dwell", num(c.dwell)},
      {"pretrain_days", integer(c.pretrain_days)},
      {"days", integer(c.days)},
      {"weekend_policy", flag(c.weekend_policy)},
      {"seed", [&](const std::string& v) { c.seed = static_cast<std::uint64_t>(to_int(key, v)); }},
      {"start", [&](const std::string& v) {
         c.start_time = v.size() == 10 ? ingest::parse_timestamp(v + "T00:00:00") : ingest::parse_timestamp(v);
       }},
      {"initial_temp", num(c.initial_temp_c)},
      {"horizon", integer(c.mpc.horizon)},
      {"beta", num(c.mpc.beta)},
      {"r", num(c.mpc.r)},
      {"tau", num(c.mpc.tau)},
      {"tau_setback", num(c.mpc.tau_setback)},
      {"u_max", num(c.mpc.u_max)},
      {"u_min", num(c.mpc.u_min)},
      {"tolerance", num(c.mpc.solver_tolerance)},
      {"max_iterations", integer(c.mpc.max_iterations)},
      {"schedule_start", integer(c.mpc.schedule_start_hour)},
      {"schedule_end", integer(c.mpc.schedule_end_hour)},
      {"occupancy.start_hour", num(c.occupancy.start_hour)},
      {"occupancy.end_hour", num(c.occupancy.end_hour)},
      {"occupancy.jitter_minutes", num(c.occupancy.jitter_minutes)},
      {"occupancy.pulse_rate", num(c.occupancy.pulse_rate_per_hour)},
      {"occupancy.attendance", num(c.occupancy.attendance)},
      {"occupancy.drift_hours", num(c.occupancy.drift_hours)},
      {"occupancy.drift_day", integer(c.occupancy.drift_day)},
      {"occupancy.weekends", flag(c.occupancy.weekends)},
      {"building.length", num(c.building.length)},
      {"building.width", num(c.building.width)},
      {"building.height", num(c.building.height)},
      {"building.wall_layers", [&](const std::string& v) { c.building.wall_layers = to_layers(key, v); }},
      {"building.roof_layers", [&](const std::string& v) { c.building.roof_layers = to_layers(key, v); }},
      {"building.floor_layers", [&](const std::string& v) { c.building.floor_layers = to_layers(key, v); }},
      {"building.inside_film", num(c.building.inside_film)},
      {"building.outside_film", num(c.building.outside_film)},
      {"building.ground_contact", num(c.building.ground_contact)},
      {"building.window_area", num(c.building.window_area)},
      {"building.window_u", num(c.building.window_u)},
      {"building.air_changes_per_hour", num(c.building.air_changes_per_hour)},
      {"building.interior_mass_factor", num(c.building.interior_mass_factor)},
      {"weather.mean_c", num(c.weather.mean_c)},
      {"weather.daily_amplitude_c", num(c.weather.daily_amplitude_c)},
      {"weather.synoptic_amplitude_c", num(c.weather.synoptic_amplitude_c)},
      {"weather.synoptic_period_days", num(c.weather.synoptic_period_days)},
      {"weather.noise_c", num(c.weather.noise_c)},
      {"weather.ground_c", num(c.weather.ground_c)},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw InvalidArgument("unknown setting '" + key + "'");
  it->second(value);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  ScenarioConfig config;
  const auto base = std::filesystem::path(path).parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value' in '" + path + "'", line_no);
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if ((key == "pulse_file" || key == "weather_file" || key == "model_file") && !value.empty() &&
        std::filesystem::path(value).is_relative())
      value = (base / value).string();
    try {
      apply_setting(config, key, value);
    } catch (const InvalidArgument& e) {
      throw ParseError(std::string(e.what()) + " in '" + path + "'", line_no);
    }
  }
  return config;
}

ingest::OccupancySeries scenario_occupancy(const ScenarioConfig& config) {
  const Seconds start = config.effective_start();
  std::vector<ingest::PulseEvent> pulses;
  if (config.pulse_file.empty()) {
    SynthOccupancyParams p = config.occupancy;
    p.start_time = start;
    p.days = config.pretrain_days + config.days;
    p.dwell = config.dwell;
    pulses = synth_occupancy(config.seed, p);
  } else {
    pulses = ingest::read_pulse_csv(config.pulse_file);
  }
  const auto intervals = ingest::merge_pulses(pulses, config.dwell);
  return ingest::discretize(intervals, start, ingest::kHour, static_cast<std::size_t>(config.total_steps()));
}

ingest::WeatherSeries scenario_weather(const ScenarioConfig& config) {
  if (!config.weather_file.empty()) return ingest::read_weather_csv(config.weather_file);
  SynthWeatherParams p = config.weather;
  p.start_time = config.effective_start();
  p.days = config.pretrain_days + config.days + 2;
  return synth_weather(config.seed, p);
}

thermal::StateSpaceModel<double> scenario_plant(const ScenarioConfig& config) {
  if (!config.model_file.empty()) return thermal::read_model_file(config.model_file);
  return thermal::discretize(thermal::build_single_zone(config.building), ingest::kHour);
}

SimulationResult run_simulation(const ScenarioConfig& config) {
  config.validate();
  const Seconds start = config.effective_start();
  const Seconds step = ingest::kHour;
  const auto occ = scenario_occupancy(config);
  const auto weather = scenario_weather(config);
  const auto plant = scenario_plant(config);
  if (std::abs(plant.step_seconds - step) > 1e-9)
    throw InvalidArgument("thermal model step must be one hour");
  const Eigen::Index m = plant.boundaries();
  if (m < 1 || m > 2) throw DimensionMismatch("thermal model must take outdoor (and optionally ground) temperature");
  if (std::abs(weather.step_seconds - step) > 1e-9) throw InvalidArgument("weather must be hourly");
  const double offset = (start - weather.start_time) / step;
  if (offset < 0.0 || offset != std::floor(offset))
    throw InvalidArgument("weather file must start on the hour at or before the scenario start");
  const auto first_row = static_cast<std::size_t>(offset);
  const int total = config.total_steps();
  if (first_row + static_cast<std::size_t>(total) > weather.size())
    throw InvalidArgument("weather file does not cover the simulated period");
  auto boundary = [&](std::size_t k) -> Eigen::VectorXd {
    const Eigen::Vector2d w = weather.boundary(first_row + k);
    return m == 2 ? Eigen::VectorXd(w) : Eigen::VectorXd(w.head(1));
  };

  const MpcConfig<double>& mpc = config.mpc;
  const int horizon = mpc.horizon;
  const int pretrain_steps = config.pretrain_days * 24;
  OccupancyModel<double> model(config.period, config.grid_size, config.lambda);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(plant.states(), config.initial_temp_c);
  auto slot_of = [&](Seconds t) { return ingest::hour_of_day(t) % config.period; };
  auto weekend = [&](Seconds t) { return config.weekend_policy && ingest::is_weekend(t); };

  SimulationResult result;
  result.trace.step_seconds = step;
  result.trace.records.reserve(static_cast<std::size_t>(total - pretrain_steps));
  double pending_prediction = 0.0;
  Eigen::MatrixXd forecast(horizon, m);

  for (int k = 0; k < total; ++k) {
    const Seconds now = start + k * step;
    const Seconds prev_start = now - step;  // interval behind gamma_now
    const double gamma_now = k > 0 ? occ.gammas[k - 1] : 0.0;
    const int slot_now = slot_of(prev_start);
    const int clock_hour = ingest::hour_of_day(now);

    for (int j = 0; j < horizon; ++j) forecast.row(j) = boundary(static_cast<std::size_t>(k + j)).transpose();
    const auto aug = thermal::augment(plant, mpc.tau, forecast);
    const Eigen::VectorXd xt = aug.initial_state(x);

    ControlDecision<double> decision;
    try {
      if (weekend(now)) {
        decision = setback_controller(aug, xt, mpc);
      } else {
        switch (config.controller) {
          case ControllerKind::kPredictive:
            decision = solve_mpc(aug, xt, gamma_now, model, slot_now, mpc);
            break;
          case ControllerKind::kTriggered:
            decision = triggered_controller(aug, xt, gamma_now, mpc);
            break;
          case ControllerKind::kScheduled:
            decision = scheduled_controller(aug, xt, gamma_now, clock_hour, mpc);
            break;
        }
      }
    } catch (const SolverFailure& e) {
      throw SolverFailure(std::string(e.what()) + " at step " + std::to_string(k));
    }
    const double u = decision.applied_u;

    // Train on the transition that just completed, then predict the next hour.
    if (k >= 2) {
      const Seconds before = prev_start - step;
      if (!weekend(before) && !weekend(prev_start))
        model.train(slot_of(before), occ.gammas[k - 2], gamma_now);
    }

    if (k >= pretrain_steps) {
      TraceRecord rec;
      rec.clock = now;
      rec.gamma_observed = gamma_now;
      rec.gamma_predicted = pending_prediction;
      rec.zone_c = x(plant.zone_index);
      rec.outdoor_c = boundary(static_cast<std::size_t>(k))(0);
      rec.u_w = u;
      rec.discomfort = gamma_now * std::abs(rec.zone_c - mpc.tau) * (step / ingest::kHour);
      rec.energy_kwh = u * step / 3.6e6;
      result.trace.records.push_back(rec);
    }
    pending_prediction = predict(model, slot_now, gamma_now, 1);
    x = thermal::simulate_step(plant, x, u, boundary(static_cast<std::size_t>(k)));
  }
  result.metrics = compute_metrics(result.trace);
  result.model = std::move(model);
  return result;
}

double savings_percent(double reference_kwh, double self_kwh) {
  if (!(reference_kwh > 0.0)) throw InvalidArgument("reference energy must be positive");
  return (reference_kwh - self_kwh) / reference_kwh * 100.0;
}

MetricsSummary compute_metrics(const SimulationTrace& trace, double bin_width) {
  if (!(bin_width > 0.0)) throw InvalidArgument("histogram bin width must be positive");
  MetricsSummary s;
  s.histogram_bin_width = bin_width;
  const auto& r = trace.records;
  for (const auto& rec : r) {
    s.total_discomfort += rec.discomfort;
    s.peak_discomfort = std::max(s.peak_discomfort, rec.discomfort);
    s.total_energy_kwh += rec.energy_kwh;
  }
  if (!r.empty()) {
    const double mean = s.total_discomfort / static_cast<double>(r.size());
    double ss = 0.0;
    for (const auto& rec : r) ss += (rec.discomfort - mean) * (rec.discomfort - mean);
    s.discomfort_variance = ss / static_cast<double>(r.size());
  }
  const auto bins = static_cast<std::size_t>(std::floor(s.peak_discomfort / bin_width)) + 1;
  s.histogram_counts.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) s.histogram_edges.push_back(static_cast<double>(b) * bin_width);
  for (const auto& rec : r) {
    auto b = static_cast<std::size_t>(std::floor(rec.discomfort / bin_width));
    ++s.histogram_counts[std::min(b, bins - 1)];
  }
  return s;
}

std::vector<SweepPoint> lambda_sweep(const ingest::OccupancySeries& series, const std::vector<double>& lambdas,
                                     int period, Eigen::Index grid_size, bool skip_weekends,
                                     std::size_t window) {
  const auto& g = series.gammas;
  auto slot_of = [&](std::size_t s) {
    return ingest::hour_of_day(series.start_time + static_cast<double>(s) * series.step_seconds) % period;
  };
  auto skipped = [&](std::size_t s) {
    return skip_weekends &&
           ingest::is_weekend(series.start_time + static_cast<double>(s) * series.step_seconds);
  };
  std::vector<SweepPoint> out;
  for (double lambda : lambdas) {
    OccupancyModel<double> model(period, grid_size, lambda);
    std::vector<double> sq;
    for (std::size_t s = 1; s < g.size(); ++s) {
      if (skipped(s - 1) || skipped(s)) continue;
      const int slot = slot_of(s - 1);
      const double err = predict(model, slot, g[s - 1], 1) - g[s];
      sq.push_back(err * err);
      model.train(slot, g[s - 1], g[s]);
    }
    SweepPoint p;
    p.lambda = lambda;
    p.evaluated = sq.size();
    if (!sq.empty()) {
      double total = 0.0;
      for (double v : sq) total += v;
      p.rms = std::sqrt(total / static_cast<double>(sq.size()));
      const std::size_t w = std::min(window, sq.size());
      double tail = 0.0;
      for (std::size_t i = sq.size() - w; i < sq.size(); ++i) tail += sq[i];
      p.final_window_rms = w ? std::sqrt(tail / static_cast<double>(w)) : 0.0;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<SweepPoint> lambda_sweep(const ScenarioConfig& config, const std::vector<double>& lambdas) {
  config.validate();
  for (double l : lambdas)
    if (!(l >= 0.0 && l <= 1.0)) throw InvalidArgument("lambda values must lie in [0,1]");
  return lambda_sweep(scenario_occupancy(config), lambdas, config.period, config.grid_size,
                      config.weekend_policy);
}

PreconditioningReport preconditioning(const SimulationTrace& trace) {
  const auto& r = trace.records;
  // Index of the first record of each weekday whose observed occupancy is
  // positive; its interval started one step before the record's clock.
  std::map<long long, std::size_t> onset_by_day;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i].gamma_observed <= 0.0) continue;
    const Seconds interval_start = r[i].clock - trace.step_seconds;
    if (ingest::is_weekend(interval_start)) continue;
    const auto day = static_cast<long long>(std::floor(interval_start / 86400.0));
    onset_by_day.try_emplace(day, i);
  }
  PreconditioningReport report;
  std::map<int, int> hour_counts;
  for (const auto& [day, i] : onset_by_day) ++hour_counts[ingest::hour_of_day(r[i].clock - trace.step_seconds)];
  if (hour_counts.empty()) return report;
  report.onset_hour =
      std::max_element(hour_counts.begin(), hour_counts.end(), [](const auto& a, const auto& b) {
        return a.second < b.second;
      })->first;
  for (const auto& [day, i] : onset_by_day) {
    if (ingest::hour_of_day(r[i].clock - trace.step_seconds) != report.onset_hour) continue;
    if (i < 2) continue;
    ++report.eligible_days;
    // Record i-2 applies heat over the hour ending at the onset.
    if (r[i - 2].u_w > 0.0) ++report.preheated_days;
  }
  return report;
}

}  // namespace occmpc::harness
