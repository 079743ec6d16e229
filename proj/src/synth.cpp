#include <cmath>
#include <numbers>
#include <random>

#include "occmpc/harness.hpp"

namespace occmpc::harness {

std::vector<ingest::PulseEvent> synth_occupancy(std::uint64_t seed, const SynthOccupancyParams& p) {
  if (p.days < 0) throw InvalidArgument("day count must be nonnegative");
  if (p.pulse_rate_per_hour < 0.0 || p.jitter_minutes < 0.0)
    throw InvalidArgument("pulse rate and jitter must be nonnegative");
  std::vector<ingest::PulseEvent> events;
  if (p.pulse_rate_per_hour == 0.0) return events;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, p.jitter_minutes / 60.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::exponential_distribution<double> gap(p.pulse_rate_per_hour / ingest::kHour);

  for (int d = 0; d < p.days; ++d) {
    const Seconds midnight = p.start_time + d * 86400.0;
    // Draw every variate for every day so a day's schedule does not depend
    // on whether earlier days were skipped.
    const double attend = coin(rng);
    const double shift = (p.drift_day >= 0 && d >= p.drift_day) ? p.drift_hours : 0.0;
    const double begin_h = p.start_hour + shift + jitter(rng);
    const double end_h = p.end_hour + shift + jitter(rng);
    if (!p.weekends && ingest::is_weekend(midnight)) continue;
    if (attend >= p.attendance || end_h <= begin_h) continue;

    const Seconds begin = midnight + begin_h * ingest::kHour;
    // The dwell appended to the last pulse carries occupancy to `end`.
    const Seconds last = midnight + end_h * ingest::kHour - p.dwell;
    for (Seconds t = begin; t <= std::max(last, begin); t += gap(rng)) events.push_back({t, p.sensor_id});
  }
  return events;
}

ingest::WeatherSeries synth_weather(std::uint64_t seed, const SynthWeatherParams& p) {
  if (p.days < 0) throw InvalidArgument("day count must be nonnegative");
  if (!(p.synoptic_period_days > 0.0)) throw InvalidArgument("synoptic period must be positive");
  std::mt19937_64 rng(seed ^ 0x5eedf00dULL);
  std::normal_distribution<double> noise(0.0, p.noise_c);
  ingest::WeatherSeries w;
  w.start_time = p.start_time;
  w.step_seconds = ingest::kHour;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int k = 0; k < p.days * 24; ++k) {
    const Seconds t = p.start_time + k * ingest::kHour;
    const double hour = ingest::hour_of_day(t);
    const double day = k / 24.0;
    const double daily = -p.daily_amplitude_c * std::cos(two_pi * (hour - 5.0) / 24.0);
    const double synoptic = p.synoptic_amplitude_c * std::sin(two_pi * day / p.synoptic_period_days);
    const double eps = p.noise_c > 0.0 ? noise(rng) : 0.0;
    w.outdoor_dry_bulb.push_back(p.mean_c + daily + synoptic + eps);
    w.ground_temp.push_back(p.ground_c);
  }
  return w;
}

}  // namespace occmpc::harness
