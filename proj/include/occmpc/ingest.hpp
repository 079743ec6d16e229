#pragma once

// Sensor pulse logs and weather files to fixed-step sequences.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace occmpc::ingest {

/// Seconds since the Unix epoch (UTC). Fractional seconds allowed.
using Seconds = double;

inline constexpr Seconds kDefaultDwell = 900.0;
inline constexpr Seconds kHour = 3600.0;

struct PulseEvent {
  Seconds timestamp = 0.0;
  std::string sensor_id;
};

/// Half-open occupied interval [start, end).
struct Interval {
  Seconds start = 0.0;
  Seconds end = 0.0;
  Seconds length() const { return end - start; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Fractional occupancy per step; gammas[k] covers
/// [start_time + k*step, start_time + (k+1)*step).
struct OccupancySeries {
  Seconds start_time = 0.0;
  Seconds step_seconds = kHour;
  std::vector<double> gammas;
};

struct WeatherSeries {
  Seconds start_time = 0.0;
  Seconds step_seconds = kHour;
  std::vector<double> outdoor_dry_bulb;
  std::vector<double> ground_temp;

  std::size_t size() const { return outdoor_dry_bulb.size(); }
  /// Boundary temperatures [outdoor, ground] for step k; holds the last
  /// row beyond the end of the file.
  Eigen::Vector2d boundary(std::size_t k) const;
};

/// Extends each pulse forward by `dwell` and coalesces overlapping or
/// touching intervals. Events must be sorted by timestamp.
std::vector<Interval> merge_pulses(std::span<const PulseEvent> events, Seconds dwell = kDefaultDwell);

/// Duty cycle of the interval signal on a fixed grid of `n_steps` steps.
OccupancySeries discretize(std::span<const Interval> intervals, Seconds start_time,
                           Seconds step_seconds, std::size_t n_steps);

// CSV files. Pulse: "timestamp,sensor_id". Weather:
// "timestamp,dry_bulb_c,ground_c". Occupancy output: "step_index,gamma".
// Timestamps are integer epoch seconds or ISO-8601 "YYYY-MM-DDTHH:MM:SS[Z]".
std::vector<PulseEvent> read_pulse_csv(const std::string& path);
WeatherSeries read_weather_csv(const std::string& path);
void write_pulse_csv(std::span<const PulseEvent> events, const std::string& path);
void write_weather_csv(const WeatherSeries& weather, const std::string& path);
void write_occupancy_csv(const OccupancySeries& series, const std::string& path);

/// Parses an epoch integer/decimal or an ISO-8601 UTC timestamp.
Seconds parse_timestamp(const std::string& text);
std::string format_iso8601(Seconds t);

/// Epoch seconds of a UTC civil date at midnight.
Seconds epoch_from_date(int year, unsigned month, unsigned day);
/// Hour of day in [0,24), UTC.
int hour_of_day(Seconds t);
/// Day of week, Monday = 0 ... Sunday = 6, UTC.
int day_of_week(Seconds t);
inline bool is_weekend(Seconds t) { return day_of_week(t) >= 5; }

}  // namespace occmpc::ingest
