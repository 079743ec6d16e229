#include "occmpc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "occmpc/error.hpp"

namespace occmpc::ingest {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_number(const std::string& text, double& value) {
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last && std::isfinite(value);
}

// Reads all lines, checks the header, and returns (line number, fields) for
// every nonblank data row.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_table(
    const std::string& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (!saw_header) {
      if (fields != header) {
        std::string expected;
        for (std::size_t i = 0; i < header.size(); ++i) expected += (i ? "," : "") + header[i];
        throw ParseError("expected header '" + expected + "' in '" + path + "'", line_no);
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()) + " in '" + path + "'",
                       line_no);
    rows.emplace_back(line_no, std::move(fields));
  }
  if (!saw_header) throw FormatError("file '" + path + "' is empty");
  return rows;
}

}  // namespace

Eigen::Vector2d WeatherSeries::boundary(std::size_t k) const {
  if (outdoor_dry_bulb.empty()) throw InvalidArgument("weather series is empty");
  const std::size_t i = std::min(k, outdoor_dry_bulb.size() - 1);
  return {outdoor_dry_bulb[i], ground_temp[i]};
}

std::vector<Interval> merge_pulses(std::span<const PulseEvent> events, Seconds dwell) {
  if (!(dwell > 0.0)) throw InvalidArgument("dwell time must be positive");
  std::vector<Interval> merged;
  for (const auto& e : events) {
    if (!merged.empty() && e.timestamp < merged.back().start)
      throw InvalidArgument("pulse events must be sorted by timestamp");
    const Interval next{e.timestamp, e.timestamp + dwell};
    if (!merged.empty() && next.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, next.end);
    } else {
      merged.push_back(next);
    }
  }
  return merged;
}

OccupancySeries discretize(std::span<const Interval> intervals, Seconds start_time,
                           Seconds step_seconds, std::size_t n_steps) {
  if (!(step_seconds > 0.0)) throw InvalidArgument("step length must be positive");
  OccupancySeries series;
  series.start_time = start_time;
  series.step_seconds = step_seconds;
  series.gammas.assign(n_steps, 0.0);
  std::size_t first = 0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const Seconds lo = start_time + static_cast<double>(k) * step_seconds;
    const Seconds hi = lo + step_seconds;
    while (first < intervals.size() && intervals[first].end <= lo) ++first;
    double covered = 0.0;
    for (std::size_t i = first; i < intervals.size() && intervals[i].start < hi; ++i)
      covered += std::max(0.0, std::min(hi, intervals[i].end) - std::max(lo, intervals[i].start));
    series.gammas[k] = std::clamp(covered / step_seconds, 0.0, 1.0);
  }
  return series;
}

Seconds epoch_from_date(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) throw InvalidArgument("invalid calendar date");
  return static_cast<Seconds>(duration_cast<seconds>(sys_days{ymd}.time_since_epoch()).count());
}

int hour_of_day(Seconds t) {
  const double in_day = t - 86400.0 * std::floor(t / 86400.0);
  return static_cast<int>(std::floor(in_day / kHour)) % 24;
}

int day_of_week(Seconds t) {
  // 1970-01-01 was a Thursday.
  const auto days = static_cast<long long>(std::floor(t / 86400.0));
  return static_cast<int>(((days + 3) % 7 + 7) % 7);
}

Seconds parse_timestamp(const std::string& raw) {
  const std::string text = trim(raw);
  double value = 0.0;
  if (parse_number(text, value)) return value;
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0;
  double s = 0.0;
  char sep = 0;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%4d-%2u-%2u%c%2u:%2u:%lf%n", &y, &mo, &d, &sep, &h, &mi, &s,
                  &consumed) != 7 ||
      (sep != 'T' && sep != ' '))
    throw InvalidArgument("unrecognized timestamp '" + text + "'");
  const std::string rest = text.substr(static_cast<std::size_t>(consumed));
  if (!(rest.empty() || rest == "Z" || rest == "+00:00"))
    throw InvalidArgument("only UTC timestamps are supported: '" + text + "'");
  if (h > 23 || mi > 59 || s < 0.0 || s >= 61.0)
    throw InvalidArgument("time of day out of range in '" + text + "'");
  return epoch_from_date(y, mo, d) + h * 3600.0 + mi * 60.0 + s;
}

std::string format_iso8601(Seconds t) {
  using namespace std::chrono;
  const auto whole = static_cast<long long>(std::floor(t));
  const auto day_count = static_cast<long long>(std::floor(static_cast<double>(whole) / 86400.0));
  const year_month_day ymd{sys_days{days{day_count}}};
  long long rem = whole - day_count * 86400;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), rem / 3600, (rem % 3600) / 60,
                rem % 60);
  return buf;
}

std::vector<PulseEvent> read_pulse_csv(const std::string& path) {
  std::vector<PulseEvent> events;
  for (auto& [line, fields] : read_table(path, {"timestamp", "sensor_id"})) {
    PulseEvent e;
    try {
      e.timestamp = parse_timestamp(fields[0]);
    } catch (const InvalidArgument& err) {
      throw ParseError(std::string(err.what()) + " in '" + path + "'", line);
    }
    e.sensor_id = fields[1];
    events.push_back(std::move(e));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const PulseEvent& a, const PulseEvent& b) { return a.timestamp < b.timestamp; });
  return events;
}

WeatherSeries read_weather_csv(const std::string& path) {
  WeatherSeries w;
  std::vector<Seconds> stamps;
  for (auto& [line, fields] : read_table(path, {"timestamp", "dry_bulb_c", "ground_c"})) {
    double dry = 0.0, ground = 0.0;
    Seconds t = 0.0;
    try {
      t = parse_timestamp(fields[0]);
    } catch (const InvalidArgument& err) {
      throw ParseError(std::string(err.what()) + " in '" + path + "'", line);
    }
    if (!parse_number(fields[1], dry) || !parse_number(fields[2], ground))
      throw ParseError("malformed temperature in '" + path + "'", line);
    if (stamps.size() >= 2) {
      const Seconds step = stamps[1] - stamps[0];
      if (std::abs((t - stamps.back()) - step) > 1e-6)
        throw ParseError("weather rows must be evenly spaced in '" + path + "'", line);
    } else if (stamps.size() == 1 && !(t > stamps[0])) {
      throw ParseError("weather timestamps must increase in '" + path + "'", line);
    }
    stamps.push_back(t);
    w.outdoor_dry_bulb.push_back(dry);
    w.ground_temp.push_back(ground);
  }
  if (stamps.empty()) throw FormatError("weather file '" + path + "' has no rows");
  w.start_time = stamps.front();
  w.step_seconds = stamps.size() >= 2 ? stamps[1] - stamps[0] : kHour;
  return w;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::string format_stamp(Seconds t) {
  std::ostringstream s;
  if (t == std::floor(t)) {
    s << static_cast<long long>(t);
  } else {
    s << std::setprecision(17) << t;
  }
  return s.str();
}

}  // namespace

void write_pulse_csv(std::span<const PulseEvent> events, const std::string& path) {
  auto out = open_out(path);
  out << "timestamp,sensor_id\n";
  for (const auto& e : events) out << format_stamp(e.timestamp) << ',' << e.sensor_id << '\n';
}

void write_weather_csv(const WeatherSeries& weather, const std::string& path) {
  auto out = open_out(path);
  out << "timestamp,dry_bulb_c,ground_c\n" << std::setprecision(10);
  for (std::size_t k = 0; k < weather.size(); ++k) {
    out << format_stamp(weather.start_time + static_cast<double>(k) * weather.step_seconds) << ','
        << weather.outdoor_dry_bulb[k] << ',' << weather.ground_temp[k] << '\n';
  }
}

void write_occupancy_csv(const OccupancySeries& series, const std::string& path) {
  auto out = open_out(path);
  out << "step_index,gamma\n" << std::setprecision(17);
  for (std::size_t k = 0; k < series.gammas.size(); ++k) out << k << ',' << series.gammas[k] << '\n';
}

}  // namespace occmpc::ingest
