#include <cstdio>
#include <filesystem>
#include <fstream>

#include "occmpc/harness.hpp"

namespace occmpc::harness {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

}  // namespace

void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
  auto out = open_out(path);
  out << "time,gamma,gamma_predicted,zone_c,outdoor_c,u_w,discomfort,energy_kwh\n";
  for (const auto& r : trace.records)
    out << ingest::format_iso8601(r.clock) << ',' << num(r.gamma_observed) << ',' << num(r.gamma_predicted)
        << ',' << num(r.zone_c) << ',' << num(r.outdoor_c) << ',' << num(r.u_w) << ',' << num(r.discomfort)
        << ',' << num(r.energy_kwh) << '\n';
}

void write_metrics(const MetricsSummary& m, const std::string& path) {
  auto out = open_out(path);
  out << "total_discomfort " << num(m.total_discomfort) << '\n'
      << "peak_discomfort " << num(m.peak_discomfort) << '\n'
      << "discomfort_variance " << num(m.discomfort_variance) << '\n'
      << "total_energy_kwh " << num(m.total_energy_kwh) << '\n';
  if (m.savings_vs_reference) out << "savings_percent " << num(*m.savings_vs_reference) << '\n';
}

void write_histogram_csv(const MetricsSummary& m, const std::string& path) {
  auto out = open_out(path);
  out << "bin_low,bin_high,count\n";
  for (std::size_t b = 0; b < m.histogram_counts.size(); ++b)
    out << num(m.histogram_edges[b]) << ',' << num(m.histogram_edges[b + 1]) << ',' << m.histogram_counts[b]
        << '\n';
}

void write_sweep_csv(const std::vector<SweepPoint>& sweep, const std::string& path) {
  auto out = open_out(path);
  out << "lambda,rms,final_window_rms,evaluated\n";
  for (const auto& p : sweep)
    out << num(p.lambda) << ',' << num(p.rms) << ',' << num(p.final_window_rms) << ',' << p.evaluated << '\n';
}

void emit_reports(const SimulationTrace& trace, const MetricsSummary& metrics, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  const std::filesystem::path dir(out_dir);
  write_trace_csv(trace, (dir / "trace.csv").string());
  write_metrics(metrics, (dir / "metrics.txt").string());
  write_histogram_csv(metrics, (dir / "histogram.csv").string());
}

void write_comparison(const std::map<std::string, MetricsSummary>& results, const std::string& reference,
                      const std::string& path) {
  const auto ref = results.find(reference);
  if (ref == results.end()) throw InvalidArgument("reference controller '" + reference + "' not in results");
  auto out = open_out(path);
  out << "controller,total_energy_kwh,total_discomfort,peak_discomfort,discomfort_variance,savings_percent\n";
  for (const auto& [name, m] : results)
    out << name << ',' << num(m.total_energy_kwh) << ',' << num(m.total_discomfort) << ','
        << num(m.peak_discomfort) << ',' << num(m.discomfort_variance) << ','
        << num(savings_percent(ref->second.total_energy_kwh, m.total_energy_kwh)) << '\n';
}

}  // namespace occmpc::harness
