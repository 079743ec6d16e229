// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "occmpc/control.hpp"
#include "occmpc/harness.hpp"
#include "occmpc/occupancy.hpp"
#include "occmpc/thermal.hpp"

using namespace occmpc;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0.0 && secs >= limit_s) {
    o.pass = false;
    o.detail += " [over time limit]";
  }
  if (!o.pass) ++failures;
  std::printf("%s  %2d %-28s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Every boolean sequence of length <= depth, walked as a prefix tree so each
// node costs one update.
void walk(const ProbabilityGrid<double>& g, int n1, int n0, int depth, double& worst, long& visited) {
  const double expect = (n1 + 1.0) / (n1 + n0 + 2.0);
  worst = std::max(worst, std::abs(expected_bias(g) - expect));
  ++visited;
  if (n1 + n0 == depth) return;
  walk(bayes_update(g, true), n1 + 1, n0, depth, worst, visited);
  walk(bayes_update(g, false), n1, n0 + 1, depth, worst, visited);
}

Outcome conjugate_oracle() {
  double worst = 0.0;
  long visited = 0;
  walk(ProbabilityGrid<double>::uniform(201), 0, 0, 20, worst, visited);
  return {worst < 1e-4, fmt("%.0f sequences, max |err| %.3g", double(visited), worst)};
}

Outcome normalization() {
  auto model = new_model(24, 201, 0.974);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> slot(0, 23);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const int k = slot(rng);
    model.train(k, unit(rng), unit(rng));
    worst = std::max({worst, std::abs(model.occupied(k).integral() - 1.0), std::abs(model.vacant(k).integral() - 1.0)});
  }
  for (int k = 0; k < 24; ++k)
    worst = std::max({worst, std::abs(model.occupied(k).integral() - 1.0), std::abs(model.vacant(k).integral() - 1.0)});
  return {worst <= 1e-9, fmt("10000 updates, max |mass - 1| %.3g", worst)};
}

Outcome transition_properties() {
  const int m = 24;
  auto model = new_model(m, 201, 0.974);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) model.train(i % m, unit(rng), unit(rng));
  const MatrixXd p = transition_matrix(model);
  double row_err = 0.0;
  bool two_nonzeros = true;
  for (int i = 0; i < 2 * m; ++i) {
    row_err = std::max(row_err, std::abs(p.row(i).sum() - 1.0));
    two_nonzeros = two_nonzeros && (p.row(i).array() != 0.0).count() == 2;
  }
  bool one_step_exact = true;
  double two_step_err = 0.0;
  for (int k = 0; k < m; ++k) {
    const int k1 = (k + 1) % m;
    one_step_exact = one_step_exact && predict(model, k, 1.0, 1) == model.stay_occupied(k) &&
                     predict(model, k, 0.0, 1) == model.become_occupied(k);
    for (double g : {0.0, 1.0}) {
      // Paths: now -> {occ, vac} -> occ.
      const double to_occ = g == 1.0 ? model.stay_occupied(k) : model.become_occupied(k);
      const double expect = to_occ * model.stay_occupied(k1) + (1.0 - to_occ) * model.become_occupied(k1);
      two_step_err = std::max(two_step_err, std::abs(predict(model, k, g, 2) - expect));
    }
  }
  const bool pass = row_err <= 1e-9 && two_nonzeros && one_step_exact && two_step_err <= 1e-9;
  return {pass, fmt("row err %.2g, j=2 err %.2g", row_err, two_step_err) +
                    (two_nonzeros ? ", 2 nonzeros/row" : ", nonzero count wrong") +
                    (one_step_exact ? ", j=1 exact" : ", j=1 inexact")};
}

double shift_at(double lambda, int iteration) {
  auto model = new_model(1, 201, lambda);
  double prev = model.stay_occupied(0), shift = 0.0;
  for (int i = 1; i <= iteration; ++i) {
    model.train(0, 1.0, (i % 2) ? 1.0 : 0.0);
    const double now = model.stay_occupied(0);
    shift = std::abs(now - prev);
    prev = now;
  }
  return shift;
}

Outcome forgetting_behavior() {
  const double forgetful = shift_at(0.85, 50);
  const double stubborn = shift_at(1.0, 50);
  const double ratio = forgetful / stubborn;
  return {ratio >= 5.0, fmt("shift at 50: %.4g (0.85) vs %.4g (1.0), ratio %.2f", forgetful, stubborn, ratio)};
}

Outcome lambda_sweep_shape() {
  harness::ScenarioConfig c;
  c.occupancy.drift_hours = 2.0;
  c.occupancy.drift_day = 31;
  std::vector<double> lambdas{0.5, 1.0};
  for (int i = 90; i <= 99; ++i) lambdas.push_back(i / 100.0);
  const auto sweep = harness::lambda_sweep(c, lambdas);
  double r05 = 0.0, r10 = 0.0, best = std::numeric_limits<double>::infinity(), best_l = 0.0;
  for (const auto& p : sweep) {
    if (p.lambda == 0.5) r05 = p.rms;
    else if (p.lambda == 1.0) r10 = p.rms;
    else if (p.rms < best) {
      best = p.rms;
      best_l = p.lambda;
    }
  }
  return {best < r10 && best < r05,
          fmt("min %.4f at %.2f; rms(1.0) %.4f, rms(0.5) %.4f", best, best_l, r10, r05)};
}

Outcome thermal_invariants() {
  const auto net = thermal::build_single_zone(thermal::demo_building());
  const auto one = thermal::discretize<double>(net, 3600.0);
  const auto two = thermal::discretize<double>(net, 7200.0);
  const long n = one.states();
  const MatrixXd eye = MatrixXd::Identity(n, n);
  const VectorXd dc = (eye - one.A).lu().solve(one.B_w * VectorXd::Ones(one.boundaries()));
  const double dc_err = (dc.array() - 1.0).abs().maxCoeff();
  const double rho = thermal::spectral_radius(one);
  const double semi = std::max({(two.A - one.A * one.A).cwiseAbs().maxCoeff(),
                                (two.B_w - (one.A * one.B_w + one.B_w)).cwiseAbs().maxCoeff(),
                                ((two.B_u - (one.A * one.B_u + one.B_u)) / one.B_u.cwiseAbs().maxCoeff())
                                    .cwiseAbs()
                                    .maxCoeff()});
  const auto trace = thermal::step_response_report(one, 20.0, 0.0, 24 * 21);
  bool monotone = true;
  for (std::size_t i = 1; i < trace.size(); ++i) monotone = monotone && trace[i] <= trace[i - 1];
  const double final_gap = std::abs(trace.back());
  const bool pass = dc_err <= 1e-9 && rho < 1.0 && semi <= 1e-9 && monotone && final_gap <= 0.1;
  return {pass, fmt("dc err %.2g, rho %.6f, semigroup err %.2g, final gap %.3g", dc_err, rho, semi, final_gap) +
                    (monotone ? ", monotone" : ", NOT monotone")};
}

double rollout(const thermal::StateSpaceModel<double>& plant, double x0, const VectorXd& u, const VectorXd& w,
               double outdoor, const MpcConfig<double>& c) {
  VectorXd x = VectorXd::Constant(1, x0);
  double total = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    total += stage_cost(x(0), c.tau, u(j), w(j), c.beta, c.energy_gain(static_cast<int>(j)));
    x = thermal::simulate_step(plant, x, u(j), VectorXd::Constant(1, outdoor));
  }
  return total;
}

Outcome mpc_oracle() {
  thermal::RcNetwork net;
  net.capacitances = {2e6};
  net.source_labels = {"outdoor"};
  net.boundary_links = {{0, 0, 150.0}};
  const auto plant = thermal::discretize<double>(net, 3600.0);
  const int levels = 81;
  int cases = 0, passed = 0;
  double worst_cells = 0.0;
  struct Case {
    double x0, outdoor, beta, r;
  };
  for (const Case& cs : {Case{12.0, 0.0, 1.0, 1e-3}, Case{20.0, 5.0, 1.0, 1e-2}, Case{22.5, -10.0, 0.3, 2e-3},
                         Case{5.0, -15.0, 2.0, 1e-3}}) {
    for (int n = 1; n <= 3; ++n) {
      MpcConfig<double> c;
      c.horizon = n;
      c.beta = cs.beta;
      c.r = cs.r;
      c.u_max = 6000.0;
      const double cell = c.u_max / (levels - 1);
      MatrixXd forecast = MatrixXd::Constant(n, 1, cs.outdoor);
      const auto aug = thermal::augment(plant, c.tau, forecast);
      VectorXd w(n);
      for (int j = 0; j < n; ++j) w(j) = 0.3 + 0.35 * j;
      const auto d = solve_weighted(aug, aug.initial_state(VectorXd::Constant(1, cs.x0)), w, c);

      long total = 1;
      for (int j = 0; j < n; ++j) total *= levels;
      double best = std::numeric_limits<double>::infinity();
      VectorXd best_u(n), u(n);
      for (long code = 0; code < total; ++code) {
        long k = code;
        for (int j = 0; j < n; ++j, k /= levels) u(j) = double(k % levels) * cell;
        const double v = rollout(plant, cs.x0, u, w, cs.outdoor, c);
        if (v < best) {
          best = v;
          best_u = u;
        }
      }
      // Objective gap allowed: what snapping the QP optimum to the grid costs.
      VectorXd snapped = (d.u_sequence / cell).array().round() * cell;
      const double qp = rollout(plant, cs.x0, d.u_sequence, w, cs.outdoor, c);
      const double gap = rollout(plant, cs.x0, snapped, w, cs.outdoor, c) - qp;
      const double cells = (d.u_sequence - best_u).cwiseAbs().maxCoeff() / cell;
      worst_cells = std::max(worst_cells, cells);
      ++cases;
      if (cells <= 1.0 && qp <= best + 1e-9 * std::max(1.0, best) && best - qp <= gap + 1e-9) ++passed;
    }
  }
  return {passed == cases, fmt("%.0f/%.0f cases, max distance %.3f cells", passed, cases, worst_cells)};
}

Outcome zero_occupancy() {
  const auto plant = thermal::discretize<double>(thermal::build_single_zone(thermal::demo_building()), 3600.0);
  int cases = 0, exact = 0;
  for (int n : {1, 6, 24, 36}) {
    for (double x0 : {-5.0, 10.0, 30.0}) {
      for (double u_min : {0.0, -5000.0}) {
        MpcConfig<double> c;
        c.horizon = n;
        c.u_min = u_min;
        const MatrixXd forecast = MatrixXd::Constant(n, plant.boundaries(), -8.0);
        const auto aug = thermal::augment(plant, c.tau, forecast);
        const VectorXd w = VectorXd::Zero(n);
        const auto d = solve_weighted(aug, aug.initial_state(VectorXd::Constant(plant.states(), x0)), w, c);
        ++cases;
        if ((d.u_sequence.array() == 0.0).all()) ++exact;
      }
    }
  }
  return {exact == cases, fmt("%.0f/%.0f horizons with u identically zero", exact, cases)};
}

struct Comparison {
  harness::SimulationResult predictive, triggered, scheduled;
};

const Comparison& comparison() {
  static const Comparison cmp = [] {
    harness::ScenarioConfig c;
    Comparison out;
    c.controller = harness::ControllerKind::kPredictive;
    out.predictive = harness::run_simulation(c);
    c.controller = harness::ControllerKind::kTriggered;
    out.triggered = harness::run_simulation(c);
    c.controller = harness::ControllerKind::kScheduled;
    out.scheduled = harness::run_simulation(c);
    return out;
  }();
  return cmp;
}

Outcome controller_table() {
  const auto& cmp = comparison();
  const auto& p = cmp.predictive.metrics;
  const auto& t = cmp.triggered.metrics;
  const auto& s = cmp.scheduled.metrics;
  const double savings = harness::savings_percent(s.total_energy_kwh, p.total_energy_kwh);
  const bool energy = t.total_energy_kwh < p.total_energy_kwh && p.total_energy_kwh < s.total_energy_kwh;
  const bool peak = s.peak_discomfort < p.peak_discomfort && p.peak_discomfort < t.peak_discomfort;
  const bool ok = energy && peak && savings >= 10.0 && p.peak_discomfort <= 0.6 * t.peak_discomfort;
  return {ok, fmt("kWh T/P/S %.0f/%.0f/%.0f, ", t.total_energy_kwh, p.total_energy_kwh, s.total_energy_kwh) +
                  fmt("peak S/P/T %.2f/%.2f/%.2f, ", s.peak_discomfort, p.peak_discomfort, t.peak_discomfort) +
                  fmt("savings %.1f%%", savings)};
}

Outcome preconditioning() {
  const auto rep = harness::preconditioning(comparison().predictive.trace);
  return {rep.eligible_days > 0 && rep.fraction() >= 0.8,
          fmt("%.0f/%.0f weekdays with onset at %02.0f:00 preheated", rep.preheated_days, rep.eligible_days,
              rep.onset_hour)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "occmpc_acceptance_determinism";
  fs::remove_all(dir);
  harness::ScenarioConfig c;
  c.seed = 17;
  for (const char* run : {"a", "b"}) {
    const auto r = harness::run_simulation(c);
    harness::emit_reports(r.trace, r.metrics, (dir / run).string());
  }
  bool same = true;
  std::size_t bytes = 0;
  for (const char* f : {"trace.csv", "metrics.txt", "histogram.csv"}) {
    const auto a = slurp(dir / "a" / f);
    same = same && !a.empty() && a == slurp(dir / "b" / f);
    bytes += a.size();
  }
  fs::remove_all(dir);
  return {same, fmt("%.0f bytes compared", double(bytes))};
}

}  // namespace

int main() {
  run(1, "conjugate oracle", 1.0, conjugate_oracle);
  run(2, "normalization endurance", 10.0, normalization);
  run(3, "transition matrix", 0.0, transition_properties);
  run(4, "forgetting behavior", 0.0, forgetting_behavior);
  run(5, "lambda sweep shape", 60.0, lambda_sweep_shape);
  run(6, "thermal invariants", 0.0, thermal_invariants);
  run(7, "mpc grid oracle", 30.0, mpc_oracle);
  run(8, "zero occupancy optimality", 0.0, zero_occupancy);
  run(9, "controller comparison", 300.0, controller_table);
  run(10, "pre-conditioning", 0.0, preconditioning);
  run(11, "determinism", 0.0, determinism);
  std::printf("%d/11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
