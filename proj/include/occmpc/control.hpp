#pragma once

// Occupancy-weighted finite-horizon heating control and the triggered and
// scheduled baselines, all posed as the same box-constrained QP:
//
//   min  sum_{j=0}^{N-1} w_j * beta * (x_zone(k+j) - tau)^2 + r_j * |u_{k+j}|
//   s.t. x~_{i+1} = A~ x~_i + B~ u_i,   u_min <= u <= u_max
//
// where the weights w_j are occupancy expectations (predictive) or 0/1
// indicators (baselines).

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "occmpc/error.hpp"
#include "occmpc/occupancy.hpp"
#include "occmpc/qp.hpp"
#include "occmpc/thermal.hpp"

namespace occmpc {

template <typename Scalar = double>
struct MpcConfig {
  int horizon = 24;
  Scalar beta = Scalar(1);       // discomfort gain, cost per degC^2 at full occupancy
  Scalar r = Scalar(1e-2);       // energy gain, cost per W per step
  std::vector<Scalar> r_sequence;  // optional per-step energy gains (length N)
  Scalar tau = Scalar(23);       // comfort setpoint, degC
  Scalar tau_setback = Scalar(10);
  Scalar u_max = Scalar(8000);   // W
  Scalar u_min = Scalar(0);      // W, negative enables cooling
  Scalar solver_tolerance = Scalar(1e-8);
  int max_iterations = 200;
  int schedule_start_hour = 5;   // scheduled baseline, [start, end)
  int schedule_end_hour = 21;

  Scalar energy_gain(int j) const { return r_sequence.empty() ? r : r_sequence.at(j); }

  void validate() const {
    if (horizon < 1) throw InvalidArgument("horizon must be at least 1");
    if (!(beta > Scalar(0))) throw InvalidArgument("beta must be positive");
    if (!(r >= Scalar(0))) throw InvalidArgument("r must be nonnegative");
    if (!r_sequence.empty()) {
      if (static_cast<int>(r_sequence.size()) != horizon)
        throw InvalidArgument("r sequence length must equal the horizon");
      for (Scalar v : r_sequence)
        if (!(v >= Scalar(0))) throw InvalidArgument("r sequence must be nonnegative");
    }
    if (!(u_max > Scalar(0))) throw InvalidArgument("u_max must be positive");
    if (!(u_min <= Scalar(0))) throw InvalidArgument("u_min must not exceed zero");
    if (!(solver_tolerance > Scalar(0))) throw InvalidArgument("solver tolerance must be positive");
  }
};

template <typename Scalar = double>
struct ControlDecision {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> u_sequence;
  Scalar applied_u = Scalar(0);
  Scalar predicted_cost = Scalar(0);
  Scalar kkt_residual = Scalar(0);
  int iterations = 0;
};

/// Occupancy-weighted discomfort plus linear energy cost for one step.
template <typename Scalar>
Scalar stage_cost(Scalar x_zone, Scalar tau, Scalar u, Scalar gamma, Scalar beta, Scalar r) {
  const Scalar dev = x_zone - tau;
  return gamma * beta * dev * dev + r * std::abs(u);
}

/// Zone deviation over the horizon as an affine map of the inputs:
/// deviation = free + impulse * u, with deviation(j) = x_zone(k+j) - tau.
template <typename Scalar = double>
struct DeviationMap {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> free;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> impulse;
};

template <typename Scalar>
DeviationMap<Scalar> deviation_map(const thermal::AugmentedModel<Scalar>& aug,
                                   const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x_tilde0,
                                   int horizon) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (x_tilde0.size() != aug.size()) throw DimensionMismatch("augmented state has the wrong length");
  Vector q = Vector::Zero(aug.size());
  q(aug.zone_index) = Scalar(1);
  q(aug.setpoint_index()) = Scalar(-1);

  DeviationMap<Scalar> map;
  map.free.resize(horizon);
  map.impulse = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(horizon, horizon);
  Vector x = x_tilde0;
  Vector b = aug.B_tilde;
  std::vector<Scalar> markov(static_cast<std::size_t>(std::max(horizon - 1, 0)));
  for (int j = 0; j < horizon; ++j) {
    map.free(j) = q.dot(x);
    x = aug.A_tilde * x;
    if (j + 1 < horizon) {
      markov[j] = q.dot(b);
      b = aug.A_tilde * b;
    }
  }
  for (int j = 1; j < horizon; ++j)
    for (int i = 0; i < j; ++i) map.impulse(j, i) = markov[j - 1 - i];
  return map;
}

/// Objective value of an input sequence under the given weights.
template <typename Scalar>
Scalar objective_value(const DeviationMap<Scalar>& dev,
                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& weights,
                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& u,
                       const MpcConfig<Scalar>& config) {
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e = dev.free + dev.impulse * u;
  Scalar total = Scalar(0);
  for (Eigen::Index j = 0; j < u.size(); ++j)
    total += config.beta * weights(j) * e(j) * e(j) + config.energy_gain(static_cast<int>(j)) * std::abs(u(j));
  return total;
}

/// Solves the QP for explicit per-step occupancy weights (w_0 weights the
/// current state). The setpoint is the one stored in x_tilde0.
template <typename Scalar>
ControlDecision<Scalar> solve_weighted(const thermal::AugmentedModel<Scalar>& aug,
                                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x_tilde0,
                                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& weights,
                                       const MpcConfig<Scalar>& config) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  config.validate();
  const int n = config.horizon;
  if (weights.size() != n) throw DimensionMismatch("weight sequence length must equal the horizon");
  if (aug.horizon < n) throw DimensionMismatch("forecast register shorter than the horizon");
  if ((weights.array() < Scalar(0)).any()) throw InvalidArgument("occupancy weights must be nonnegative");

  const DeviationMap<Scalar> dev = deviation_map(aug, x_tilde0, n);
  const Matrix wt = weights.asDiagonal() * dev.impulse;
  const Matrix hess = Scalar(2) * config.beta * dev.impulse.transpose() * wt;
  const Vector lin_u = Scalar(2) * config.beta * wt.transpose() * dev.free;
  Vector r(n);
  for (int j = 0; j < n; ++j) r(j) = config.energy_gain(j);

  // Split u = u+ - u- when cooling is allowed so |u| stays linear.
  const bool split = config.u_min < Scalar(0);
  const int nv = split ? 2 * n : n;
  Matrix expand(n, nv);
  if (split) expand << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  else expand = Matrix::Identity(n, n);
  const Scalar unit = std::max(config.u_max, -config.u_min);
  Matrix h = unit * unit * expand.transpose() * hess * expand;
  h = Scalar(0.5) * (h + h.transpose());
  Vector f = unit * expand.transpose() * lin_u;
  Vector lower = Vector::Zero(nv);
  Vector upper(nv);
  f.head(n) += unit * r;
  upper.head(n).setConstant(config.u_max / unit);
  if (split) {
    f.tail(n) += unit * r;
    upper.tail(n).setConstant(-config.u_min / unit);
  }

  BoxQpOptions<Scalar> options;
  options.tolerance = config.solver_tolerance;
  options.max_iterations = config.max_iterations;
  const BoxQpResult<Scalar> sol = solve_box_qp<Scalar>(h, f, lower, upper, options);

  ControlDecision<Scalar> out;
  if (split) {
    out.u_sequence = unit * (sol.x.head(n) - sol.x.tail(n));
    out.u_sequence = out.u_sequence.cwiseMax(config.u_min).cwiseMin(config.u_max);
  } else {
    out.u_sequence = (unit * sol.x).cwiseMax(Scalar(0)).cwiseMin(config.u_max);
    // Exact bounds for variables the solver pinned.
    for (int j = 0; j < n; ++j) {
      if (sol.x(j) == Scalar(0)) out.u_sequence(j) = Scalar(0);
      if (sol.x(j) == upper(j)) out.u_sequence(j) = config.u_max;
    }
  }
  out.applied_u = out.u_sequence(0);
  out.kkt_residual = sol.kkt_residual;
  out.iterations = sol.iterations;
  out.predicted_cost = objective_value(dev, weights, out.u_sequence, config);
  return out;
}

/// Occupancy expectations for the horizon: w_0 is the live observation,
/// w_j = E[Gamma_{k+j} | Gamma_k] for j >= 1.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> occupancy_weights(const OccupancyModel<Scalar>& model,
                                                           int slot, Scalar gamma_now, int horizon) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(horizon);
  w(0) = gamma_now;
  if (horizon > 1) w.tail(horizon - 1) = predict_horizon(model, slot, gamma_now, horizon - 1);
  return w;
}

/// Occupancy-predictive MPC. `slot` is the period slot of the interval that
/// produced gamma_now.
template <typename Scalar>
ControlDecision<Scalar> solve_mpc(const thermal::AugmentedModel<Scalar>& aug,
                                  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x_tilde0,
                                  Scalar gamma_now, const OccupancyModel<Scalar>& model, int slot,
                                  const MpcConfig<Scalar>& config) {
  return solve_weighted(aug, x_tilde0, occupancy_weights(model, slot, gamma_now, config.horizon),
                        config);
}

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> with_setpoint(const thermal::AugmentedModel<Scalar>& aug,
                                                       Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x,
                                                       Scalar tau) {
  if (x.size() != aug.size()) throw DimensionMismatch("augmented state has the wrong length");
  x(aug.setpoint_index()) = tau;
  return x;
}

}  // namespace detail

/// Holds the setback setpoint with zero occupancy weight.
template <typename Scalar>
ControlDecision<Scalar> setback_controller(const thermal::AugmentedModel<Scalar>& aug,
                                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x_tilde,
                                           const MpcConfig<Scalar>& config) {
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(config.horizon);
  return solve_weighted(aug, detail::with_setpoint(aug, x_tilde, config.tau_setback), w, config);
}

/// Current occupancy held over the horizon as a 0/1 weight (Gamma >= 0.5 is
/// occupied), with the setpoint switched between tau and tau_setback.
template <typename Scalar>
ControlDecision<Scalar> triggered_controller(const thermal::AugmentedModel<Scalar>& aug,
                                             const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x_tilde,
                                             Scalar gamma_now, const MpcConfig<Scalar>& config) {
  const bool occupied = gamma_now >= Scalar(0.5);
  const Scalar tau = occupied ? config.tau : config.tau_setback;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Constant(config.horizon, occupied ? Scalar(1) : Scalar(0));
  return solve_weighted(aug, detail::with_setpoint(aug, x_tilde, tau), w, config);
}

/// 0/1 weights from the fixed daily schedule, or everywhere while the space
/// is occupied. Weight j belongs to the interval ending at clock_hour + j,
/// which starts at hour clock_hour + j - 1.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> schedule_weights(Scalar gamma_now, int clock_hour,
                                                          const MpcConfig<Scalar>& config,
                                                          bool weekend = false) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(config.horizon);
  if (weekend) return w;
  const bool occupied = gamma_now >= Scalar(0.5);
  for (int j = 0; j < config.horizon; ++j) {
    const int start = ((clock_hour + j - 1) % 24 + 24) % 24;
    const bool scheduled = start >= config.schedule_start_hour && start < config.schedule_end_hour;
    w(j) = (occupied || scheduled) ? Scalar(1) : Scalar(0);
  }
  return w;
}

template <typename Scalar>
ControlDecision<Scalar> scheduled_controller(const thermal::AugmentedModel<Scalar>& aug,
                                             const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x_tilde,
                                             Scalar gamma_now, int clock_hour,
                                             const MpcConfig<Scalar>& config, bool weekend = false) {
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w = schedule_weights(gamma_now, clock_hour, config, weekend);
  const Scalar tau = w.maxCoeff() > Scalar(0) ? config.tau : config.tau_setback;
  return solve_weighted(aug, detail::with_setpoint(aug, x_tilde, tau), w, config);
}

}  // namespace occmpc
