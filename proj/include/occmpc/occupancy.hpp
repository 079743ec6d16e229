#pragma once

// Periodic two-state Markov occupancy model trained online with Bayesian
// updates on numerically sampled densities, plus multi-step occupancy
// expectations.
//
// Each period slot k owns two densities over a transition bias in [0,1]:
//   occupied(k): density of P(occupied at k+1 | occupied at k)
//   vacant(k):   density of P(occupied at k+1 | vacant at k)
// Densities are sampled on a uniform grid theta_i = i/(G-1) and integrated
// with the trapezoidal rule.

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "occmpc/error.hpp"

namespace occmpc {

/// Default grid resolution for transition-bias densities.
inline constexpr Eigen::Index kDefaultGridSize = 201;

/// Pre-normalization integral below which a Bayes update is rejected.
inline constexpr double kDegeneratePosteriorThreshold = 1e-12;

/// Trapezoidal integral over [0,1] of samples on a uniform grid.
template <typename Derived>
typename Derived::Scalar trapezoid(const Eigen::MatrixBase<Derived>& samples) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = samples.size();
  const Scalar h = Scalar(1) / Scalar(n - 1);
  return h * (samples.sum() - Scalar(0.5) * (samples(0) + samples(n - 1)));
}

/// Numerical probability density over a coin bias theta in [0,1].
template <typename Scalar = double>
class ProbabilityGrid {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  ProbabilityGrid() = default;

  static ProbabilityGrid uniform(Eigen::Index size) {
    if (size < 3) throw InvalidArgument("grid size must be at least 3");
    ProbabilityGrid g;
    g.values_ = Vector::Ones(size);
    return g;
  }

  /// Takes arbitrary nonnegative samples and normalizes them to unit mass.
  static ProbabilityGrid from_samples(Vector samples) {
    if (samples.size() < 3) throw InvalidArgument("grid size must be at least 3");
    if ((samples.array() < Scalar(0)).any() || !samples.allFinite())
      throw InvalidArgument("density samples must be finite and nonnegative");
    const Scalar mass = trapezoid(samples);
    if (!(mass > Scalar(0))) throw InvalidArgument("density has zero mass");
    ProbabilityGrid g;
    g.values_ = std::move(samples) / mass;
    return g;
  }

  /// Adopts samples verbatim. Caller guarantees the invariants (used by
  /// deserialization, which must be bit-exact).
  static ProbabilityGrid from_normalized(Vector samples) {
    ProbabilityGrid g;
    g.values_ = std::move(samples);
    return g;
  }

  /// Grid abscissae theta_i = i/(G-1).
  static Vector nodes(Eigen::Index size) {
    return Vector::LinSpaced(size, Scalar(0), Scalar(1));
  }

  const Vector& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  Scalar integral() const { return trapezoid(values_); }

  friend bool operator==(const ProbabilityGrid& a, const ProbabilityGrid& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Vector values_;
};

namespace detail {

// Grid abscissae reused across updates; rebuilt only when the size changes.
template <typename Scalar>
const typename ProbabilityGrid<Scalar>::Vector& cached_nodes(Eigen::Index size) {
  thread_local typename ProbabilityGrid<Scalar>::Vector nodes;
  if (nodes.size() != size) nodes = ProbabilityGrid<Scalar>::nodes(size);
  return nodes;
}

}  // namespace detail

/// Posterior mean of the bias, int theta * density(theta) dtheta.
template <typename Scalar>
Scalar expected_bias(const ProbabilityGrid<Scalar>& grid) {
  return trapezoid(grid.values().cwiseProduct(detail::cached_nodes<Scalar>(grid.size())));
}

/// One Bayes step with Bernoulli likelihood theta (outcome true) or
/// 1 - theta (outcome false).
template <typename Scalar>
ProbabilityGrid<Scalar> bayes_update(const ProbabilityGrid<Scalar>& grid, bool outcome) {
  using Vector = typename ProbabilityGrid<Scalar>::Vector;
  const Vector& theta = detail::cached_nodes<Scalar>(grid.size());
  const auto& p = grid.values();
  // Mass from the unnormalized product, then one pass writing the posterior.
  const Scalar mass = outcome ? trapezoid(p.cwiseProduct(theta))
                              : trapezoid((p.array() * (Scalar(1) - theta.array())).matrix());
  if (mass < Scalar(kDegeneratePosteriorThreshold))
    throw DegeneratePosterior("observation has zero likelihood under the current density");
  const Scalar scale = Scalar(1) / mass;
  Vector posterior(grid.size());
  if (outcome) posterior = p.cwiseProduct(theta) * scale;
  else posterior = (p.array() * (Scalar(1) - theta.array()) * scale).matrix();
  return ProbabilityGrid<Scalar>::from_normalized(std::move(posterior));
}

/// Linear forgetting: lambda * grid + (1 - lambda) * uniform.
template <typename Scalar>
ProbabilityGrid<Scalar> apply_forgetting(const ProbabilityGrid<Scalar>& grid, Scalar lambda) {
  if (!(lambda >= Scalar(0) && lambda <= Scalar(1)))
    throw InvalidArgument("forgetting factor must lie in [0,1]");
  if (lambda == Scalar(1)) return grid;
  typename ProbabilityGrid<Scalar>::Vector blended =
      (lambda * grid.values().array() + (Scalar(1) - lambda)).matrix();
  const Scalar mass = trapezoid(blended);
  return ProbabilityGrid<Scalar>::from_normalized(blended / mass);
}

/// Periodic Markov occupancy model with M slots and linear forgetting.
template <typename Scalar = double>
class OccupancyModel {
 public:
  using Grid = ProbabilityGrid<Scalar>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  OccupancyModel(int period, Eigen::Index grid_size, Scalar lambda)
      : period_(period), grid_size_(grid_size), lambda_(lambda) {
    if (period < 1) throw InvalidArgument("period must be at least 1");
    if (grid_size < 3) throw InvalidArgument("grid size must be at least 3");
    if (!(lambda >= Scalar(0) && lambda <= Scalar(1)))
      throw InvalidArgument("forgetting factor must lie in [0,1]");
    occupied_.assign(static_cast<std::size_t>(period), Grid::uniform(grid_size));
    vacant_.assign(static_cast<std::size_t>(period), Grid::uniform(grid_size));
  }

  /// Rebuilds a model from stored densities (deserialization).
  OccupancyModel(Scalar lambda, std::vector<Grid> occupied, std::vector<Grid> vacant)
      : lambda_(lambda), occupied_(std::move(occupied)), vacant_(std::move(vacant)) {
    if (occupied_.empty() || occupied_.size() != vacant_.size())
      throw DimensionMismatch("occupied and vacant families must be nonempty and equal in size");
    period_ = static_cast<int>(occupied_.size());
    grid_size_ = occupied_.front().size();
    for (std::size_t k = 0; k < occupied_.size(); ++k) {
      if (occupied_[k].size() != grid_size_ || vacant_[k].size() != grid_size_)
        throw DimensionMismatch("all grids must share one size");
    }
    if (!(lambda >= Scalar(0) && lambda <= Scalar(1)))
      throw InvalidArgument("forgetting factor must lie in [0,1]");
  }

  int period() const { return period_; }
  Eigen::Index grid_size() const { return grid_size_; }
  Scalar lambda() const { return lambda_; }

  const Grid& occupied(int slot) const { return occupied_.at(check_slot(slot)); }
  const Grid& vacant(int slot) const { return vacant_.at(check_slot(slot)); }
  const std::vector<Grid>& occupied_family() const { return occupied_; }
  const std::vector<Grid>& vacant_family() const { return vacant_; }

  /// Trains slot `slot` on the fractional transition (gamma -> gamma_next),
  /// then applies forgetting to that slot's two densities. Other slots are
  /// left untouched.
  void train(int slot, Scalar gamma, Scalar gamma_next) {
    const auto k = check_slot(slot);
    check_fraction(gamma);
    check_fraction(gamma_next);
    Grid occ = blend_posterior(occupied_[k], gamma, gamma_next);
    Grid vac = blend_posterior(vacant_[k], Scalar(1) - gamma, gamma_next);
    occupied_[k] = apply_forgetting(occ, lambda_);
    vacant_[k] = apply_forgetting(vac, lambda_);
  }

  /// Expected P(occupied next | occupied now) for a slot.
  Scalar stay_occupied(int slot) const { return expected_bias(occupied(slot)); }
  /// Expected P(occupied next | vacant now) for a slot.
  Scalar become_occupied(int slot) const { return expected_bias(vacant(slot)); }

  friend bool operator==(const OccupancyModel& a, const OccupancyModel& b) {
    return a.period_ == b.period_ && a.grid_size_ == b.grid_size_ && a.lambda_ == b.lambda_ &&
           a.occupied_ == b.occupied_ && a.vacant_ == b.vacant_;
  }

 private:
  std::size_t check_slot(int slot) const {
    if (slot < 0 || slot >= period_) throw InvalidArgument("slot index out of range");
    return static_cast<std::size_t>(slot);
  }

  static void check_fraction(Scalar g) {
    if (!(g >= Scalar(0) && g <= Scalar(1)))
      throw InvalidArgument("occupancy fraction must lie in [0,1]");
  }

  // weight * (next * f(1) + (1 - next) * f(0)) + (1 - weight) * prior
  static Grid blend_posterior(const Grid& prior, Scalar weight, Scalar next) {
    if (weight == Scalar(0)) return prior;
    typename Grid::Vector mix = (Scalar(1) - weight) * prior.values();
    if (next > Scalar(0)) mix += weight * next * bayes_update(prior, true).values();
    if (next < Scalar(1)) mix += weight * (Scalar(1) - next) * bayes_update(prior, false).values();
    const Scalar mass = trapezoid(mix);
    return Grid::from_normalized(mix / mass);
  }

  int period_ = 0;
  Eigen::Index grid_size_ = 0;
  Scalar lambda_ = Scalar(1);
  std::vector<Grid> occupied_;
  std::vector<Grid> vacant_;
};

template <typename Scalar>
OccupancyModel<Scalar> new_model(int period, Eigen::Index grid_size, Scalar lambda) {
  return OccupancyModel<Scalar>(period, grid_size, lambda);
}

/// Value-returning form of OccupancyModel::train.
template <typename Scalar>
OccupancyModel<Scalar> train_step(OccupancyModel<Scalar> model, int slot, Scalar gamma,
                                  Scalar gamma_next) {
  model.train(slot, gamma, gamma_next);
  return model;
}

/// 2M x 2M row-stochastic transition matrix ordered
/// [occupied slots 0..M-1 | vacant slots 0..M-1].
template <typename Scalar>
typename OccupancyModel<Scalar>::Matrix transition_matrix(const OccupancyModel<Scalar>& model) {
  const int m = model.period();
  typename OccupancyModel<Scalar>::Matrix p =
      OccupancyModel<Scalar>::Matrix::Zero(2 * m, 2 * m);
  for (int k = 0; k < m; ++k) {
    const int next = (k + 1) % m;
    const Scalar stay = model.stay_occupied(k);
    const Scalar rise = model.become_occupied(k);
    p(k, next) = stay;
    p(k, m + next) = Scalar(1) - stay;
    p(m + k, next) = rise;
    p(m + k, m + next) = Scalar(1) - rise;
  }
  return p;
}

/// Expected occupancy 1..steps ahead given fractional occupancy `gamma` in
/// slot `slot`. Element j-1 holds E[Gamma_{k+j} | Gamma_k].
///
/// The state distribution only ever has mass on one slot, so propagation
/// reduces to a scalar recursion on the occupied probability.
template <typename Scalar>
typename OccupancyModel<Scalar>::Vector predict_horizon(const OccupancyModel<Scalar>& model,
                                                        int slot, Scalar gamma, int steps) {
  if (steps < 0) throw InvalidArgument("step count must be nonnegative");
  if (!(gamma >= Scalar(0) && gamma <= Scalar(1)))
    throw InvalidArgument("occupancy fraction must lie in [0,1]");
  if (slot < 0 || slot >= model.period()) throw InvalidArgument("slot index out of range");
  const int m = model.period();
  std::vector<Scalar> stay(m), rise(m);
  for (int k = 0; k < m; ++k) {
    stay[k] = model.stay_occupied(k);
    rise[k] = model.become_occupied(k);
  }
  typename OccupancyModel<Scalar>::Vector out(steps);
  Scalar occupied = gamma;
  Scalar vacant = Scalar(1) - gamma;
  int k = slot;
  for (int j = 0; j < steps; ++j) {
    const Scalar next_occupied = occupied * stay[k] + vacant * rise[k];
    const Scalar next_vacant =
        occupied * (Scalar(1) - stay[k]) + vacant * (Scalar(1) - rise[k]);
    occupied = next_occupied;
    vacant = next_vacant;
    k = (k + 1) % m;
    out(j) = occupied;
  }
  return out;
}

/// E[Gamma_{k+steps} | Gamma_k = gamma], steps >= 1.
template <typename Scalar>
Scalar predict(const OccupancyModel<Scalar>& model, int slot, Scalar gamma, int steps) {
  if (steps < 1) throw InvalidArgument("prediction needs at least one step");
  return predict_horizon(model, slot, gamma, steps)(steps - 1);
}

// Plain-text snapshot: header "M G lambda", then M occupied rows followed by
// M vacant rows, each with G decimal samples at 17 significant digits.
void write_model(std::ostream& out, const OccupancyModel<double>& model);
OccupancyModel<double> read_model(std::istream& in);
void save_model(const OccupancyModel<double>& model, const std::string& path);
OccupancyModel<double> load_model(const std::string& path);

}  // namespace occmpc
