#pragma once

// Lumped RC thermal network of a single zone, its exact zero-order-hold
// discretization, and the setpoint/forecast augmentation used by the MPC.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "occmpc/error.hpp"

namespace occmpc::thermal {

/// One homogeneous material layer of an envelope surface.
struct Layer {
  double thickness = 0.0;      // m
  double conductivity = 0.0;   // W/(m K)
  double density = 0.0;        // kg/m^3
  double specific_heat = 0.0;  // J/(kg K)
};

/// Box-shaped single-zone building. Walls and roof face outdoor air, the
/// floor faces the ground.
struct BuildingParams {
  double length = 5.0;  // m
  double width = 5.0;   // m
  double height = 3.0;  // m
  std::vector<Layer> wall_layers;
  std::vector<Layer> roof_layers;   // empty: reuse wall_layers
  std::vector<Layer> floor_layers;  // empty: reuse wall_layers
  double inside_film = 8.0;         // W/(m^2 K), convective + radiative
  double outside_film = 25.0;       // W/(m^2 K)
  double ground_contact = 5.0;      // W/(m^2 K), floor underside to ground
  double window_area = 0.0;         // m^2, taken out of the wall area
  double window_u = 2.8;            // W/(m^2 K)
  double air_changes_per_hour = 0.5;
  double interior_mass_factor = 1.0;  // multiplies the zone air capacitance
};

struct Link {
  int a = 0;
  int b = 0;
  double conductance = 0.0;  // W/K
};

struct BoundaryLink {
  int node = 0;
  int source = 0;
  double conductance = 0.0;  // W/K
};

/// Capacitances on nodes, conductances between nodes and from nodes to
/// fixed-temperature boundary sources.
struct RcNetwork {
  std::vector<double> capacitances;  // J/K
  std::vector<std::string> node_labels;
  std::vector<Link> links;
  std::vector<BoundaryLink> boundary_links;
  std::vector<std::string> source_labels;
  int zone_index = 0;

  int node_count() const { return static_cast<int>(capacitances.size()); }
  int source_count() const { return static_cast<int>(source_labels.size()); }

  /// Throws SingularCapacitance / InvalidArgument when the invariants fail.
  void validate() const;
};

/// Builds a star-plus-chain network: a zone air node joined to one layered
/// chain per surface (four walls and roof to outdoor air, floor to ground),
/// plus window and infiltration conductances to outdoor air.
RcNetwork build_single_zone(const BuildingParams& params);

/// Building used by the CLI and acceptance scenarios: an office-sized zone
/// whose heating demand in cold weather roughly matches an 8 kW plant.
BuildingParams demo_building();

/// x_{k+1} = A x_k + B_u u_k + B_w w_k.
template <typename Scalar = double>
struct StateSpaceModel {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix A;
  Vector B_u;
  Matrix B_w;
  Scalar step_seconds = Scalar(3600);
  int zone_index = 0;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index boundaries() const { return B_w.cols(); }
};

/// Continuous-time system C dx/dt = -L x + G_b w + e_zone u, divided by C.
template <typename Scalar = double>
struct ContinuousModel {
  typename StateSpaceModel<Scalar>::Matrix A;
  typename StateSpaceModel<Scalar>::Vector B_u;
  typename StateSpaceModel<Scalar>::Matrix B_w;
  int zone_index = 0;
};

template <typename Scalar = double>
ContinuousModel<Scalar> assemble(const RcNetwork& net) {
  net.validate();
  const int n = net.node_count();
  const int m = net.source_count();
  using Matrix = typename StateSpaceModel<Scalar>::Matrix;
  Matrix lap = Matrix::Zero(n, n);
  Matrix gb = Matrix::Zero(n, m);
  for (const auto& l : net.links) {
    lap(l.a, l.a) += Scalar(l.conductance);
    lap(l.b, l.b) += Scalar(l.conductance);
    lap(l.a, l.b) -= Scalar(l.conductance);
    lap(l.b, l.a) -= Scalar(l.conductance);
  }
  for (const auto& b : net.boundary_links) {
    lap(b.node, b.node) += Scalar(b.conductance);
    gb(b.node, b.source) += Scalar(b.conductance);
  }
  ContinuousModel<Scalar> c;
  c.zone_index = net.zone_index;
  c.A.resize(n, n);
  c.B_w.resize(n, m);
  c.B_u = StateSpaceModel<Scalar>::Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    const Scalar inv_c = Scalar(1) / Scalar(net.capacitances[i]);
    c.A.row(i) = -inv_c * lap.row(i);
    c.B_w.row(i) = inv_c * gb.row(i);
  }
  c.B_u(net.zone_index) = Scalar(1) / Scalar(net.capacitances[net.zone_index]);
  return c;
}

/// Exact zero-order-hold discretization over `step_seconds` via the matrix
/// exponential of [[A, B], [0, 0]].
template <typename Scalar = double>
StateSpaceModel<Scalar> discretize(const ContinuousModel<Scalar>& c, Scalar step_seconds) {
  if (!(step_seconds >= Scalar(0))) throw InvalidArgument("step length must be nonnegative");
  using Matrix = typename StateSpaceModel<Scalar>::Matrix;
  const Eigen::Index n = c.A.rows();
  const Eigen::Index m = c.B_w.cols();
  const Eigen::Index total = n + 1 + m;
  Matrix block = Matrix::Zero(total, total);
  block.topLeftCorner(n, n) = c.A;
  block.block(0, n, n, 1) = c.B_u;
  block.block(0, n + 1, n, m) = c.B_w;
  const Matrix phi = (block * step_seconds).exp();

  StateSpaceModel<Scalar> d;
  d.A = phi.topLeftCorner(n, n);
  d.B_u = phi.block(0, n, n, 1);
  d.B_w = phi.block(0, n + 1, n, m);
  d.step_seconds = step_seconds;
  d.zone_index = c.zone_index;
  return d;
}

template <typename Scalar = double>
StateSpaceModel<Scalar> discretize(const RcNetwork& net, Scalar step_seconds) {
  return discretize(assemble<Scalar>(net), step_seconds);
}

template <typename Scalar, typename DerivedX, typename DerivedW>
typename StateSpaceModel<Scalar>::Vector simulate_step(const StateSpaceModel<Scalar>& model,
                                                       const Eigen::MatrixBase<DerivedX>& x,
                                                       Scalar u,
                                                       const Eigen::MatrixBase<DerivedW>& w) {
  if (x.size() != model.states() || w.size() != model.boundaries())
    throw DimensionMismatch("state or boundary vector has the wrong length");
  return model.A * x + model.B_u * u + model.B_w * w;
}

template <typename Scalar>
Scalar spectral_radius(const StateSpaceModel<Scalar>& model) {
  return model.A.eigenvalues().cwiseAbs().maxCoeff();
}

/// Time constant of the slowest mode, in seconds.
template <typename Scalar>
Scalar dominant_time_constant(const StateSpaceModel<Scalar>& model) {
  return -model.step_seconds / std::log(spectral_radius(model));
}

/// Zone temperature trace (steps + 1 samples) starting from a uniform
/// `initial` state with every boundary held at `boundary` and u = 0.
template <typename Scalar>
std::vector<Scalar> step_response_report(const StateSpaceModel<Scalar>& model, Scalar initial,
                                         Scalar boundary, int steps) {
  using Vector = typename StateSpaceModel<Scalar>::Vector;
  Vector x = Vector::Constant(model.states(), initial);
  const Vector w = Vector::Constant(model.boundaries(), boundary);
  std::vector<Scalar> trace{x(model.zone_index)};
  trace.reserve(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k < steps; ++k) {
    x = simulate_step(model, x, Scalar(0), w);
    trace.push_back(x(model.zone_index));
  }
  return trace;
}

/// Plant augmented with a constant setpoint and a boundary-forecast shift
/// register: x~ = [x; tau; phi_0; ...; phi_{N-1}], each phi_i holding the
/// boundary temperatures for step k+i. The last register holds its value.
template <typename Scalar = double>
struct AugmentedModel {
  using Matrix = typename StateSpaceModel<Scalar>::Matrix;
  using Vector = typename StateSpaceModel<Scalar>::Vector;

  Matrix A_tilde;
  Vector B_tilde;
  Eigen::Index plant_states = 0;
  Eigen::Index boundary_count = 0;
  int horizon = 0;
  int zone_index = 0;
  Vector registers;  // [tau; phi] as of construction

  Eigen::Index setpoint_index() const { return plant_states; }
  Eigen::Index forecast_offset() const { return plant_states + 1; }
  Eigen::Index size() const { return A_tilde.rows(); }

  template <typename Derived>
  Vector initial_state(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != plant_states) throw DimensionMismatch("plant state has the wrong length");
    Vector xt(size());
    xt << x, registers;
    return xt;
  }
};

/// `forecast` is N x m: row i holds the boundary temperatures for step k+i.
template <typename Scalar, typename Derived>
AugmentedModel<Scalar> augment(const StateSpaceModel<Scalar>& model, Scalar tau,
                               const Eigen::MatrixBase<Derived>& forecast) {
  const Eigen::Index n = model.states();
  const Eigen::Index m = model.boundaries();
  const Eigen::Index horizon = forecast.rows();
  if (horizon < 1) throw DimensionMismatch("forecast must cover at least one step");
  if (forecast.cols() != m) throw DimensionMismatch("forecast width must match boundary count");
  using Matrix = typename AugmentedModel<Scalar>::Matrix;
  using Vector = typename AugmentedModel<Scalar>::Vector;

  const Eigen::Index reg = horizon * m;
  const Eigen::Index total = n + 1 + reg;
  AugmentedModel<Scalar> aug;
  aug.plant_states = n;
  aug.boundary_count = m;
  aug.horizon = static_cast<int>(horizon);
  aug.zone_index = model.zone_index;
  aug.A_tilde = Matrix::Zero(total, total);
  aug.A_tilde.topLeftCorner(n, n) = model.A;
  aug.A_tilde.block(0, n + 1, n, m) = model.B_w;
  aug.A_tilde(n, n) = Scalar(1);
  for (Eigen::Index i = 0; i + 1 < horizon; ++i)
    aug.A_tilde.block(n + 1 + i * m, n + 1 + (i + 1) * m, m, m).setIdentity();
  aug.A_tilde.block(n + 1 + (horizon - 1) * m, n + 1 + (horizon - 1) * m, m, m).setIdentity();
  aug.B_tilde = Vector::Zero(total);
  aug.B_tilde.head(n) = model.B_u;
  aug.registers.resize(1 + reg);
  aug.registers(0) = tau;
  for (Eigen::Index i = 0; i < horizon; ++i)
    aug.registers.segment(1 + i * m, m) = forecast.row(i).transpose();
  return aug;
}

// Text model file: header "n m step_seconds zone_index", then A (n rows),
// B_u (n rows of one value), B_w (n rows of m values).
void write_model_file(const StateSpaceModel<double>& model, const std::string& path);
StateSpaceModel<double> read_model_file(const std::string& path);

}  // namespace occmpc::thermal
