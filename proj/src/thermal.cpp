#include "occmpc/thermal.hpp"

#include <fstream>
#include <iomanip>
#include <queue>
#include <sstream>

namespace occmpc::thermal {

namespace {

constexpr double kAirDensity = 1.2;          // kg/m^3
constexpr double kAirSpecificHeat = 1005.0;  // J/(kg K)
constexpr int kOutdoor = 0;
constexpr int kGround = 1;

bool valid_layer(const Layer& l) {
  return l.thickness > 0.0 && l.conductivity > 0.0 && l.density > 0.0 && l.specific_heat > 0.0;
}

// Half-layer conduction resistance times area.
double half_resistance(const Layer& l) { return l.thickness / (2.0 * l.conductivity); }

void add_chain(RcNetwork& net, const std::string& name, const std::vector<Layer>& layers,
               double area, double inside_film, double outside_film, int source) {
  int prev = net.zone_index;
  double prev_half = 1.0 / inside_film;  // resistance * area from previous node
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    const int node = net.node_count();
    net.capacitances.push_back(l.density * l.specific_heat * l.thickness * area);
    net.node_labels.push_back(name + "/" + std::to_string(i));
    net.links.push_back({prev, node, area / (prev_half + half_resistance(l))});
    prev = node;
    prev_half = half_resistance(l);
  }
  net.boundary_links.push_back({prev, source, area / (prev_half + 1.0 / outside_film)});
}

}  // namespace

void RcNetwork::validate() const {
  const int n = node_count();
  if (n == 0) throw InvalidArgument("network has no nodes");
  if (static_cast<int>(node_labels.size()) != n && !node_labels.empty())
    throw InvalidArgument("node label count does not match node count");
  for (double c : capacitances)
    if (!(c > 0.0)) throw SingularCapacitance("node capacitances must be positive");
  if (zone_index < 0 || zone_index >= n) throw InvalidArgument("zone index out of range");
  std::vector<std::vector<int>> adjacency(n);
  for (const auto& l : links) {
    if (l.a < 0 || l.a >= n || l.b < 0 || l.b >= n || l.a == l.b)
      throw InvalidArgument("link references an invalid node");
    if (!(l.conductance >= 0.0)) throw InvalidArgument("conductances must be nonnegative");
    if (l.conductance > 0.0) {
      adjacency[l.a].push_back(l.b);
      adjacency[l.b].push_back(l.a);
    }
  }
  std::vector<bool> grounded(n, false);
  for (const auto& b : boundary_links) {
    if (b.node < 0 || b.node >= n || b.source < 0 || b.source >= source_count())
      throw InvalidArgument("boundary link references an invalid node or source");
    if (!(b.conductance >= 0.0)) throw InvalidArgument("conductances must be nonnegative");
    if (b.conductance > 0.0) grounded[b.node] = true;
  }
  std::vector<bool> seen(n, false);
  std::queue<int> frontier;
  frontier.push(zone_index);
  seen[zone_index] = true;
  bool reaches_boundary = false;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    reaches_boundary = reaches_boundary || grounded[v];
    for (int w : adjacency[v])
      if (!seen[w]) {
        seen[w] = true;
        frontier.push(w);
      }
  }
  if (!reaches_boundary) throw InvalidArgument("zone node is not connected to any boundary source");
}

RcNetwork build_single_zone(const BuildingParams& p) {
  if (!(p.length > 0.0 && p.width > 0.0 && p.height > 0.0))
    throw InvalidGeometry("building dimensions must be positive");
  if (p.wall_layers.empty()) throw InvalidGeometry("walls need at least one layer");
  const auto& roof = p.roof_layers.empty() ? p.wall_layers : p.roof_layers;
  const auto& floor = p.floor_layers.empty() ? p.wall_layers : p.floor_layers;
  for (const auto* layers : {&p.wall_layers, &roof, &floor})
    for (const auto& l : *layers)
      if (!valid_layer(l)) throw InvalidGeometry("layer thickness and material constants must be positive");
  if (!(p.inside_film > 0.0 && p.outside_film > 0.0 && p.ground_contact > 0.0))
    throw InvalidGeometry("film coefficients must be positive");
  if (p.window_area < 0.0 || p.window_u < 0.0 || p.air_changes_per_hour < 0.0 ||
      !(p.interior_mass_factor > 0.0))
    throw InvalidGeometry("window, infiltration and mass parameters must be nonnegative");

  const double gross_wall = 2.0 * (p.length + p.width) * p.height;
  if (!(p.window_area < gross_wall)) throw InvalidGeometry("windows cover the entire wall area");
  const double opaque_share = 1.0 - p.window_area / gross_wall;
  const double footprint = p.length * p.width;
  const double volume = footprint * p.height;

  RcNetwork net;
  net.source_labels = {"outdoor", "ground"};
  net.zone_index = 0;
  net.capacitances.push_back(kAirDensity * kAirSpecificHeat * volume * p.interior_mass_factor);
  net.node_labels.push_back("zone");

  const double long_wall = p.length * p.height * opaque_share;
  const double short_wall = p.width * p.height * opaque_share;
  add_chain(net, "wall_n", p.wall_layers, long_wall, p.inside_film, p.outside_film, kOutdoor);
  add_chain(net, "wall_s", p.wall_layers, long_wall, p.inside_film, p.outside_film, kOutdoor);
  add_chain(net, "wall_e", p.wall_layers, short_wall, p.inside_film, p.outside_film, kOutdoor);
  add_chain(net, "wall_w", p.wall_layers, short_wall, p.inside_film, p.outside_film, kOutdoor);
  add_chain(net, "roof", roof, footprint, p.inside_film, p.outside_film, kOutdoor);
  add_chain(net, "floor", floor, footprint, p.inside_film, p.ground_contact, kGround);

  const double air_exchange =
      p.air_changes_per_hour * volume * kAirDensity * kAirSpecificHeat / 3600.0;
  const double direct = p.window_area * p.window_u + air_exchange;
  if (direct > 0.0) net.boundary_links.push_back({net.zone_index, kOutdoor, direct});
  net.validate();
  return net;
}

BuildingParams demo_building() {
  BuildingParams p;
  p.length = 12.0;
  p.width = 10.0;
  p.height = 3.0;
  // Inside to outside: gypsum board, mineral wool, brick.
  p.wall_layers = {{0.013, 0.16, 800.0, 1090.0}, {0.15, 0.04, 30.0, 840.0}, {0.1, 0.7, 1800.0, 840.0}};
  p.roof_layers = {{0.013, 0.16, 800.0, 1090.0}, {0.2, 0.04, 30.0, 840.0}, {0.02, 0.17, 1100.0, 1500.0}};
  // Carpet, plywood deck, foam board.
  p.floor_layers = {{0.01, 0.06, 200.0, 1300.0}, {0.02, 0.13, 500.0, 1600.0}, {0.1, 0.035, 35.0, 1400.0}};
  p.window_area = 10.0;
  p.window_u = 2.8;
  p.air_changes_per_hour = 0.6;
  p.interior_mass_factor = 4.0;
  return p;
}

void write_model_file(const StateSpaceModel<double>& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const Eigen::Index n = model.states();
  const Eigen::Index m = model.boundaries();
  out << std::setprecision(17);
  out << n << ' ' << m << ' ' << model.step_seconds << ' ' << model.zone_index << '\n';
  auto write_rows = [&out](const Eigen::MatrixXd& mat) {
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      for (Eigen::Index j = 0; j < mat.cols(); ++j) out << (j ? " " : "") << mat(i, j);
      out << '\n';
    }
  };
  write_rows(model.A);
  write_rows(model.B_u);
  write_rows(model.B_w);
  if (!out) throw IoError("write to '" + path + "' failed");
}

StateSpaceModel<double> read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw FormatError("model file '" + path + "' is empty");
  std::istringstream header(line);
  long n = 0, m = 0, zone = 0;
  double step = 0.0;
  if (!(header >> n >> m >> step >> zone) || n < 1 || m < 0 || step < 0.0 || zone < 0 || zone >= n)
    throw FormatError("model header must be 'n m step_seconds zone_index'");
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw FormatError("bad number '" + token + "' in '" + path + "'");
    values.push_back(v);
  }
  const auto expected = static_cast<std::size_t>(n * n + n + n * m);
  if (values.size() != expected)
    throw DimensionMismatch("model file '" + path + "' has " + std::to_string(values.size()) +
                            " values, header implies " + std::to_string(expected));
  StateSpaceModel<double> model;
  model.step_seconds = step;
  model.zone_index = static_cast<int>(zone);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  model.A = Eigen::Map<const RowMajor>(values.data(), n, n);
  model.B_u = Eigen::Map<const Eigen::VectorXd>(values.data() + n * n, n);
  model.B_w = Eigen::Map<const RowMajor>(values.data() + n * n + n, n, m);
  return model;
}

}  // namespace occmpc::thermal
