#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "occmpc/occupancy.hpp"

namespace occmpc {

void write_model(std::ostream& out, const OccupancyModel<double>& model) {
  out << std::setprecision(17);
  out << model.period() << ' ' << model.grid_size() << ' ' << model.lambda() << '\n';
  auto write_family = [&](const std::vector<ProbabilityGrid<double>>& family) {
    for (const auto& grid : family) {
      const auto& v = grid.values();
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out << ' ';
        out << v(i);
      }
      out << '\n';
    }
  };
  write_family(model.occupied_family());
  write_family(model.vacant_family());
}

namespace {

double parse_double(const std::string& token, std::size_t line) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw FormatError("bad number '" + token + "' on line " + std::to_string(line));
  return value;
}

}  // namespace

OccupancyModel<double> read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty model file");
  std::istringstream header(line);
  long period = 0;
  long grid_size = 0;
  std::string lambda_token;
  if (!(header >> period >> grid_size >> lambda_token))
    throw FormatError("model header must be 'M G lambda'");
  std::string extra;
  if (header >> extra) throw FormatError("trailing tokens in model header");
  const double lambda = parse_double(lambda_token, 1);
  if (period < 1 || grid_size < 3) throw FormatError("model header declares invalid M or G");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw FormatError("lambda outside [0,1]");

  std::vector<ProbabilityGrid<double>> grids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    std::vector<double> samples;
    std::string token;
    while (row >> token) samples.push_back(parse_double(token, line_no));
    if (static_cast<long>(samples.size()) != grid_size)
      throw DimensionMismatch("row on line " + std::to_string(line_no) + " has " +
                              std::to_string(samples.size()) + " samples, header declares " +
                              std::to_string(grid_size));
    Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(samples.data(), grid_size);
    if ((v.array() < 0.0).any() || !v.allFinite())
      throw FormatError("negative or non-finite density on line " + std::to_string(line_no));
    grids.push_back(ProbabilityGrid<double>::from_normalized(std::move(v)));
  }
  if (static_cast<long>(grids.size()) != 2 * period)
    throw DimensionMismatch("expected " + std::to_string(2 * period) + " density rows, found " +
                            std::to_string(grids.size()));
  std::vector<ProbabilityGrid<double>> occupied(grids.begin(), grids.begin() + period);
  std::vector<ProbabilityGrid<double>> vacant(grids.begin() + period, grids.end());
  return OccupancyModel<double>(lambda, std::move(occupied), std::move(vacant));
}

void save_model(const OccupancyModel<double>& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_model(out, model);
  if (!out) throw IoError("write to '" + path + "' failed");
}

OccupancyModel<double> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_model(in);
}

}  // namespace occmpc
