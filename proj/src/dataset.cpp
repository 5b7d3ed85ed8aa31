#include "bsi/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "bsi/io.hpp"

namespace bsi {

void Dataset::validate() const {
  if (lanes.empty()) throw std::invalid_argument("dataset needs at least one lane");
  for (std::size_t i = 1; i < lanes.size(); ++i) {
    if (lanes[i] == lanes[i - 1]) throw std::invalid_argument("duplicate lane in dataset");
  }
  if (y_obs.size() != static_cast<Eigen::Index>(size())) {
    throw std::invalid_argument("dataset vector length does not match lanes * grid size");
  }
}

std::string dataset_to_csv(const Dataset& data) {
  data.validate();
  std::string out = "sensor_x,t,lane,y_obs\n";
  const auto& grid = data.grid;
  for (std::size_t b = 0; b < data.lanes.size(); ++b) {
    for (std::size_t k = 0; k < grid.n_t(); ++k) {
      for (std::size_t j = 0; j < grid.n_x(); ++j) {
        const auto idx = static_cast<Eigen::Index>(b * grid.size() + grid.index(k, j));
        out += fmt_double(grid.x_coords()[j]) + "," + fmt_double(grid.t_coords()[k]) + "," +
               to_string(data.lanes[b]) + "," + fmt_double(data.y_obs(idx)) + "\n";
      }
    }
  }
  return out;
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file '" + path + "'");
  if (line != "sensor_x,t,lane,y_obs") {
    throw std::runtime_error("dataset header must be 'sensor_x,t,lane,y_obs', got '" + line +
                             "'");
  }

  struct Row {
    double x, t, y;
    Lane lane;
  };
  std::vector<Row> rows;
  std::vector<Lane> lane_order;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string fx, ft, flane, fy;
    if (!std::getline(ss, fx, ',') || !std::getline(ss, ft, ',') ||
        !std::getline(ss, flane, ',') || !std::getline(ss, fy)) {
      throw std::runtime_error("malformed dataset row at line " + std::to_string(line_no));
    }
    Row r{};
    try {
      r.x = std::stod(fx);
      r.t = std::stod(ft);
      r.y = std::stod(fy);
    } catch (const std::exception&) {
      throw std::runtime_error("non-numeric dataset field at line " + std::to_string(line_no));
    }
    r.lane = lane_from_string(flane);
    if (std::find(lane_order.begin(), lane_order.end(), r.lane) == lane_order.end()) {
      lane_order.push_back(r.lane);
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw std::runtime_error("dataset has no observations");

  std::vector<double> xs, ts;
  for (const auto& r : rows) {
    if (!std::binary_search(xs.begin(), xs.end(), r.x)) {
      xs.insert(std::upper_bound(xs.begin(), xs.end(), r.x), r.x);
    }
    if (!std::binary_search(ts.begin(), ts.end(), r.t)) {
      ts.insert(std::upper_bound(ts.begin(), ts.end(), r.t), r.t);
    }
  }
  SpaceTimeGrid grid(xs, ts);  // enforces strict monotonicity

  Dataset data{std::move(grid), lane_order,
               Eigen::VectorXd::Constant(
                   static_cast<Eigen::Index>(lane_order.size() * xs.size() * ts.size()),
                   std::numeric_limits<double>::quiet_NaN())};
  auto x_index = [&](double v) {
    return static_cast<std::size_t>(
        std::lower_bound(xs.begin(), xs.end(), v) - xs.begin());
  };
  auto t_index = [&](double v) {
    return static_cast<std::size_t>(
        std::lower_bound(ts.begin(), ts.end(), v) - ts.begin());
  };
  for (const auto& r : rows) {
    const std::size_t b = static_cast<std::size_t>(
        std::find(lane_order.begin(), lane_order.end(), r.lane) - lane_order.begin());
    const auto idx = static_cast<Eigen::Index>(b * data.grid.size() +
                                               data.grid.index(t_index(r.t), x_index(r.x)));
    if (!std::isnan(data.y_obs(idx))) {
      throw std::runtime_error("duplicate observation for (sensor_x=" + std::to_string(r.x) +
                               ", t=" + std::to_string(r.t) + ", " + to_string(r.lane) + ")");
    }
    data.y_obs(idx) = r.y;
  }
  for (Eigen::Index i = 0; i < data.y_obs.size(); ++i) {
    if (std::isnan(data.y_obs(i))) {
      throw std::runtime_error(
          "dataset is not a complete sensor x time lattice per lane (missing entries)");
    }
  }
  return data;
}

std::vector<std::size_t> reference_subset(const Dataset& data, int per_line,
                                          double min_separation_m) {
  data.validate();
  if (per_line < 1) throw std::invalid_argument("need at least one point per line");
  const auto& grid = data.grid;
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < data.lanes.size(); ++b) {
    for (std::size_t j = 0; j < grid.n_x(); ++j) {
      std::vector<std::size_t> order(grid.n_t());
      for (std::size_t k = 0; k < grid.n_t(); ++k) order[k] = k;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
        const double ya =
            std::abs(data.y_obs(static_cast<Eigen::Index>(b * grid.size() + grid.index(a, j))));
        const double yc =
            std::abs(data.y_obs(static_cast<Eigen::Index>(b * grid.size() + grid.index(c, j))));
        if (ya != yc) return ya > yc;
        return a < c;
      });
      std::vector<std::size_t> picked;
      for (std::size_t k : order) {
        if (static_cast<int>(picked.size()) >= per_line) break;
        bool far_enough = true;
        for (std::size_t p : picked) {
          if (std::abs(grid.t_coords()[k] - grid.t_coords()[p]) < min_separation_m) {
            far_enough = false;
            break;
          }
        }
        if (far_enough) picked.push_back(k);
      }
      for (std::size_t k : picked) out.push_back(b * grid.size() + grid.index(k, j));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace bsi
