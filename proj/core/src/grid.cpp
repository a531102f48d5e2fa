#include "fnncc/grid.hpp"

#include <cmath>
#include <utility>

#include "fnncc/errors.hpp"

namespace fnncc {

Grid::Grid(Eigen::VectorXd points) : points_(std::move(points)) {
  const auto n = points_.size();
  if (n < 4) {
    throw Error(ErrorCode::config, "grid needs at least 4 points");
  }
  if (points_[0] != 0.0 || points_[n - 1] != 1.0) {
    throw Error(ErrorCode::config, "grid must start at 0 and end at 1");
  }
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(points_[i] > points_[i - 1])) {
      throw Error(ErrorCode::config, "grid points must be strictly increasing");
    }
  }
}

Grid Grid::uniform(int n_points) {
  Eigen::VectorXd pts(n_points);
  for (int i = 0; i < n_points; ++i) {
    pts[i] = static_cast<double>(i) / static_cast<double>(n_points - 1);
  }
  pts[n_points - 1] = 1.0;
  return Grid(pts);
}

bool Grid::is_uniform() const {
  const int n = size();
  const double h = (points_[n - 1] - points_[0]) / (n - 1);
  for (int i = 1; i < n; ++i) {
    if (std::abs((points_[i] - points_[i - 1]) - h) > 1e-9 * h) return false;
  }
  return true;
}

QuadratureRule quadrature_weights(const Grid& grid, QuadratureMethod method) {
  const int n = grid.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);

  if (method == QuadratureMethod::trapezoid) {
    for (int i = 0; i + 1 < n; ++i) {
      const double h = grid[i + 1] - grid[i];
      w[i] += 0.5 * h;
      w[i + 1] += 0.5 * h;
    }
    return {grid, w};
  }

  if (n < 3) {
    throw Error(ErrorCode::config, "simpson rule needs at least 3 grid points");
  }
  if (!grid.is_uniform()) {
    throw Error(ErrorCode::config,
                "simpson rule requires an equally spaced grid; use trapezoid");
  }

  const double h = 1.0 / (n - 1);
  const int n_intervals = n - 1;
  // Simpson panels cover pairs of intervals; an odd interval count leaves the
  // last interval to a trapezoid closure.
  const int paired = (n_intervals % 2 == 0) ? n_intervals : n_intervals - 1;
  for (int i = 0; i + 2 <= paired; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  if (paired != n_intervals) {
    w[n - 2] += 0.5 * h;
    w[n - 1] += 0.5 * h;
  }
  return {grid, w};
}

double inner_product(const QuadratureRule& rule, const Eigen::VectorXd& f_values,
                     const Eigen::VectorXd& g_values) {
  if (f_values.size() != rule.weights.size() ||
      g_values.size() != rule.weights.size()) {
    throw Error(ErrorCode::data, "inner_product operands must match the rule grid");
  }
  return (rule.weights.array() * f_values.array() * g_values.array()).sum();
}

}  // namespace fnncc
