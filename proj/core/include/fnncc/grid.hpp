#pragma once

#include <Eigen/Core>

namespace fnncc {

// Evaluation grid on the unit domain [0, 1]: strictly increasing, endpoints
// pinned to 0 and 1, at least 4 points.
class Grid {
 public:
  explicit Grid(Eigen::VectorXd points);

  static Grid uniform(int n_points);

  const Eigen::VectorXd& points() const { return points_; }
  int size() const { return static_cast<int>(points_.size()); }
  double operator[](int i) const { return points_[i]; }

  // True when consecutive spacings agree to a 1e-9 relative tolerance.
  bool is_uniform() const;

 private:
  Eigen::VectorXd points_;
};

enum class QuadratureMethod { simpson, trapezoid };

// Weights for approximating integrals over [0,1] as sum_j w_j f(t_j).
struct QuadratureRule {
  Grid grid = Grid::uniform(4);
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(4, 0.25);

  double integrate(const Eigen::VectorXd& values) const {
    return weights.dot(values);
  }
};

// Simpson needs >= 3 points on a uniform grid; an even point count is
// handled with composite panels plus a trapezoid closure on the last
// interval. Trapezoid accepts any grid.
QuadratureRule quadrature_weights(const Grid& grid, QuadratureMethod method);

// sum_j w_j f(t_j) g(t_j) for grid samples of f and g.
double inner_product(const QuadratureRule& rule, const Eigen::VectorXd& f_values,
                     const Eigen::VectorXd& g_values);

}  // namespace fnncc
