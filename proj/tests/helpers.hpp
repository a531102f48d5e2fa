#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>

#include "fnncc/bspline.hpp"
#include "fnncc/grid.hpp"

namespace fnncc::testing {

// Dense Riemann sum on [0, 1]; independent integration oracle.
inline double riemann(const std::function<double(double)>& f, int n = 1000000) {
  const double h = 1.0 / n;
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += f((i + 0.5) * h);
  return total * h;
}

// Exact integral of one clamped B-spline basis function:
// int B_{i,k} = (u_{i+k} - u_i) / k.
inline double exact_bspline_integral(const BSplineBasis& basis, int i) {
  const auto& knots = basis.knots();
  return (knots[static_cast<std::size_t>(i + basis.order())] -
          knots[static_cast<std::size_t>(i)]) /
         basis.order();
}

inline double sample_mean(const Eigen::VectorXd& v) { return v.mean(); }

inline double sample_sd(const Eigen::VectorXd& v) {
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / (v.size() - 1));
}

inline double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  const Eigen::ArrayXd ca = a.array() - ma;
  const Eigen::ArrayXd cb = b.array() - mb;
  return (ca * cb).sum() / std::sqrt(ca.square().sum() * cb.square().sum());
}

}  // namespace fnncc::testing
