#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "fnncc/bspline.hpp"
#include "fnncc/grid.hpp"

namespace fnncc {

// Basis-coefficient representation of one covariate's smoothed profiles:
// one coefficient row per sample.
struct FunctionalData {
  BSplineBasis basis;
  Eigen::MatrixXd coefficients;  // n x n_basis
  std::string covariate_id;

  int n_samples() const { return static_cast<int>(coefficients.rows()); }

  // Sample curves evaluated at grid points: n x |grid|.
  Eigen::MatrixXd values(const Grid& grid) const {
    return coefficients * basis.evaluate(grid).transpose();
  }
};

// One entry per covariate; rows are aligned across covariates.
using MultiFunctionalData = std::vector<FunctionalData>;

struct PenaltySpec {
  // Fixed lambda when set; otherwise lambda is chosen by generalized
  // cross-validation over a log-spaced grid.
  std::optional<double> fixed_lambda;
  double gcv_min = 1e-8;
  double gcv_max = 1e2;
  int gcv_count = 25;

  static PenaltySpec fixed(double lambda) { return PenaltySpec{lambda, 0, 0, 0}; }
  static PenaltySpec gcv() { return PenaltySpec{}; }
};

struct SmoothResult {
  FunctionalData fd;
  double lambda = 0.0;  // the lambda actually used
  double gcv = 0.0;     // criterion value at that lambda (GCV mode only)
};

// Penalized least-squares fit of each raw row:
//   min_c  sum_j (raw_ij - sum_k c_k B_k(t_j))^2 + lambda * c' P c
// with P the integrated squared second derivative penalty. GCV minimizes
// C * SSE(lambda) / (C - df(lambda))^2 where df is the trace of the
// smoothing operator and C the number of grid points.
SmoothResult smooth_profiles(const Eigen::MatrixXd& raw, const Grid& grid,
                             const BSplineBasis& basis, const PenaltySpec& penalty,
                             const std::string& covariate_id = "x");

// Interpolating representation (order-4 basis with n_basis = |grid|) used
// where grid values must be reproduced exactly.
FunctionalData interpolate_values(const Eigen::MatrixXd& values, const Grid& grid,
                                  const std::string& covariate_id = "x");

}  // namespace fnncc
