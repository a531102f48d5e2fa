#include "fnncc/smoothing.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "fnncc/errors.hpp"

namespace fnncc {

namespace {

struct FitAtLambda {
  Eigen::MatrixXd coefficients;  // n x K
  double sse = 0.0;
  double df = 0.0;
};

// Symmetric square root factor L with L' L = penalty (PSD).
Eigen::MatrixXd penalty_root(const Eigen::MatrixXd& penalty) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(penalty);
  const Eigen::VectorXd d = solver.eigenvalues().cwiseMax(0.0);
  return d.cwiseSqrt().asDiagonal() * solver.eigenvectors().transpose();
}

// Penalized least squares as a stacked system [B; sqrt(lambda) L] c = [y; 0],
// solved by QR. This keeps huge lambdas well conditioned, where the normal
// equations lose the data term entirely.
FitAtLambda fit_lambda(const Eigen::MatrixXd& raw, const Eigen::MatrixXd& design,
                       const Eigen::MatrixXd& penalty_sqrt, double lambda) {
  const Eigen::Index n_points = design.rows();
  const Eigen::Index n_basis = design.cols();
  Eigen::MatrixXd stacked(n_points + n_basis, n_basis);
  stacked.topRows(n_points) = design;
  stacked.bottomRows(n_basis) = std::sqrt(lambda) * penalty_sqrt;

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
  if (qr.rank() < n_basis) {
    throw Error(ErrorCode::ill_posed_fit, "smoothing system is rank deficient");
  }

  Eigen::MatrixXd rhs =
      Eigen::MatrixXd::Zero(n_points + n_basis, raw.rows());
  rhs.topRows(n_points) = raw.transpose();

  FitAtLambda fit;
  fit.coefficients = qr.solve(rhs).transpose();
  const Eigen::MatrixXd fitted = fit.coefficients * design.transpose();
  fit.sse = (raw - fitted).squaredNorm();

  // df = trace of the smoother = || B R^-1 P ||_F^2 with A P = Q R.
  const Eigen::MatrixXd r_full = qr.matrixR()
                                     .topLeftCorner(n_basis, n_basis)
                                     .template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd permuted = design * qr.colsPermutation();
  const Eigen::MatrixXd solved = r_full.transpose()
                                     .triangularView<Eigen::Lower>()
                                     .solve(permuted.transpose());
  fit.df = solved.squaredNorm();

  if (!fit.coefficients.allFinite()) {
    throw Error(ErrorCode::ill_posed_fit, "smoothing produced non-finite coefficients");
  }
  return fit;
}

}  // namespace

SmoothResult smooth_profiles(const Eigen::MatrixXd& raw, const Grid& grid,
                             const BSplineBasis& basis, const PenaltySpec& penalty,
                             const std::string& covariate_id) {
  const int n_points = grid.size();
  if (raw.cols() != n_points) {
    throw Error(ErrorCode::data, "raw profile columns must match the grid size");
  }
  if (raw.rows() < 1) {
    throw Error(ErrorCode::data, "smooth_profiles needs at least one sample");
  }
  if (penalty.fixed_lambda.has_value() && *penalty.fixed_lambda < 0.0) {
    throw Error(ErrorCode::config, "smoothing lambda must be nonnegative");
  }

  const bool fixed = penalty.fixed_lambda.has_value();
  const double lambda0 = fixed ? *penalty.fixed_lambda : 0.0;
  if (basis.n_basis() > n_points && (!fixed || lambda0 == 0.0)) {
    throw Error(ErrorCode::ill_posed_fit,
                "unpenalized fit with more basis functions than grid points");
  }

  const Eigen::MatrixXd design = basis.evaluate(grid);
  const Eigen::MatrixXd pen_sqrt = penalty_root(basis.penalty_matrix());

  if (fixed) {
    FitAtLambda fit = fit_lambda(raw, design, pen_sqrt, lambda0);
    return {FunctionalData{basis, std::move(fit.coefficients), covariate_id},
            lambda0, 0.0};
  }

  double best_lambda = 0.0;
  double best_gcv = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd best_coeffs;
  const double log_lo = std::log10(penalty.gcv_min);
  const double log_hi = std::log10(penalty.gcv_max);
  for (int i = 0; i < penalty.gcv_count; ++i) {
    const double frac =
        penalty.gcv_count == 1 ? 0.0 : static_cast<double>(i) / (penalty.gcv_count - 1);
    const double lambda = std::pow(10.0, log_lo + frac * (log_hi - log_lo));
    FitAtLambda fit = fit_lambda(raw, design, pen_sqrt, lambda);
    const double denom = static_cast<double>(n_points) - fit.df;
    if (denom <= 0.0) continue;
    const double gcv = static_cast<double>(n_points) * fit.sse / (denom * denom);
    if (gcv < best_gcv) {
      best_gcv = gcv;
      best_lambda = lambda;
      best_coeffs = std::move(fit.coefficients);
    }
  }
  if (!std::isfinite(best_gcv)) {
    throw Error(ErrorCode::ill_posed_fit, "GCV search found no admissible lambda");
  }
  return {FunctionalData{basis, std::move(best_coeffs), covariate_id}, best_lambda,
          best_gcv};
}

FunctionalData interpolate_values(const Eigen::MatrixXd& values, const Grid& grid,
                                  const std::string& covariate_id) {
  BSplineBasis basis(4, grid.size());
  const Eigen::MatrixXd design = basis.evaluate(grid);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(design);
  Eigen::MatrixXd coeffs = lu.solve(values.transpose()).transpose();
  if (!coeffs.allFinite()) {
    throw Error(ErrorCode::numeric, "interpolation produced non-finite coefficients");
  }
  return FunctionalData{std::move(basis), std::move(coeffs), covariate_id};
}

}  // namespace fnncc
