#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "fnncc/grid.hpp"
#include "fnncc/smoothing.hpp"

namespace fnncc {

// Pointwise sample mean and standard deviation per covariate, frozen at fit
// time. Phase II data is standardized with these functions, never refit.
struct StandardizationFns {
  Grid grid = Grid::uniform(4);
  std::vector<Eigen::VectorXd> mean;  // per covariate, |grid| values
  std::vector<Eigen::VectorXd> sd;    // strictly positive

  int n_covariates() const { return static_cast<int>(mean.size()); }

  // (values - mean) / sd, rowwise, for covariate p.
  Eigen::MatrixXd apply_values(const Eigen::MatrixXd& values, int p) const;
  Eigen::MatrixXd unapply_values(const Eigen::MatrixXd& values, int p) const;

  // Standardize smoothed profiles; the result interpolates the standardized
  // grid values exactly.
  MultiFunctionalData apply(const MultiFunctionalData& fd) const;
  MultiFunctionalData unapply(const MultiFunctionalData& fd) const;
};

// Eigenpairs of the covariance operator of standardized multivariate
// functional data, discretized with quadrature weights.
struct MfpcaModel {
  Eigen::VectorXd eigenvalues;                     // non-increasing
  std::vector<Eigen::MatrixXd> eigenfunction_coeffs;  // per covariate: M x K
  std::vector<Eigen::MatrixXd> eigenfunction_values;  // per covariate: M x |grid|
  std::vector<BSplineBasis> bases;                 // basis of the coefficient rows
  StandardizationFns standardization;
  QuadratureRule rule;

  int n_components() const { return static_cast<int>(eigenvalues.size()); }
  int n_covariates() const { return static_cast<int>(eigenfunction_values.size()); }
};

std::pair<MultiFunctionalData, StandardizationFns> standardize(
    const MultiFunctionalData& fd, const Grid& grid);

// max_components <= min(n-1, total basis dimension); pass 0 for that bound.
MfpcaModel fit_mfpca(const MultiFunctionalData& standardized,
                     const QuadratureRule& rule, int max_components = 0);

// Score matrix xi_im = sum_p <X_ip, psi_mp>; one row per sample.
Eigen::MatrixXd compute_scores(const MfpcaModel& model,
                               const MultiFunctionalData& standardized);
// Fast path over grid-value matrices (one n x |grid| matrix per covariate).
Eigen::MatrixXd compute_scores_values(const MfpcaModel& model,
                                      const std::vector<Eigen::MatrixXd>& values);

// Truncated expansion sum_{m<=M} xi_im psi_mp(t), on the model's basis.
MultiFunctionalData reconstruct(const MfpcaModel& model,
                                const Eigen::MatrixXd& scores, int n_components);

// Leave-one-out PRESS of the least-squares fit of y on the first M score
// columns (intercept included), via the closed-form identity
// e_(i) = e_i / (1 - h_ii). Index 0 is the intercept-only model.
std::vector<double> press_curve(const Eigen::VectorXd& y,
                                const Eigen::MatrixXd& scores, int max_components);

// Smallest component count reached by adding components while each addition
// cuts PRESS by at least `reduction_threshold` (relative); 0 when even the
// first component fails to.
int select_M_press(const Eigen::VectorXd& y, const Eigen::MatrixXd& scores,
                   double reduction_threshold = 0.01);

}  // namespace fnncc
