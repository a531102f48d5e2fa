#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "fnncc/fpca.hpp"

namespace fnncc {

// Linear scalar-on-function regression fitted through MFPC scores:
//   y = alpha + sum_m xi_m b_m.
struct SofModel {
  double alpha = 0.0;
  Eigen::VectorXd b;                     // length M
  std::shared_ptr<const MfpcaModel> mfpca;

  int n_components() const { return static_cast<int>(b.size()); }
};

// Closed-form fit: alpha = mean(y), b_m = sum y_i xi_im / sum xi_im^2.
// Score columns are empirically orthogonal on the fitting sample; a full
// least-squares solve is compared against the closed forms and any
// disagreement beyond 1e-8 is logged as a warning.
SofModel fit_sof(const Eigen::VectorXd& y, const Eigen::MatrixXd& scores,
                 std::shared_ptr<const MfpcaModel> mfpca, int n_components);

// Score-space prediction alpha + xi . b for standardized input.
Eigen::VectorXd predict_sof(const SofModel& model,
                            const MultiFunctionalData& standardized);
Eigen::VectorXd predict_sof_scores(const SofModel& model,
                                   const Eigen::MatrixXd& scores);

// Equivalent integral form alpha + sum_p <X_p, beta_p> via quadrature;
// agrees with the score form to rounding.
Eigen::VectorXd predict_sof_integral(const SofModel& model,
                                     const MultiFunctionalData& standardized);

// Functional coefficient beta_p(t) = sum_m b_m psi_mp(t) on a grid,
// one row per covariate.
Eigen::MatrixXd beta_hat(const SofModel& model, const Grid& grid);

}  // namespace fnncc
