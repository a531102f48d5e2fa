#include "fnncc/sof.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "fnncc/errors.hpp"
#include "fnncc/log.hpp"

namespace fnncc {

SofModel fit_sof(const Eigen::VectorXd& y, const Eigen::MatrixXd& scores,
                 std::shared_ptr<const MfpcaModel> mfpca, int n_components) {
  const Eigen::Index n = y.size();
  const int m = n_components > 0
                    ? n_components
                    : static_cast<int>(scores.cols());
  if (m > scores.cols()) {
    throw Error(ErrorCode::config, "fit_sof: not enough score columns");
  }
  if (n < m + 1) {
    throw Error(ErrorCode::data, "fit_sof needs n >= M + 1 samples");
  }

  SofModel model;
  model.alpha = y.mean();
  model.b.resize(m);
  model.mfpca = std::move(mfpca);
  for (int k = 0; k < m; ++k) {
    const double ss = scores.col(k).squaredNorm();
    if (!(ss > 0.0)) {
      throw Error(ErrorCode::rank_deficient,
                  "score column " + std::to_string(k + 1) + " has zero sum of squares");
    }
    model.b[k] = y.dot(scores.col(k)) / ss;
  }

  // Cross-check against the full least-squares solution on [1, scores].
  Eigen::MatrixXd design(n, m + 1);
  design.col(0).setOnes();
  design.rightCols(m) = scores.leftCols(m);
  const Eigen::VectorXd ols =
      design.colPivHouseholderQr().solve(y);
  double max_diff = std::abs(ols[0] - model.alpha);
  for (int k = 0; k < m; ++k) {
    max_diff = std::max(max_diff, std::abs(ols[k + 1] - model.b[k]));
  }
  if (max_diff > 1e-8) {
    log::warn("fit_sof: closed-form coefficients deviate from full least squares by ",
              max_diff, "; score columns are not numerically orthogonal");
  }
  return model;
}

Eigen::VectorXd predict_sof_scores(const SofModel& model,
                                   const Eigen::MatrixXd& scores) {
  return (scores.leftCols(model.n_components()) * model.b).array() + model.alpha;
}

Eigen::VectorXd predict_sof(const SofModel& model,
                            const MultiFunctionalData& standardized) {
  const Eigen::MatrixXd scores = compute_scores(*model.mfpca, standardized);
  return predict_sof_scores(model, scores);
}

Eigen::VectorXd predict_sof_integral(const SofModel& model,
                                     const MultiFunctionalData& standardized) {
  const MfpcaModel& mfpca = *model.mfpca;
  const Eigen::MatrixXd beta = beta_hat(model, mfpca.rule.grid);
  Eigen::VectorXd out =
      Eigen::VectorXd::Constant(standardized.front().n_samples(), model.alpha);
  for (int p = 0; p < mfpca.n_covariates(); ++p) {
    const Eigen::MatrixXd values =
        standardized[static_cast<std::size_t>(p)].values(mfpca.rule.grid);
    out += (values.array().rowwise() * mfpca.rule.weights.transpose().array())
               .matrix() *
           beta.row(p).transpose();
  }
  return out;
}

Eigen::MatrixXd beta_hat(const SofModel& model, const Grid& grid) {
  const MfpcaModel& mfpca = *model.mfpca;
  Eigen::MatrixXd beta(mfpca.n_covariates(), grid.size());
  const int m = model.n_components();
  for (int p = 0; p < mfpca.n_covariates(); ++p) {
    const Eigen::MatrixXd psi =
        mfpca.eigenfunction_coeffs[static_cast<std::size_t>(p)].topRows(m) *
        mfpca.bases[static_cast<std::size_t>(p)].evaluate(grid).transpose();
    beta.row(p) = model.b.transpose() * psi;
  }
  return beta;
}

}  // namespace fnncc
