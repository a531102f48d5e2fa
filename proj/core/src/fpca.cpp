#include "fnncc/fpca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "fnncc/errors.hpp"

namespace fnncc {

Eigen::MatrixXd StandardizationFns::apply_values(const Eigen::MatrixXd& values,
                                                 int p) const {
  return (values.rowwise() - mean[p].transpose()).array().rowwise() /
         sd[p].transpose().array();
}

Eigen::MatrixXd StandardizationFns::unapply_values(const Eigen::MatrixXd& values,
                                                   int p) const {
  return (values.array().rowwise() * sd[p].transpose().array()).matrix().rowwise() +
         mean[p].transpose();
}

MultiFunctionalData StandardizationFns::apply(const MultiFunctionalData& fd) const {
  // Standardized grid values are re-smoothed onto the covariate's own basis;
  // the pointwise (0, 1) moments hold exactly before this projection.
  MultiFunctionalData out;
  out.reserve(fd.size());
  for (std::size_t p = 0; p < fd.size(); ++p) {
    const Eigen::MatrixXd std_values =
        apply_values(fd[p].values(grid), static_cast<int>(p));
    out.push_back(smooth_profiles(std_values, grid, fd[p].basis,
                                  PenaltySpec::fixed(0.0), fd[p].covariate_id)
                      .fd);
  }
  return out;
}

MultiFunctionalData StandardizationFns::unapply(const MultiFunctionalData& fd) const {
  MultiFunctionalData out;
  out.reserve(fd.size());
  for (std::size_t p = 0; p < fd.size(); ++p) {
    const Eigen::MatrixXd values =
        unapply_values(fd[p].values(grid), static_cast<int>(p));
    out.push_back(smooth_profiles(values, grid, fd[p].basis,
                                  PenaltySpec::fixed(0.0), fd[p].covariate_id)
                      .fd);
  }
  return out;
}

std::pair<MultiFunctionalData, StandardizationFns> standardize(
    const MultiFunctionalData& fd, const Grid& grid) {
  if (fd.empty()) throw Error(ErrorCode::data, "standardize needs covariates");
  const int n = fd.front().n_samples();
  if (n < 2) throw Error(ErrorCode::data, "standardize needs at least 2 samples");

  StandardizationFns fns{grid, {}, {}};
  for (const FunctionalData& cov : fd) {
    if (cov.n_samples() != n) {
      throw Error(ErrorCode::data, "covariates must have aligned samples");
    }
    const Eigen::MatrixXd values = cov.values(grid);
    const Eigen::VectorXd mean = values.colwise().mean();
    const Eigen::MatrixXd centered = values.rowwise() - mean.transpose();
    // Pointwise population standard deviation (1/n), so two mirrored samples
    // standardize to exactly +1 and -1.
    const Eigen::VectorXd sd =
        (centered.colwise().squaredNorm() / static_cast<double>(n))
            .cwiseSqrt()
            .transpose();
    for (Eigen::Index j = 0; j < sd.size(); ++j) {
      if (!(sd[j] > 0.0) || !std::isfinite(sd[j])) {
        throw Error(ErrorCode::degenerate_data,
                    "zero pointwise standard deviation in covariate '" +
                        cov.covariate_id + "'");
      }
    }
    fns.mean.push_back(mean);
    fns.sd.push_back(sd);
  }
  return {fns.apply(fd), fns};
}

MfpcaModel fit_mfpca(const MultiFunctionalData& standardized,
                     const QuadratureRule& rule, int max_components) {
  if (standardized.empty()) throw Error(ErrorCode::data, "fit_mfpca needs covariates");
  const int n = standardized.front().n_samples();
  if (n < 2) throw Error(ErrorCode::data, "fit_mfpca needs at least 2 samples");
  const int n_cov = static_cast<int>(standardized.size());
  const int n_points = rule.grid.size();

  int total_basis_dim = 0;
  for (const FunctionalData& cov : standardized) total_basis_dim += cov.basis.n_basis();
  const int rank_bound = std::min(n - 1, total_basis_dim);
  int target = max_components > 0 ? std::min(max_components, rank_bound) : rank_bound;

  // Evaluations scaled by sqrt(w) make the discretized covariance operator a
  // symmetric matrix whose eigenvectors map back to L2-orthonormal functions.
  const Eigen::VectorXd sqrt_w = rule.weights.cwiseSqrt();
  Eigen::MatrixXd weighted(n, n_cov * n_points);
  std::vector<Eigen::MatrixXd> values(standardized.size());
  for (int p = 0; p < n_cov; ++p) {
    values[p] = standardized[p].values(rule.grid);
    weighted.middleCols(p * n_points, n_points) =
        values[p].array().rowwise() * sqrt_w.transpose().array();
  }

  const Eigen::MatrixXd cov =
      weighted.transpose() * weighted / static_cast<double>(n - 1);
  if (!cov.allFinite()) {
    throw Error(ErrorCode::data, "non-finite covariance in fit_mfpca");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::numeric, "covariance eigendecomposition failed");
  }
  const Eigen::VectorXd all_values = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd all_vectors = solver.eigenvectors();
  const double lambda_max = std::max(all_values[all_values.size() - 1], 0.0);
  const double floor = 1e-12 * std::max(lambda_max, 1e-300);

  int kept = 0;
  for (Eigen::Index i = all_values.size() - 1; i >= 0 && kept < target; --i) {
    if (all_values[i] <= floor) break;
    ++kept;
  }
  if (kept == 0) {
    throw Error(ErrorCode::degenerate_data, "covariance operator has no positive spectrum");
  }

  MfpcaModel model{Eigen::VectorXd(kept), {}, {}, {}, StandardizationFns{rule.grid, {}, {}}, rule};
  std::vector<Eigen::MatrixXd> psi_values(
      static_cast<std::size_t>(n_cov), Eigen::MatrixXd(kept, n_points));

  const Eigen::VectorXd inv_sqrt_w = sqrt_w.cwiseInverse();
  for (int m = 0; m < kept; ++m) {
    const Eigen::Index src = all_values.size() - 1 - m;
    model.eigenvalues[m] = all_values[src];
    Eigen::VectorXd u = all_vectors.col(src);
    // Sign convention: the entry of largest magnitude is positive.
    Eigen::Index arg_max = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (std::abs(u[i]) > best) {
        best = std::abs(u[i]);
        arg_max = i;
      }
    }
    if (u[arg_max] < 0.0) u = -u;
    for (int p = 0; p < n_cov; ++p) {
      psi_values[static_cast<std::size_t>(p)].row(m) =
          (u.segment(p * n_points, n_points).array() * inv_sqrt_w.array())
              .transpose();
    }
  }

  for (int p = 0; p < n_cov; ++p) {
    const BSplineBasis& basis = standardized[static_cast<std::size_t>(p)].basis;
    const Eigen::MatrixXd design = basis.evaluate(rule.grid);
    // Square collocation systems go through LU; pivoted-QR rank truncation
    // can otherwise inject near-null-space ringing between the grid points.
    Eigen::MatrixXd coeffs;
    if (design.rows() == design.cols()) {
      coeffs = Eigen::PartialPivLU<Eigen::MatrixXd>(design)
                   .solve(psi_values[static_cast<std::size_t>(p)].transpose())
                   .transpose();
    } else {
      coeffs = Eigen::HouseholderQR<Eigen::MatrixXd>(design)
                   .solve(psi_values[static_cast<std::size_t>(p)].transpose())
                   .transpose();
    }
    // Grid values are canonically re-synthesized from the coefficients, so a
    // persisted model reproduces scores bit-for-bit after reload.
    model.eigenfunction_values.push_back(coeffs * design.transpose());
    model.eigenfunction_coeffs.push_back(std::move(coeffs));
    model.bases.push_back(basis);
  }
  return model;
}

Eigen::MatrixXd compute_scores_values(const MfpcaModel& model,
                                      const std::vector<Eigen::MatrixXd>& values) {
  if (static_cast<int>(values.size()) != model.n_covariates()) {
    throw Error(ErrorCode::data, "covariate count mismatch in compute_scores");
  }
  const Eigen::Index n = values.front().rows();
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, model.n_components());
  for (int p = 0; p < model.n_covariates(); ++p) {
    scores.noalias() +=
        (values[static_cast<std::size_t>(p)].array().rowwise() *
         model.rule.weights.transpose().array())
            .matrix() *
        model.eigenfunction_values[static_cast<std::size_t>(p)].transpose();
  }
  return scores;
}

Eigen::MatrixXd compute_scores(const MfpcaModel& model,
                               const MultiFunctionalData& standardized) {
  std::vector<Eigen::MatrixXd> values;
  values.reserve(standardized.size());
  for (const FunctionalData& cov : standardized) {
    values.push_back(cov.values(model.rule.grid));
  }
  return compute_scores_values(model, values);
}

MultiFunctionalData reconstruct(const MfpcaModel& model,
                                const Eigen::MatrixXd& scores, int n_components) {
  if (n_components > model.n_components()) {
    throw Error(ErrorCode::config, "reconstruct: more components than the model has");
  }
  MultiFunctionalData out;
  for (int p = 0; p < model.n_covariates(); ++p) {
    const auto& coeffs = model.eigenfunction_coeffs[static_cast<std::size_t>(p)];
    Eigen::MatrixXd c =
        scores.leftCols(n_components) * coeffs.topRows(n_components);
    if (n_components == 0) {
      c = Eigen::MatrixXd::Zero(scores.rows(), coeffs.cols());
    }
    out.push_back(FunctionalData{model.bases[static_cast<std::size_t>(p)], std::move(c),
                                 "pc_" + std::to_string(p)});
  }
  return out;
}

std::vector<double> press_curve(const Eigen::VectorXd& y,
                                const Eigen::MatrixXd& scores, int max_components) {
  const Eigen::Index n = y.size();
  if (n < 10) throw Error(ErrorCode::data, "press_curve needs at least 10 samples");
  if (scores.rows() != n) {
    throw Error(ErrorCode::data, "press_curve: score rows must match y");
  }
  const int max_m = std::min<int>(max_components, static_cast<int>(scores.cols()));

  std::vector<double> press;
  press.reserve(static_cast<std::size_t>(max_m) + 1);
  for (int m = 0; m <= max_m; ++m) {
    Eigen::MatrixXd design(n, m + 1);
    design.col(0).setOnes();
    if (m > 0) design.rightCols(m) = scores.leftCols(m);

    const Eigen::MatrixXd gram = design.transpose() * design;
    Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    const Eigen::VectorXd beta = solver.solve(design.transpose() * y);
    const Eigen::VectorXd residual = y - design * beta;
    const Eigen::MatrixXd gram_inv_dt = solver.solve(design.transpose());
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double leverage = design.row(i) * gram_inv_dt.col(i);
      const double loo = residual[i] / (1.0 - leverage);
      total += loo * loo;
    }
    press.push_back(total);
  }
  return press;
}

int select_M_press(const Eigen::VectorXd& y, const Eigen::MatrixXd& scores,
                   double reduction_threshold) {
  const std::vector<double> press =
      press_curve(y, scores, static_cast<int>(scores.cols()));
  int selected = 0;
  for (std::size_t m = 1; m < press.size(); ++m) {
    if (press[m] <= (1.0 - reduction_threshold) * press[m - 1]) {
      selected = static_cast<int>(m);
    } else {
      break;
    }
  }
  return selected;
}

}  // namespace fnncc
