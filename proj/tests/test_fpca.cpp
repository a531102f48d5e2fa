#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "fnncc/errors.hpp"
#include "fnncc/fpca.hpp"
#include "fnncc/rng.hpp"
#include "helpers.hpp"

using namespace fnncc;

namespace {

// Correlated smooth sample paths, smoothed into a 20-spline representation;
// the workhorse fixture for this suite.
MultiFunctionalData smooth_sample(int n, std::uint64_t seed, const Grid& grid,
                                  int n_basis = 20) {
  Rng rng(seed);
  Eigen::MatrixXd raw(n, grid.size());
  for (int i = 0; i < n; ++i) {
    const double a = rng.normal();
    const double b = rng.normal();
    const double c = rng.normal();
    for (int j = 0; j < grid.size(); ++j) {
      const double t = grid[j];
      raw(i, j) = 1.0 + a * std::sin(2.0 * 3.14159265 * t) +
                  0.5 * b * std::cos(2.0 * 3.14159265 * t) +
                  0.25 * c * std::sin(4.0 * 3.14159265 * t) + 0.02 * rng.normal();
    }
  }
  const BSplineBasis basis(4, n_basis);
  return {smooth_profiles(raw, grid, basis, PenaltySpec::fixed(0.0)).fd};
}

double eval_fd_at(const FunctionalData& fd, int row, double t) {
  return fd.coefficients.row(row).dot(fd.basis.evaluate(t));
}

}  // namespace

TEST_CASE("standardize: degenerate and symmetric cases") {
  const Grid grid = Grid::uniform(50);
  const BSplineBasis basis(4, 8);

  SUBCASE("identical samples give a degenerate-data error") {
    Eigen::MatrixXd raw(3, grid.size());
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < grid.size(); ++j) raw(i, j) = std::sin(3.0 * grid[j]);
    }
    const MultiFunctionalData fd = {
        smooth_profiles(raw, grid, basis, PenaltySpec::fixed(0.0)).fd};
    CHECK_THROWS_AS(standardize(fd, grid), Error);
  }

  SUBCASE("two samples f and -f standardize to +1 and -1") {
    Eigen::MatrixXd raw(2, grid.size());
    for (int j = 0; j < grid.size(); ++j) {
      raw(0, j) = 2.0 + std::sin(4.0 * grid[j]);  // nonzero everywhere
      raw(1, j) = -raw(0, j);
    }
    const MultiFunctionalData fd = {
        smooth_profiles(raw, grid, basis, PenaltySpec::fixed(0.0)).fd};
    auto [standardized, fns] = standardize(fd, grid);
    const Eigen::MatrixXd values = standardized.front().values(grid);
    CHECK((values.row(0).array() - 1.0).abs().maxCoeff() < 1e-7);
    CHECK((values.row(1).array() + 1.0).abs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("standardize: recomputed pointwise moments are (0, 1) before re-smoothing") {
  const Grid grid = Grid::uniform(100);
  const MultiFunctionalData fd = smooth_sample(100, 42, grid);
  auto [standardized, fns] = standardize(fd, grid);
  const Eigen::MatrixXd values = fns.apply_values(fd.front().values(grid), 0);
  const Eigen::VectorXd mean = values.colwise().mean();
  CHECK(mean.cwiseAbs().maxCoeff() < 1e-8);
  const Eigen::MatrixXd centered = values.rowwise() - mean.transpose();
  const Eigen::VectorXd sd =
      (centered.colwise().squaredNorm() / static_cast<double>(values.rows()))
          .cwiseSqrt()
          .transpose();
  CHECK((sd.array() - 1.0).abs().maxCoeff() < 1e-8);

  // the re-smoothed representation keeps the zero mean exactly and the unit
  // scale up to projection error
  const Eigen::MatrixXd smoothed = standardized.front().values(grid);
  CHECK(smoothed.colwise().mean().cwiseAbs().maxCoeff() < 1e-8);
  const Eigen::VectorXd sd_smoothed =
      (smoothed.colwise().squaredNorm() / static_cast<double>(smoothed.rows()))
          .cwiseSqrt()
          .transpose();
  CHECK((sd_smoothed.array() - 1.0).abs().maxCoeff() < 0.05);
}

TEST_CASE("standardize then unstandardize reproduces grid values") {
  const Grid grid = Grid::uniform(100);
  const MultiFunctionalData fd = smooth_sample(40, 17, grid);
  auto [standardized, fns] = standardize(fd, grid);
  const Eigen::MatrixXd original = fd.front().values(grid);
  const Eigen::MatrixXd round_trip =
      fns.unapply_values(fns.apply_values(original, 0), 0);
  CHECK((round_trip - original).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("rank-1 process has one dominant eigenvalue") {
  const Grid grid = Grid::uniform(80);
  Rng rng(5);
  Eigen::MatrixXd raw(60, grid.size());
  for (int i = 0; i < 60; ++i) {
    const double c = rng.normal();
    for (int j = 0; j < grid.size(); ++j) {
      raw(i, j) = c * (1.0 + 0.5 * std::sin(5.0 * grid[j]));
    }
  }
  const BSplineBasis basis(4, 15);
  MultiFunctionalData fd = {
      smooth_profiles(raw, grid, basis, PenaltySpec::fixed(0.0)).fd};
  fd.front().coefficients.rowwise() -= fd.front().coefficients.colwise().mean();
  const QuadratureRule rule = quadrature_weights(grid, QuadratureMethod::simpson);
  const MfpcaModel model = fit_mfpca(fd, rule);
  REQUIRE(model.n_components() >= 1);
  if (model.n_components() > 1) {
    CHECK(model.eigenvalues[1] / model.eigenvalues[0] < 1e-8);
  }
}

TEST_CASE("eigenfunction gram matrix is the identity") {
  const Grid grid = Grid::uniform(100);
  const MultiFunctionalData fd = smooth_sample(120, 8, grid);
  auto [standardized, fns] = standardize(fd, grid);
  const QuadratureRule rule = quadrature_weights(grid, QuadratureMethod::simpson);
  const MfpcaModel model = fit_mfpca(standardized, rule);
  const int m = model.n_components();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  for (int p = 0; p < model.n_covariates(); ++p) {
    const Eigen::MatrixXd& psi = model.eigenfunction_values[p];
    gram += psi * rule.weights.asDiagonal() * psi.transpose();
  }
  CHECK((gram - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("eigenvalue sum matches the integrated variance bookkeeping") {
  const Grid grid = Grid::uniform(100);
  const MultiFunctionalData fd = smooth_sample(200, 23, grid);
  auto [standardized, fns] = standardize(fd, grid);
  const QuadratureRule rule = quadrature_weights(grid, QuadratureMethod::simpson);
  const MfpcaModel model = fit_mfpca(standardized, rule);

  // oracle: total integrated variance via quadrature of the dense pointwise
  // variance (the trace of the covariance)
  const Eigen::MatrixXd values = standardized.front().values(grid);
  const Eigen::VectorXd pointwise_var =
      (values.colwise().squaredNorm() / (values.rows() - 1.0)).transpose();
  const double total_variance = rule.weights.dot(pointwise_var);
  CHECK(std::abs(model.eigenvalues.sum() - total_variance) <
        0.01 * total_variance);
}

TEST_CASE("scores: unit vectors, zeros, riemann oracle, moments") {
  const Grid grid = Grid::uniform(100);
  const MultiFunctionalData fd = smooth_sample(80, 31, grid);
  auto [standardized, fns] = standardize(fd, grid);
  const QuadratureRule rule = quadrature_weights(grid, QuadratureMethod::simpson);
  const MfpcaModel model = fit_mfpca(standardized, rule);

  SUBCASE("feeding psi_1 back yields the unit score vector") {
    MultiFunctionalData psi1 = {
        FunctionalData{model.bases[0], model.eigenfunction_coeffs[0].row(0), "x"}};
    const Eigen::MatrixXd scores = compute_scores(model, psi1);
    CHECK(scores(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
    for (int m = 1; m < model.n_components(); ++m) {
      CHECK(std::abs(scores(0, m)) < 1e-8);
    }
  }

  SUBCASE("zero input gives zero scores") {
    MultiFunctionalData zero = {FunctionalData{
        model.bases[0], Eigen::MatrixXd::Zero(1, model.bases[0].n_basis()), "x"}};
    CHECK(compute_scores(model, zero).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("random sample scores match dense riemann inner products") {
    // odd point count: composite simpson without the trapezoid closure
    const Grid fine = Grid::uniform(151);
    const QuadratureRule fine_rule = quadrature_weights(fine, QuadratureMethod::simpson);
    const MfpcaModel fine_model = fit_mfpca(standardized, fine_rule);
    const Eigen::MatrixXd scores = compute_scores(fine_model, standardized);
    const FunctionalData& x = standardized.front();
    // leading (signal) components; noise eigenfunctions wiggle at the basis
    // resolution and are quadrature-limited rather than score-limited
    for (int m = 0; m < std::min(3, fine_model.n_components()); ++m) {
      const FunctionalData psi{fine_model.bases[0],
                               fine_model.eigenfunction_coeffs[0].row(m), "psi"};
      const double oracle = testing::riemann(
          [&](double t) { return eval_fd_at(x, 2, t) * eval_fd_at(psi, 0, t); },
          200000);
      CHECK(std::abs(scores(2, m) - oracle) < 1e-6);
    }
  }

  SUBCASE("score column means vanish and the covariance is diagonal") {
    const Eigen::MatrixXd scores = compute_scores(model, standardized);
    CHECK(scores.colwise().mean().cwiseAbs().maxCoeff() < 1e-8);
    const Eigen::MatrixXd cov = scores.transpose() * scores / (scores.rows() - 1.0);
    for (int a = 0; a < cov.rows(); ++a) {
      CHECK(cov(a, a) == doctest::Approx(model.eigenvalues[a]).epsilon(1e-6));
      for (int b = 0; b < a; ++b) {
        CHECK(std::abs(cov(a, b)) <= 1e-6 * model.eigenvalues[0]);
      }
    }
  }
}

TEST_CASE("reconstruction: zero truncation, monotone error, completeness") {
  const Grid grid = Grid::uniform(100);
  const MultiFunctionalData fd = smooth_sample(60, 77, grid);
  auto [standardized, fns] = standardize(fd, grid);
  const QuadratureRule rule = quadrature_weights(grid, QuadratureMethod::simpson);
  const MfpcaModel model = fit_mfpca(standardized, rule);
  const Eigen::MatrixXd scores = compute_scores(model, standardized);
  const Eigen::MatrixXd truth = standardized.front().values(grid);

  const MultiFunctionalData zero = reconstruct(model, scores, 0);
  CHECK(zero.front().values(grid).cwiseAbs().maxCoeff() == 0.0);

  double previous = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= model.n_components(); ++m) {
    const MultiFunctionalData rec = reconstruct(model, scores, m);
    const Eigen::MatrixXd difference = rec.front().values(grid) - truth;
    double ise = 0.0;
    for (Eigen::Index i = 0; i < difference.rows(); ++i) {
      ise += rule.weights.dot(difference.row(i).cwiseAbs2().transpose());
    }
    CHECK(ise <= previous + 1e-10);
    previous = ise;
  }
  CHECK(previous < 1e-10 * truth.squaredNorm());
}

TEST_CASE("PRESS component selection") {
  const Grid grid = Grid::uniform(100);
  const MultiFunctionalData fd = smooth_sample(200, 3, grid);
  auto [standardized, fns] = standardize(fd, grid);
  const QuadratureRule rule = quadrature_weights(grid, QuadratureMethod::simpson);
  const MfpcaModel model = fit_mfpca(standardized, rule);
  const Eigen::MatrixXd scores = compute_scores(model, standardized);

  SUBCASE("noiseless single-component target selects M = 1") {
    const Eigen::VectorXd y = 3.0 * scores.col(0);
    CHECK(select_M_press(y, scores, 0.01) == 1);
  }

  SUBCASE("pure noise prefers the intercept-only model") {
    Rng rng(99);
    Eigen::VectorXd y(scores.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = rng.normal();
    CHECK(select_M_press(y, scores, 0.05) == 0);
  }

  SUBCASE("closed-form PRESS matches literal per-point refits") {
    Rng rng(1234);
    Eigen::VectorXd y = scores.col(0) - 0.5 * scores.col(1);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += 0.1 * rng.normal();
    const std::vector<double> press = press_curve(y, scores, 3);

    for (int m = 0; m <= 3; ++m) {
      double oracle = 0.0;
      const Eigen::Index n = y.size();
      for (Eigen::Index held = 0; held < n; ++held) {
        Eigen::MatrixXd design(n - 1, m + 1);
        Eigen::VectorXd target(n - 1);
        Eigen::Index row = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (i == held) continue;
          design(row, 0) = 1.0;
          for (int k = 0; k < m; ++k) design(row, k + 1) = scores(i, k);
          target[row] = y[i];
          ++row;
        }
        const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(target);
        double prediction = beta[0];
        for (int k = 0; k < m; ++k) prediction += beta[k + 1] * scores(held, k);
        oracle += (y[held] - prediction) * (y[held] - prediction);
      }
      CHECK(press[m] == doctest::Approx(oracle).epsilon(1e-8));
    }
  }
}
