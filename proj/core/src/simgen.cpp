#include "fnncc/simgen.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "fnncc/errors.hpp"
#include "fnncc/log.hpp"
#include "fnncc/rng.hpp"

namespace fnncc {

namespace {

constexpr std::uint64_t kCalibrationTag = 0xca1ULL;
constexpr std::uint64_t kReferenceTag = 0x5cafeULL;

double normal_pdf(double z, double m, double s) {
  const double u = (z - m) / s;
  return std::exp(-0.5 * u * u) / (s * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

Eigen::VectorXd MeanModel::evaluate(const Grid& grid) const {
  Eigen::VectorXd out(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    const double z = grid[i];
    double value = a * z * z + b * z + (c + delta);
    for (const Bump& bump : bumps) {
      value += amplitude * normal_pdf(z, bump.location, bump.scale);
    }
    out[i] = value;
  }
  return out;
}

const char* scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::linear: return "A";
    case ScenarioKind::exponential: return "B";
    case ScenarioKind::absolute: return "C";
    case ScenarioKind::logarithmic: return "D";
    case ScenarioKind::square: return "E";
  }
  return "?";
}

ScenarioKind scenario_from_name(const std::string& name) {
  if (name == "A" || name == "linear") return ScenarioKind::linear;
  if (name == "B" || name == "exponential") return ScenarioKind::exponential;
  if (name == "C" || name == "absolute") return ScenarioKind::absolute;
  if (name == "D" || name == "logarithmic") return ScenarioKind::logarithmic;
  if (name == "E" || name == "square") return ScenarioKind::square;
  throw Error(ErrorCode::config, "unknown scenario '" + name + "'");
}

ScenarioGenerator::ScenarioGenerator(const ScenarioSpec& scenario,
                                     const GeneratorConfig& config,
                                     std::uint64_t seed)
    : scenario_(scenario),
      config_(config),
      seed_(seed),
      grid_(Grid::uniform(config.n_grid_points)),
      rule_(quadrature_weights(grid_, QuadratureMethod::simpson)),
      smoothing_basis_(4, config.smoothing_basis_size),
      standardization_{grid_, {}, {}} {
  if (scenario.u <= 0.0) {
    throw Error(ErrorCode::config, "scenario offset u must be positive");
  }
  mean_curve_ = config_.mean_model.evaluate(grid_);

  // Correlation rho(d) = max(J0(d / l), 0); the clipped kernel is not
  // positive semidefinite, so the gram matrix is repaired by truncating
  // negative eigenvalues before factoring the sampler.
  const int n_points = grid_.size();
  Eigen::MatrixXd gram(n_points, n_points);
  for (int i = 0; i < n_points; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double d = std::abs(grid_[i] - grid_[j]);
      const double rho =
          std::max(std::cyl_bessel_j(0.0, d / config_.bessel_length_scale), 0.0);
      gram(i, j) = gram(j, i) = config_.variance * rho;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::internal, "correlation gram eigendecomposition failed");
  }
  const Eigen::VectorXd clipped = solver.eigenvalues().cwiseMax(0.0);
  const double clipped_mass = (clipped - solver.eigenvalues()).sum();
  if (clipped_mass > 1e-8 * gram.trace()) {
    log::info("bessel gram repair clipped ", clipped_mass / gram.trace(),
              " of the trace");
  }
  sampling_matrix_ = solver.eigenvectors() * clipped.cwiseSqrt().asDiagonal();

  // Calibration: the generator's own standardization, eigenfunctions, and
  // the rescaled true coefficient function.
  const Eigen::MatrixXd cal_raw =
      draw_profiles(config_.n_calibration, kCalibrationTag);
  const SmoothResult cal_smooth = smooth_profiles(
      cal_raw, grid_, smoothing_basis_, PenaltySpec::fixed(0.0), "x1");
  auto [cal_std, fns] = standardize({cal_smooth.fd}, grid_);
  standardization_ = std::move(fns);

  const MfpcaModel mfpca = fit_mfpca(cal_std, rule_, 10);
  // The true coefficient function mixes the three leading eigenfunctions;
  // degenerate (lower-rank) processes use what is available.
  const Eigen::Vector3d mix(1.0, 0.5, 0.25);
  const int n_mix = std::min(3, mfpca.n_components());
  Eigen::VectorXd beta_dir_coeffs = Eigen::VectorXd::Zero(smoothing_basis_.n_basis());
  for (int m = 0; m < n_mix; ++m) {
    beta_dir_coeffs += mix[m] * mfpca.eigenfunction_coeffs.front().row(m).transpose();
  }
  // var(<beta_dir, X~>) = sum_m mix_m^2 lambda_m by orthonormality.
  double var_l = 0.0;
  for (int m = 0; m < n_mix; ++m) var_l += mix[m] * mix[m] * mfpca.eigenvalues[m];
  if (!(var_l > 0.0)) {
    throw Error(ErrorCode::degenerate_data, "degenerate linear predictor variance");
  }
  const double target_var = scenario_.target_r2 * scenario_.v_y;
  beta_coeffs_ = beta_dir_coeffs * std::sqrt(target_var / var_l);
  beta_grid_ = FunctionalData{smoothing_basis_, beta_coeffs_.transpose(), "beta"}
                   .values(grid_)
                   .row(0)
                   .transpose();
  alpha_true_ = scenario_.mu_y;
  linear_noise_sd_ = std::sqrt((1.0 - scenario_.target_r2) * scenario_.v_y);

  // s_{y*}: sample SD of the transformed response on an unshifted reference
  // set drawn from a dedicated stream.
  const SimulatedSet reference =
      make_set(config_.n_calibration, ShiftSpec{}, kReferenceTag, "ref");
  const double mean_y = reference.y.mean();
  s_y_star_ = std::sqrt((reference.y.array() - mean_y).square().sum() /
                        static_cast<double>(reference.y.size() - 1));
}

Eigen::VectorXd ScenarioGenerator::beta_true(const Grid& grid) const {
  return FunctionalData{smoothing_basis_, beta_coeffs_.transpose(), "beta"}
      .values(grid)
      .row(0)
      .transpose();
}

Eigen::MatrixXd ScenarioGenerator::draw_profiles(int n,
                                                 std::uint64_t stream_tag) const {
  if (n < 1) throw Error(ErrorCode::config, "draw_profiles needs n >= 1");
  Rng rng(derive_seed(seed_, {stream_tag}));
  const int n_points = grid_.size();
  Eigen::MatrixXd profiles(n, n_points);
  Eigen::VectorXd normals(n_points);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n_points; ++j) normals[j] = rng.normal();
    profiles.row(i) = (mean_curve_ + sampling_matrix_ * normals).transpose();
    for (int j = 0; j < n_points; ++j) {
      profiles(i, j) += config_.measurement_noise_sd * rng.normal();
    }
  }
  return profiles;
}

Eigen::VectorXd ScenarioGenerator::linear_predictor(
    const Eigen::MatrixXd& raw_profiles) const {
  const SmoothResult smooth = smooth_profiles(
      raw_profiles, grid_, smoothing_basis_, PenaltySpec::fixed(0.0), "x1");
  const Eigen::MatrixXd standardized =
      standardization_.apply({smooth.fd}).front().values(grid_);
  return ((standardized.array().rowwise() * rule_.weights.transpose().array())
              .matrix() *
          beta_grid_)
             .array() +
         alpha_true_;
}

Eigen::VectorXd ScenarioGenerator::transform(const Eigen::VectorXd& linear) const {
  switch (scenario_.kind) {
    case ScenarioKind::linear:
      return linear;
    case ScenarioKind::exponential:
      return linear.array().exp();
    case ScenarioKind::absolute:
      return linear.cwiseAbs();
    case ScenarioKind::logarithmic:
      return (linear.array().abs() + scenario_.u).log();
    case ScenarioKind::square:
      return linear.array().square();
  }
  throw Error(ErrorCode::internal, "unreachable scenario kind");
}

SimulatedSet ScenarioGenerator::make_set(int n, const ShiftSpec& shift,
                                         std::uint64_t stream_tag,
                                         const std::string& id_prefix) const {
  SimulatedSet set;
  set.profiles = draw_profiles(n, stream_tag);
  set.linear_predictor = linear_predictor(set.profiles);
  set.transformed_mean = transform(set.linear_predictor);

  const double noise_sd = scenario_.kind == ScenarioKind::linear
                              ? linear_noise_sd_
                              : scenario_.noise_sd;
  Rng noise_rng(derive_seed(seed_, {stream_tag, 0x401cfULL}));
  set.y.resize(n);
  for (int i = 0; i < n; ++i) {
    set.y[i] = set.transformed_mean[i] + noise_sd * noise_rng.normal();
  }
  if (shift.response_multiple != 0.0) {
    set.y.array() += shift.response_multiple * s_y_star_;
  }
  // The covariate translation perturbs only the observed profiles; responses
  // above are already fixed, so response charts see identical data with and
  // without the covariate shift.
  if (shift.covariate_delta != 0.0) {
    set.profiles.array() += shift.covariate_delta;
  }
  set.sample_ids.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    set.sample_ids.push_back(id_prefix + "_" + std::to_string(i + 1));
  }
  return set;
}

DatasetBundle ScenarioGenerator::make_datasets(int n_train, int n_validation,
                                               int n_tuning, int n_oc,
                                               const ShiftSpec& oc_shift) const {
  if (n_train < 1 || n_validation < 1 || n_tuning < 1 || n_oc < 1) {
    throw Error(ErrorCode::config, "dataset sizes must be at least 1");
  }
  DatasetBundle bundle;
  bundle.train = make_set(n_train, ShiftSpec{}, 0x11ULL, "train");
  bundle.validation = make_set(n_validation, ShiftSpec{}, 0x22ULL, "val");
  bundle.tuning = make_set(n_tuning, ShiftSpec{}, 0x33ULL, "tune");
  // The OC stream is independent of the IC streams; the covariate delta does
  // not enter the stream, so equal seeds yield identical responses across
  // delta values.
  bundle.oc = make_set(n_oc, oc_shift, 0x44ULL, "oc");
  return bundle;
}

}  // namespace fnncc
