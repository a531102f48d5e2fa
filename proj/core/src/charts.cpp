#include "fnncc/charts.hpp"

#include <algorithm>
#include <cmath>

#include "fnncc/errors.hpp"
#include "fnncc/log.hpp"

namespace fnncc {

namespace {

void check_grid(const Grid& expected, const ProfileSet& x) {
  if (x.grid.size() != expected.size() ||
      (x.grid.points() - expected.points()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::schema,
                "profile grid incompatible with the frozen preprocessing recipe");
  }
}

// Smooth every covariate of a raw profile set with a frozen recipe, then
// standardize and re-smooth onto the same basis; identical to the transform
// the training pipeline applies, so Phase II scores are exchangeable with
// training scores.
std::vector<Eigen::MatrixXd> standardized_values(const SmoothingRecipe& smoothing,
                                                 const StandardizationFns& fns,
                                                 const ProfileSet& x) {
  check_grid(fns.grid, x);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(x.values.size());
  for (std::size_t p = 0; p < x.values.size(); ++p) {
    const FunctionalData fd =
        smoothing.smooth(x.values[p], x.grid, x.covariate_ids[p]);
    const Eigen::MatrixXd std_values =
        fns.apply_values(fd.values(fns.grid), static_cast<int>(p));
    out.push_back(smooth_profiles(std_values, fns.grid, fd.basis,
                                  PenaltySpec::fixed(0.0), x.covariate_ids[p])
                      .fd.values(fns.grid));
  }
  return out;
}

}  // namespace

const char* predictor_kind_name(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::scc: return "scc";
    case PredictorKind::sof_linear: return "sof-linear";
    case PredictorKind::fnn: return "fnn";
    case PredictorKind::rawdata_mlp: return "rawdata-mlp";
    case PredictorKind::bspline_mlp: return "bspline-mlp";
  }
  return "?";
}

PredictorKind predictor_kind_from_name(const std::string& name) {
  if (name == "scc") return PredictorKind::scc;
  if (name == "sof-linear") return PredictorKind::sof_linear;
  if (name == "fnn") return PredictorKind::fnn;
  if (name == "rawdata-mlp") return PredictorKind::rawdata_mlp;
  if (name == "bspline-mlp") return PredictorKind::bspline_mlp;
  throw Error(ErrorCode::config, "unknown predictor kind '" + name + "'");
}

Eigen::VectorXd SccPredictor::predict(const ProfileSet& x) const {
  return Eigen::VectorXd::Zero(x.n_samples());
}

Eigen::VectorXd SofPredictor::predict(const ProfileSet& x) const {
  const std::vector<Eigen::MatrixXd> values =
      standardized_values(smoothing, mfpca->standardization, x);
  return predict_sof_scores(model, compute_scores_values(*mfpca, values));
}

Eigen::VectorXd FnnPredictor::predict(const ProfileSet& x) const {
  const std::vector<Eigen::MatrixXd> values =
      standardized_values(smoothing, standardization, x);
  return net_predict(model.net,
                     functional_features_values(values, model.weight_basis,
                                                model.rule));
}

Eigen::VectorXd RawdataMlpPredictor::predict(const ProfileSet& x) const {
  if (x.grid.size() != grid.size() ||
      (x.grid.points() - grid.points()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::schema,
                "profile grid incompatible with the frozen preprocessing recipe");
  }
  const int n_points = grid.size();
  Eigen::MatrixXd inputs(x.n_samples(),
                         static_cast<Eigen::Index>(x.values.size()) * n_points);
  for (std::size_t p = 0; p < x.values.size(); ++p) {
    inputs.middleCols(static_cast<Eigen::Index>(p) * n_points, n_points) =
        (x.values[p].rowwise() - mean[p].transpose()).array().rowwise() /
        sd[p].transpose().array();
  }
  return net_predict(net, inputs);
}

Eigen::VectorXd BsplineMlpPredictor::predict(const ProfileSet& x) const {
  const int n_basis = smoothing.basis.n_basis();
  Eigen::MatrixXd inputs(x.n_samples(),
                         static_cast<Eigen::Index>(x.values.size()) * n_basis);
  for (std::size_t p = 0; p < x.values.size(); ++p) {
    const FunctionalData fd =
        smoothing.smooth(x.values[p], x.grid, x.covariate_ids[p]);
    inputs.middleCols(static_cast<Eigen::Index>(p) * n_basis, n_basis) =
        fd.coefficients;
  }
  inputs = (inputs.rowwise() - coeff_mean.transpose()).array().rowwise() /
           coeff_sd.transpose().array();
  return net_predict(net, inputs);
}

Eigen::VectorXd chart_statistics(const ControlChart& chart, const ProfileSet& x,
                                 const Eigen::VectorXd& y) {
  if (chart.statistic == ChartStatistic::response) return y;
  return y - chart.predictor->predict(x);
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw Error(ErrorCode::quantile_undefined, "empty sample");
  }
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(n * q));
  if (rank < 1) rank = 1;
  if (rank > values.size()) rank = values.size();
  return values[rank - 1];
}

ControlChart build_chart(std::shared_ptr<const Predictor> predictor,
                         const ProfileSet& tuning_x, const Eigen::VectorXd& tuning_y,
                         double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::config, "alpha must lie in (0, 1)");
  }
  const auto n = static_cast<double>(tuning_y.size());
  if (n < 2.0 / alpha) {
    throw Error(ErrorCode::quantile_undefined,
                "tuning set smaller than 2/alpha; tail quantiles are undefined");
  }
  if (n < 10.0 / alpha) {
    log::warn("tuning set smaller than 10/alpha; control limits will be noisy");
  }

  ControlChart chart;
  chart.alpha = alpha;
  chart.predictor = std::move(predictor);
  chart.statistic = chart.predictor->kind() == PredictorKind::scc
                        ? ChartStatistic::response
                        : ChartStatistic::residual;

  const Eigen::VectorXd stats = chart_statistics(chart, tuning_x, tuning_y);
  std::vector<double> sample(stats.data(), stats.data() + stats.size());
  chart.lcl = empirical_quantile(sample, alpha / 2.0);
  chart.ucl = empirical_quantile(std::move(sample), 1.0 - alpha / 2.0);
  if (!(chart.lcl < chart.ucl)) {
    throw Error(ErrorCode::degenerate_data,
                "degenerate tuning statistics: lcl is not below ucl");
  }
  return chart;
}

std::vector<ChartPoint> monitor(const ControlChart& chart, const ProfileSet& x,
                                const Eigen::VectorXd& y) {
  const Eigen::VectorXd stats = chart_statistics(chart, x, y);
  std::vector<ChartPoint> points;
  points.reserve(static_cast<std::size_t>(stats.size()));
  for (Eigen::Index i = 0; i < stats.size(); ++i) {
    ChartPoint point;
    point.id = i < static_cast<Eigen::Index>(x.sample_ids.size())
                   ? x.sample_ids[static_cast<std::size_t>(i)]
                   : std::to_string(i + 1);
    point.value = stats[i];
    point.signal = stats[i] < chart.lcl || stats[i] > chart.ucl;
    points.push_back(std::move(point));
  }
  return points;
}

std::shared_ptr<Predictor> make_scc_predictor() {
  return std::make_shared<SccPredictor>();
}

namespace {

struct SmoothedTraining {
  SmoothingRecipe recipe;
  MultiFunctionalData fd;
};

SmoothedTraining smooth_training_set(const ProfileSet& train_x,
                                     const PipelineConfig& config) {
  SmoothedTraining out{
      SmoothingRecipe{
          BSplineBasis(config.smoothing_basis_order, config.smoothing_basis_size),
          0.0},
      {}};
  for (std::size_t p = 0; p < train_x.values.size(); ++p) {
    SmoothResult result =
        smooth_profiles(train_x.values[p], train_x.grid, out.recipe.basis,
                        config.penalty, train_x.covariate_ids[p]);
    // The lambda selected on the training set is the frozen recipe.
    out.recipe.lambda = result.lambda;
    out.fd.push_back(std::move(result.fd));
  }
  return out;
}

}  // namespace

std::shared_ptr<Predictor> train_sof_predictor(const ProfileSet& train_x,
                                               const Eigen::VectorXd& train_y,
                                               const PipelineConfig& config) {
  SmoothedTraining smoothed = smooth_training_set(train_x, config);
  auto [standardized, fns] = standardize(smoothed.fd, train_x.grid);
  const QuadratureRule rule = quadrature_weights(train_x.grid, config.quadrature);

  auto mfpca = std::make_shared<MfpcaModel>(fit_mfpca(standardized, rule));
  mfpca->standardization = std::move(fns);
  const Eigen::MatrixXd scores = compute_scores(*mfpca, standardized);
  const int selected =
      std::max(1, select_M_press(train_y, scores, config.press_threshold));

  auto predictor = std::make_shared<SofPredictor>();
  predictor->smoothing = std::move(smoothed.recipe);
  predictor->model = fit_sof(train_y, scores, mfpca, selected);
  predictor->mfpca = std::move(mfpca);
  return predictor;
}

std::shared_ptr<Predictor> train_fnn_predictor(const ProfileSet& train_x,
                                               const Eigen::VectorXd& train_y,
                                               const ProfileSet& val_x,
                                               const Eigen::VectorXd& val_y,
                                               const PipelineConfig& config) {
  SmoothedTraining smoothed = smooth_training_set(train_x, config);
  auto [standardized, fns] = standardize(smoothed.fd, train_x.grid);
  const QuadratureRule rule = quadrature_weights(train_x.grid, config.quadrature);

  auto predictor = std::make_shared<FnnPredictor>();
  predictor->smoothing = smoothed.recipe;
  predictor->standardization = fns;
  predictor->model =
      init_fnn(config.fnn, train_x.n_covariates(), 0, rule);

  const Eigen::MatrixXd train_features = functional_features(
      standardized, predictor->model.weight_basis, rule);

  const std::vector<Eigen::MatrixXd> val_values =
      standardized_values(predictor->smoothing, fns, val_x);
  const Eigen::MatrixXd val_features = functional_features_values(
      val_values, predictor->model.weight_basis, rule);

  fnn_train(predictor->model, train_features, train_y, val_features, val_y);
  return predictor;
}

std::shared_ptr<Predictor> make_rawdata_mlp_predictor(const ProfileSet& train_x,
                                                      const Eigen::VectorXd& train_y,
                                                      const ProfileSet& val_x,
                                                      const Eigen::VectorXd& val_y,
                                                      const PipelineConfig& config) {
  auto predictor = std::make_shared<RawdataMlpPredictor>();
  predictor->grid = train_x.grid;
  predictor->config = config.fnn;

  const int n_points = train_x.grid.size();
  const auto n_cov = train_x.values.size();
  for (std::size_t p = 0; p < n_cov; ++p) {
    const Eigen::MatrixXd& v = train_x.values[p];
    const Eigen::VectorXd mean = v.colwise().mean();
    const Eigen::MatrixXd centered = v.rowwise() - mean.transpose();
    Eigen::VectorXd sd = (centered.colwise().squaredNorm() /
                          static_cast<double>(v.rows() - 1))
                             .cwiseSqrt()
                             .transpose();
    for (Eigen::Index j = 0; j < sd.size(); ++j) {
      if (!(sd[j] > 0.0)) {
        throw Error(ErrorCode::degenerate_data,
                    "zero pointwise standard deviation in raw profiles");
      }
    }
    predictor->mean.push_back(mean);
    predictor->sd.push_back(std::move(sd));
  }

  auto standardize_raw = [&](const ProfileSet& x) {
    Eigen::MatrixXd inputs(x.n_samples(),
                           static_cast<Eigen::Index>(n_cov) * n_points);
    for (std::size_t p = 0; p < n_cov; ++p) {
      inputs.middleCols(static_cast<Eigen::Index>(p) * n_points, n_points) =
          (x.values[p].rowwise() - predictor->mean[p].transpose())
              .array()
              .rowwise() /
          predictor->sd[p].transpose().array();
    }
    return inputs;
  };

  predictor->net = init_net(static_cast<int>(n_cov) * n_points,
                            config.fnn.layer_widths, config.fnn.activations,
                            config.fnn.seed);
  net_train(predictor->net, standardize_raw(train_x), train_y,
            standardize_raw(val_x), val_y, config.fnn.train_options());
  return predictor;
}

std::shared_ptr<Predictor> make_bspline_mlp_predictor(const ProfileSet& train_x,
                                                      const Eigen::VectorXd& train_y,
                                                      const ProfileSet& val_x,
                                                      const Eigen::VectorXd& val_y,
                                                      const PipelineConfig& config) {
  SmoothedTraining smoothed = smooth_training_set(train_x, config);
  auto predictor = std::make_shared<BsplineMlpPredictor>();
  predictor->smoothing = smoothed.recipe;
  predictor->config = config.fnn;

  const int n_basis = predictor->smoothing.basis.n_basis();
  const auto n_cov = smoothed.fd.size();
  Eigen::MatrixXd train_coeffs(train_x.n_samples(),
                               static_cast<Eigen::Index>(n_cov) * n_basis);
  for (std::size_t p = 0; p < n_cov; ++p) {
    train_coeffs.middleCols(static_cast<Eigen::Index>(p) * n_basis, n_basis) =
        smoothed.fd[p].coefficients;
  }
  predictor->coeff_mean = train_coeffs.colwise().mean();
  const Eigen::MatrixXd centered =
      train_coeffs.rowwise() - predictor->coeff_mean.transpose();
  predictor->coeff_sd = (centered.colwise().squaredNorm() /
                         static_cast<double>(train_coeffs.rows() - 1))
                            .cwiseSqrt()
                            .transpose();
  for (Eigen::Index j = 0; j < predictor->coeff_sd.size(); ++j) {
    if (!(predictor->coeff_sd[j] > 0.0)) {
      throw Error(ErrorCode::degenerate_data,
                  "zero variance in a spline coefficient dimension");
    }
  }

  auto coeff_inputs = [&](const ProfileSet& x) {
    Eigen::MatrixXd inputs(x.n_samples(),
                           static_cast<Eigen::Index>(n_cov) * n_basis);
    for (std::size_t p = 0; p < n_cov; ++p) {
      const FunctionalData fd = predictor->smoothing.smooth(
          x.values[p], x.grid, x.covariate_ids[p]);
      inputs.middleCols(static_cast<Eigen::Index>(p) * n_basis, n_basis) =
          fd.coefficients;
    }
    return Eigen::MatrixXd(
        (inputs.rowwise() - predictor->coeff_mean.transpose()).array().rowwise() /
        predictor->coeff_sd.transpose().array());
  };

  Eigen::MatrixXd train_inputs =
      (centered.array().rowwise() / predictor->coeff_sd.transpose().array())
          .matrix();
  predictor->net =
      init_net(static_cast<int>(n_cov) * n_basis, config.fnn.layer_widths,
               config.fnn.activations, config.fnn.seed);
  net_train(predictor->net, train_inputs, train_y, coeff_inputs(val_x), val_y,
            config.fnn.train_options());
  return predictor;
}

}  // namespace fnncc
