#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "fnncc/fnn.hpp"
#include "fnncc/fpca.hpp"
#include "fnncc/grid.hpp"
#include "fnncc/smoothing.hpp"
#include "fnncc/sof.hpp"

namespace fnncc {

// Discretely observed profiles on a common grid, one matrix per covariate.
struct ProfileSet {
  Grid grid;
  std::vector<std::string> covariate_ids;
  std::vector<Eigen::MatrixXd> values;  // per covariate: n x |grid|
  std::vector<std::string> sample_ids;

  int n_samples() const {
    return values.empty() ? 0 : static_cast<int>(values.front().rows());
  }
  int n_covariates() const { return static_cast<int>(values.size()); }
};

enum class PredictorKind { scc, sof_linear, fnn, rawdata_mlp, bspline_mlp };

const char* predictor_kind_name(PredictorKind kind);
PredictorKind predictor_kind_from_name(const std::string& name);

// Smoothing step frozen at Phase I: basis and the selected lambda.
struct SmoothingRecipe {
  BSplineBasis basis{4, 4};
  double lambda = 0.0;

  FunctionalData smooth(const Eigen::MatrixXd& raw, const Grid& grid,
                        const std::string& covariate_id) const {
    return smooth_profiles(raw, grid, basis, PenaltySpec::fixed(lambda),
                           covariate_id)
        .fd;
  }
};

// A frozen preprocessing-plus-model pipeline mapping raw Phase II profiles
// to predicted responses.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual PredictorKind kind() const = 0;
  virtual Eigen::VectorXd predict(const ProfileSet& x) const = 0;
};

// Shewhart chart on the raw response: the covariates are ignored entirely.
class SccPredictor final : public Predictor {
 public:
  PredictorKind kind() const override { return PredictorKind::scc; }
  Eigen::VectorXd predict(const ProfileSet& x) const override;
};

class SofPredictor final : public Predictor {
 public:
  SmoothingRecipe smoothing;
  std::shared_ptr<const MfpcaModel> mfpca;
  SofModel model;

  PredictorKind kind() const override { return PredictorKind::sof_linear; }
  Eigen::VectorXd predict(const ProfileSet& x) const override;
};

class FnnPredictor final : public Predictor {
 public:
  SmoothingRecipe smoothing;
  StandardizationFns standardization;
  FnnModel model;

  PredictorKind kind() const override { return PredictorKind::fnn; }
  Eigen::VectorXd predict(const ProfileSet& x) const override;
};

// Appendix-style baseline: the raw grid values, standardized pointwise, feed
// a dense network directly.
class RawdataMlpPredictor final : public Predictor {
 public:
  Grid grid = Grid::uniform(4);
  std::vector<Eigen::VectorXd> mean;  // per covariate, |grid|
  std::vector<Eigen::VectorXd> sd;
  FnnConfig config;  // net architecture/training record
  Net net;

  PredictorKind kind() const override { return PredictorKind::rawdata_mlp; }
  Eigen::VectorXd predict(const ProfileSet& x) const override;
};

// Appendix-style baseline: spline coefficients of the smoothed profiles,
// standardized per dimension, feed a dense network.
class BsplineMlpPredictor final : public Predictor {
 public:
  SmoothingRecipe smoothing;
  Eigen::VectorXd coeff_mean;  // concatenated covariate blocks
  Eigen::VectorXd coeff_sd;
  FnnConfig config;
  Net net;

  PredictorKind kind() const override { return PredictorKind::bspline_mlp; }
  Eigen::VectorXd predict(const ProfileSet& x) const override;
};

enum class ChartStatistic { response, residual };

struct ControlChart {
  double lcl = 0.0;
  double ucl = 0.0;
  double alpha = 0.05;
  ChartStatistic statistic = ChartStatistic::residual;
  std::shared_ptr<const Predictor> predictor;
};

struct ChartPoint {
  std::string id;
  double value = 0.0;
  bool signal = false;
};

// Monitoring statistic per sample: the raw response for a response chart,
// y - yhat otherwise.
Eigen::VectorXd chart_statistics(const ControlChart& chart, const ProfileSet& x,
                                 const Eigen::VectorXd& y);

// q-quantile of a sample as the ceil(n q)-th order statistic.
double empirical_quantile(std::vector<double> values, double q);

// Control limits as the alpha/2 and 1-alpha/2 empirical quantiles of the
// tuning-set statistics. Refuses tuning sets smaller than 2/alpha, warns
// below 10/alpha.
ControlChart build_chart(std::shared_ptr<const Predictor> predictor,
                         const ProfileSet& tuning_x, const Eigen::VectorXd& tuning_y,
                         double alpha);

// Stateless Shewhart monitoring; signals use strict inequalities.
std::vector<ChartPoint> monitor(const ControlChart& chart, const ProfileSet& x,
                                const Eigen::VectorXd& y);

// Pipeline configuration shared by the trained predictors.
struct PipelineConfig {
  int smoothing_basis_order = 4;
  int smoothing_basis_size = 30;
  PenaltySpec penalty = PenaltySpec::fixed(0.0);
  QuadratureMethod quadrature = QuadratureMethod::simpson;
  double press_threshold = 0.01;
  FnnConfig fnn;
};

std::shared_ptr<Predictor> make_scc_predictor();

std::shared_ptr<Predictor> train_sof_predictor(const ProfileSet& train_x,
                                               const Eigen::VectorXd& train_y,
                                               const PipelineConfig& config);

std::shared_ptr<Predictor> train_fnn_predictor(const ProfileSet& train_x,
                                               const Eigen::VectorXd& train_y,
                                               const ProfileSet& val_x,
                                               const Eigen::VectorXd& val_y,
                                               const PipelineConfig& config);

std::shared_ptr<Predictor> make_rawdata_mlp_predictor(const ProfileSet& train_x,
                                                      const Eigen::VectorXd& train_y,
                                                      const ProfileSet& val_x,
                                                      const Eigen::VectorXd& val_y,
                                                      const PipelineConfig& config);

std::shared_ptr<Predictor> make_bspline_mlp_predictor(const ProfileSet& train_x,
                                                      const Eigen::VectorXd& train_y,
                                                      const ProfileSet& val_x,
                                                      const Eigen::VectorXd& val_y,
                                                      const PipelineConfig& config);

}  // namespace fnncc
