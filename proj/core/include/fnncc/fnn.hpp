#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "fnncc/bspline.hpp"
#include "fnncc/fpca.hpp"
#include "fnncc/net.hpp"
#include "fnncc/smoothing.hpp"

namespace fnncc {

// Architecture plus training hyperparameters of the functional neural
// network. layer_widths includes the final width-1 output layer.
struct FnnConfig {
  std::vector<int> layer_widths = {8, 8, 1};
  std::vector<Activation> activations = {Activation::relu, Activation::relu,
                                         Activation::linear};
  int weight_basis_order = 4;
  int weight_basis_size = 5;  // M_p, shared across neurons and covariates
  double learning_rate = 0.01;
  int batch_size = 64;
  int max_epochs = 500;
  int patience = 20;
  std::uint64_t seed = 1;

  TrainOptions train_options() const {
    return TrainOptions{learning_rate, batch_size, max_epochs,
                        patience,      seed,       0.9,
                        0.999,         1e-8};
  }
};

// The first layer integrates weight functions against each functional
// covariate. Expanding the weight functions in a spline basis and swapping
// sum and integral turns that layer into a dense map over the precomputed
// features int zeta_m(t) X_p(t) dt, so the whole model runs as a standard
// dense network; the spline coefficients of the weight functions are the
// first-layer weights on the functional feature block.
struct FnnModel {
  FnnConfig config;
  BSplineBasis weight_basis{4, 5};
  QuadratureRule rule;
  int n_functional_covariates = 0;
  int n_scalar_covariates = 0;
  Net net;

  int feature_dim() const {
    return n_functional_covariates * weight_basis.n_basis() + n_scalar_covariates;
  }
};

FnnModel init_fnn(const FnnConfig& config, int n_functional_covariates,
                  int n_scalar_covariates, const QuadratureRule& rule);

// Per-sample feature matrix of integrals int zeta_m(t) X_p(t) dt, blocks
// ordered by covariate: n x (P * M_p).
Eigen::MatrixXd functional_features(const MultiFunctionalData& standardized,
                                    const BSplineBasis& weight_basis,
                                    const QuadratureRule& rule);
Eigen::MatrixXd functional_features_values(const std::vector<Eigen::MatrixXd>& values,
                                           const BSplineBasis& weight_basis,
                                           const QuadratureRule& rule);

// Features for a model: functional block plus appended scalar covariates.
Eigen::MatrixXd assemble_inputs(const FnnModel& model,
                                const MultiFunctionalData& standardized,
                                const Eigen::MatrixXd& scalar_covariates = {});

Eigen::VectorXd fnn_predict(const FnnModel& model, const Eigen::MatrixXd& inputs);

TrainHistory fnn_train(FnnModel& model, const Eigen::MatrixXd& train_inputs,
                       const Eigen::VectorXd& train_targets,
                       const Eigen::MatrixXd& val_inputs,
                       const Eigen::VectorXd& val_targets);

// Neuron-averaged weight function per covariate, evaluated on a grid:
// gamma_p(t) = sum_k sum_m c_kpm zeta_m(t) / n1. One row per covariate.
Eigen::MatrixXd functional_weights(const FnnModel& model, const Grid& grid);

struct CvCell {
  int config_index = 0;
  int fold = 0;
  double sse = 0.0;
  int count = 0;
};

struct TuneResult {
  int best_index = 0;
  FnnConfig best;
  std::vector<double> cv_mse;      // per config
  std::vector<int> parameter_counts;
  std::vector<CvCell> cells;       // per (config, fold) bookkeeping
};

// 5-fold cross-validated grid search. Fold assignment is a seeded
// permutation; each (config, fold) training run draws from a stream derived
// from (seed, config_index, fold_index). When a validation set is supplied
// it drives early stopping; otherwise the held-out fold does. Ties are
// broken by fewest parameters, then grid order.
TuneResult tune_fnn(const std::vector<FnnConfig>& grid,
                    const MultiFunctionalData& standardized,
                    const Eigen::VectorXd& targets, const QuadratureRule& rule,
                    std::uint64_t seed,
                    const MultiFunctionalData* validation = nullptr,
                    const Eigen::VectorXd* validation_targets = nullptr);

}  // namespace fnncc
