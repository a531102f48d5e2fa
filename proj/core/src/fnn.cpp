#include "fnncc/fnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fnncc/rng.hpp"

namespace fnncc {

FnnModel init_fnn(const FnnConfig& config, int n_functional_covariates,
                  int n_scalar_covariates, const QuadratureRule& rule) {
  if (n_functional_covariates < 1) {
    throw Error(ErrorCode::config, "init_fnn needs at least one functional covariate");
  }
  if (config.weight_basis_size < 1) {
    throw Error(ErrorCode::config, "weight basis needs at least one function");
  }
  FnnModel model{config,
                 BSplineBasis(config.weight_basis_order, config.weight_basis_size),
                 rule,
                 n_functional_covariates,
                 n_scalar_covariates,
                 Net{}};
  model.net = init_net(model.feature_dim(), config.layer_widths, config.activations,
                       config.seed);
  return model;
}

Eigen::MatrixXd functional_features_values(const std::vector<Eigen::MatrixXd>& values,
                                           const BSplineBasis& weight_basis,
                                           const QuadratureRule& rule) {
  const int n_basis = weight_basis.n_basis();
  const int n_cov = static_cast<int>(values.size());
  const Eigen::Index n = values.front().rows();
  // zeta evaluated on the quadrature grid, pre-scaled by the weights:
  // features = X(grid) * diag(w) * Zeta.
  const Eigen::MatrixXd zeta = weight_basis.evaluate(rule.grid);
  const Eigen::MatrixXd weighted_zeta =
      zeta.array().colwise() * rule.weights.array();

  Eigen::MatrixXd features(n, n_cov * n_basis);
  for (int p = 0; p < n_cov; ++p) {
    features.middleCols(p * n_basis, n_basis).noalias() =
        values[static_cast<std::size_t>(p)] * weighted_zeta;
  }
  return features;
}

Eigen::MatrixXd functional_features(const MultiFunctionalData& standardized,
                                    const BSplineBasis& weight_basis,
                                    const QuadratureRule& rule) {
  std::vector<Eigen::MatrixXd> values;
  values.reserve(standardized.size());
  for (const FunctionalData& cov : standardized) {
    values.push_back(cov.values(rule.grid));
  }
  return functional_features_values(values, weight_basis, rule);
}

Eigen::MatrixXd assemble_inputs(const FnnModel& model,
                                const MultiFunctionalData& standardized,
                                const Eigen::MatrixXd& scalar_covariates) {
  const Eigen::MatrixXd functional =
      functional_features(standardized, model.weight_basis, model.rule);
  if (model.n_scalar_covariates == 0) return functional;
  if (scalar_covariates.cols() != model.n_scalar_covariates ||
      scalar_covariates.rows() != functional.rows()) {
    throw Error(ErrorCode::data, "scalar covariate block has the wrong shape");
  }
  Eigen::MatrixXd inputs(functional.rows(),
                         functional.cols() + scalar_covariates.cols());
  inputs << functional, scalar_covariates;
  return inputs;
}

Eigen::VectorXd fnn_predict(const FnnModel& model, const Eigen::MatrixXd& inputs) {
  return net_predict(model.net, inputs);
}

TrainHistory fnn_train(FnnModel& model, const Eigen::MatrixXd& train_inputs,
                       const Eigen::VectorXd& train_targets,
                       const Eigen::MatrixXd& val_inputs,
                       const Eigen::VectorXd& val_targets) {
  return net_train(model.net, train_inputs, train_targets, val_inputs, val_targets,
                   model.config.train_options());
}

Eigen::MatrixXd functional_weights(const FnnModel& model, const Grid& grid) {
  const int n_basis = model.weight_basis.n_basis();
  const Eigen::MatrixXd zeta = model.weight_basis.evaluate(grid);  // |grid| x M
  Eigen::MatrixXd gamma(model.n_functional_covariates, grid.size());
  for (int p = 0; p < model.n_functional_covariates; ++p) {
    const Eigen::VectorXd mean_coeffs =
        model.net.weights.front().middleCols(p * n_basis, n_basis).colwise().mean();
    gamma.row(p) = (zeta * mean_coeffs).transpose();
  }
  return gamma;
}

TuneResult tune_fnn(const std::vector<FnnConfig>& grid,
                    const MultiFunctionalData& standardized,
                    const Eigen::VectorXd& targets, const QuadratureRule& rule,
                    std::uint64_t seed, const MultiFunctionalData* validation,
                    const Eigen::VectorXd* validation_targets) {
  if (grid.empty()) {
    throw Error(ErrorCode::config, "hyperparameter grid must not be empty");
  }
  const int n = static_cast<int>(targets.size());
  constexpr int kFolds = 5;
  if (n < 50) {
    throw Error(ErrorCode::data, "tune_fnn needs at least 50 samples");
  }

  // Deterministic fold assignment: shuffled indices dealt round-robin.
  Rng fold_rng(derive_seed(seed, {0xf01dULL}));
  const std::vector<int> order = fold_rng.permutation(n);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i % kFolds;
  }

  // Feature matrices depend only on the weight basis; share them between
  // configs with the same basis.
  std::map<std::pair<int, int>, Eigen::MatrixXd> feature_cache;
  std::map<std::pair<int, int>, Eigen::MatrixXd> val_feature_cache;
  auto features_for = [&](const FnnConfig& cfg,
                          bool for_validation) -> const Eigen::MatrixXd& {
    const std::pair<int, int> key{cfg.weight_basis_order, cfg.weight_basis_size};
    auto& cache = for_validation ? val_feature_cache : feature_cache;
    auto it = cache.find(key);
    if (it == cache.end()) {
      const BSplineBasis basis(key.first, key.second);
      const MultiFunctionalData& data = for_validation ? *validation : standardized;
      it = cache.emplace(key, functional_features(data, basis, rule)).first;
    }
    return it->second;
  };

  TuneResult result;
  result.cv_mse.assign(grid.size(), 0.0);
  result.parameter_counts.assign(grid.size(), 0);

  for (std::size_t ci = 0; ci < grid.size(); ++ci) {
    const FnnConfig& cfg = grid[ci];
    const Eigen::MatrixXd& features = features_for(cfg, false);
    double total_sse = 0.0;
    bool diverged = false;

    for (int fold = 0; fold < kFolds; ++fold) {
      std::vector<int> train_idx, held_idx;
      for (int i = 0; i < n; ++i) {
        (fold_of[static_cast<std::size_t>(i)] == fold ? held_idx : train_idx)
            .push_back(i);
      }
      Eigen::MatrixXd train_x(train_idx.size(), features.cols());
      Eigen::VectorXd train_y(train_idx.size());
      for (std::size_t i = 0; i < train_idx.size(); ++i) {
        train_x.row(static_cast<Eigen::Index>(i)) =
            features.row(train_idx[i]);
        train_y[static_cast<Eigen::Index>(i)] = targets[train_idx[i]];
      }
      Eigen::MatrixXd held_x(held_idx.size(), features.cols());
      Eigen::VectorXd held_y(held_idx.size());
      for (std::size_t i = 0; i < held_idx.size(); ++i) {
        held_x.row(static_cast<Eigen::Index>(i)) = features.row(held_idx[i]);
        held_y[static_cast<Eigen::Index>(i)] = targets[held_idx[i]];
      }

      FnnConfig fold_cfg = cfg;
      fold_cfg.seed = derive_seed(seed, {static_cast<std::uint64_t>(ci),
                                         static_cast<std::uint64_t>(fold)});
      FnnModel model =
          init_fnn(fold_cfg, static_cast<int>(standardized.size()), 0, rule);
      if (result.parameter_counts[ci] == 0) {
        result.parameter_counts[ci] = model.net.parameter_count();
      }

      const bool external_val = validation != nullptr && validation_targets != nullptr;
      const Eigen::MatrixXd& val_x = external_val ? features_for(cfg, true) : held_x;
      const Eigen::VectorXd& val_y = external_val ? *validation_targets : held_y;
      double fold_sse = std::numeric_limits<double>::infinity();
      try {
        net_train(model.net, train_x, train_y, val_x, val_y,
                  fold_cfg.train_options());
        const Eigen::VectorXd pred = net_predict(model.net, held_x);
        fold_sse = (pred - held_y).squaredNorm();
      } catch (const TrainingDivergedError&) {
        diverged = true;
      }
      total_sse += fold_sse;
      result.cells.push_back(CvCell{static_cast<int>(ci), fold, fold_sse,
                                    static_cast<int>(held_idx.size())});
    }
    result.cv_mse[ci] =
        diverged ? std::numeric_limits<double>::infinity() : total_sse / n;
  }

  // Smallest CV-MSE; ties go to fewer parameters, then grid order.
  int best = 0;
  for (std::size_t ci = 1; ci < grid.size(); ++ci) {
    const bool better =
        result.cv_mse[ci] < result.cv_mse[static_cast<std::size_t>(best)] ||
        (result.cv_mse[ci] == result.cv_mse[static_cast<std::size_t>(best)] &&
         result.parameter_counts[ci] <
             result.parameter_counts[static_cast<std::size_t>(best)]);
    if (better) best = static_cast<int>(ci);
  }
  result.best_index = best;
  result.best = grid[static_cast<std::size_t>(best)];
  return result;
}

}  // namespace fnncc
