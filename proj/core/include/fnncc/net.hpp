#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "fnncc/errors.hpp"

namespace fnncc {

enum class Activation { relu, sigmoid, tanh, linear, softmax };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Dense feed-forward network; the final layer has width 1 (scalar response).
struct Net {
  std::vector<Eigen::MatrixXd> weights;  // per layer: out x in
  std::vector<Eigen::VectorXd> biases;
  std::vector<Activation> activations;

  int n_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int parameter_count() const;
};

struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;   // per layer: n x width, pre-activation
  std::vector<Eigen::MatrixXd> post;  // per layer: n x width, activation output
};

struct NetGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Xavier-uniform weights U(-a, a) with a = sqrt(6 / (fan_in + fan_out)),
// zero biases; deterministic given the seed.
Net init_net(int input_dim, const std::vector<int>& layer_widths,
             const std::vector<Activation>& activations, std::uint64_t seed);

// Forward pass over a batch (rows = samples). Throws a numeric error naming
// the layer if an activation goes non-finite.
ForwardCache net_forward(const Net& net, const Eigen::MatrixXd& inputs);
Eigen::VectorXd net_predict(const Net& net, const Eigen::MatrixXd& inputs);

double mean_squared_error(const Eigen::VectorXd& predicted,
                          const Eigen::VectorXd& observed);

// Exact reverse-mode gradients of the batch-mean squared error.
NetGradients net_gradient(const Net& net, const Eigen::MatrixXd& inputs,
                          const Eigen::VectorXd& targets);

struct TrainOptions {
  double learning_rate = 0.01;
  int batch_size = 64;
  int max_epochs = 500;
  int patience = 20;
  std::uint64_t seed = 1;
  // Adam moment constants.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainHistory {
  std::vector<double> train_mse;  // per epoch, on the full training set
  std::vector<double> val_mse;
  int stopped_epoch = 0;  // 1-based epoch at which training halted
  int best_epoch = 0;     // 1-based epoch of the returned parameters
};

class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& message, TrainHistory history)
      : Error(ErrorCode::training_diverged, message), history_(std::move(history)) {}
  const TrainHistory& history() const { return history_; }

 private:
  TrainHistory history_;
};

// Mini-batch Adam with per-epoch reshuffling and early stopping on the
// validation MSE; the network is left at the best validation epoch.
TrainHistory net_train(Net& net, const Eigen::MatrixXd& train_inputs,
                       const Eigen::VectorXd& train_targets,
                       const Eigen::MatrixXd& val_inputs,
                       const Eigen::VectorXd& val_targets,
                       const TrainOptions& options);

}  // namespace fnncc
