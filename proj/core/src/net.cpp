#include "fnncc/net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fnncc/rng.hpp"

namespace fnncc {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "linear") return Activation::linear;
  if (name == "softmax") return Activation::softmax;
  throw Error(ErrorCode::config, "unknown activation '" + name + "'");
}

int Net::parameter_count() const {
  int count = 0;
  for (int l = 0; l < n_layers(); ++l) {
    count += static_cast<int>(weights[l].size() + biases[l].size());
  }
  return count;
}

Net init_net(int input_dim, const std::vector<int>& layer_widths,
             const std::vector<Activation>& activations, std::uint64_t seed) {
  if (layer_widths.empty() || layer_widths.size() != activations.size()) {
    throw Error(ErrorCode::config, "layer widths and activations must align");
  }
  if (layer_widths.back() != 1) {
    throw Error(ErrorCode::config, "final layer width must be 1");
  }
  for (int w : layer_widths) {
    if (w < 1) throw Error(ErrorCode::config, "layer widths must be positive");
  }

  Net net;
  net.activations = activations;
  Rng rng(seed);
  int fan_in = input_dim;
  for (std::size_t l = 0; l < layer_widths.size(); ++l) {
    const int fan_out = layer_widths[l];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = rng.uniform(-bound, bound);
      }
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    fan_in = fan_out;
  }
  return net;
}

namespace {

Eigen::MatrixXd apply_activation(const Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::relu:
      return z.cwiseMax(0.0);
    case Activation::sigmoid:
      return ((-z.array()).exp() + 1.0).inverse().matrix();
    case Activation::tanh:
      return z.array().tanh().matrix();
    case Activation::linear:
      return z;
    case Activation::softmax: {
      Eigen::MatrixXd out(z.rows(), z.cols());
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const Eigen::ArrayXd shifted = z.row(i).array() - z.row(i).maxCoeff();
        const Eigen::ArrayXd e = shifted.exp();
        out.row(i) = (e / e.sum()).transpose();
      }
      return out;
    }
  }
  throw Error(ErrorCode::internal, "unreachable activation");
}

// delta := dL/d(pre-activation) given dL/d(post-activation).
Eigen::MatrixXd activation_backward(const Eigen::MatrixXd& d_post,
                                    const Eigen::MatrixXd& pre,
                                    const Eigen::MatrixXd& post, Activation a) {
  switch (a) {
    case Activation::relu:
      // Subgradient at 0 is taken as 0.
      return ((pre.array() > 0.0).cast<double>() * d_post.array()).matrix();
    case Activation::sigmoid:
      return (d_post.array() * post.array() * (1.0 - post.array())).matrix();
    case Activation::tanh:
      return (d_post.array() * (1.0 - post.array().square())).matrix();
    case Activation::linear:
      return d_post;
    case Activation::softmax: {
      Eigen::MatrixXd out(d_post.rows(), d_post.cols());
      for (Eigen::Index i = 0; i < d_post.rows(); ++i) {
        const double dot = d_post.row(i).dot(post.row(i));
        out.row(i) = post.row(i).array() * (d_post.row(i).array() - dot);
      }
      return out;
    }
  }
  throw Error(ErrorCode::internal, "unreachable activation");
}

}  // namespace

ForwardCache net_forward(const Net& net, const Eigen::MatrixXd& inputs) {
  ForwardCache cache;
  cache.pre.reserve(net.weights.size());
  cache.post.reserve(net.weights.size());
  const Eigen::MatrixXd* current = &inputs;
  for (int l = 0; l < net.n_layers(); ++l) {
    Eigen::MatrixXd z =
        (*current * net.weights[l].transpose()).rowwise() + net.biases[l].transpose();
    Eigen::MatrixXd h = apply_activation(z, net.activations[l]);
    if (!h.allFinite()) {
      throw Error(ErrorCode::numeric,
                  "non-finite activation in layer " + std::to_string(l + 1));
    }
    cache.pre.push_back(std::move(z));
    cache.post.push_back(std::move(h));
    current = &cache.post.back();
  }
  return cache;
}

Eigen::VectorXd net_predict(const Net& net, const Eigen::MatrixXd& inputs) {
  return net_forward(net, inputs).post.back().col(0);
}

double mean_squared_error(const Eigen::VectorXd& predicted,
                          const Eigen::VectorXd& observed) {
  return (predicted - observed).squaredNorm() / static_cast<double>(observed.size());
}

NetGradients net_gradient(const Net& net, const Eigen::MatrixXd& inputs,
                          const Eigen::VectorXd& targets) {
  if (inputs.rows() == 0) {
    throw Error(ErrorCode::data, "gradient needs a non-empty batch");
  }
  const ForwardCache cache = net_forward(net, inputs);
  const int n_layers = net.n_layers();
  const double batch = static_cast<double>(inputs.rows());

  NetGradients grads;
  grads.weights.resize(n_layers);
  grads.biases.resize(n_layers);

  // d(mean MSE)/d(prediction) = 2 (yhat - y) / n.
  Eigen::MatrixXd d_post = (cache.post.back().col(0) - targets) * (2.0 / batch);
  for (int l = n_layers - 1; l >= 0; --l) {
    const Eigen::MatrixXd delta =
        activation_backward(d_post, cache.pre[l], cache.post[l], net.activations[l]);
    const Eigen::MatrixXd& layer_in = (l == 0) ? inputs : cache.post[l - 1];
    grads.weights[l] = delta.transpose() * layer_in;
    grads.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) d_post = delta * net.weights[l];
  }
  return grads;
}

TrainHistory net_train(Net& net, const Eigen::MatrixXd& train_inputs,
                       const Eigen::VectorXd& train_targets,
                       const Eigen::MatrixXd& val_inputs,
                       const Eigen::VectorXd& val_targets,
                       const TrainOptions& options) {
  const int n = static_cast<int>(train_inputs.rows());
  if (n == 0 || val_inputs.rows() == 0) {
    throw Error(ErrorCode::data, "training and validation sets must be non-empty");
  }
  const int batch_size = std::min(options.batch_size, n);

  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  for (int l = 0; l < net.n_layers(); ++l) {
    m_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    v_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    m_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    v_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }

  Rng shuffle_rng(derive_seed(options.seed, {0x5u}));
  TrainHistory history;
  Net best = net;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  long step = 0;

  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    const std::vector<int> order = shuffle_rng.permutation(n);
    for (int start = 0; start < n; start += batch_size) {
      const int size = std::min(batch_size, n - start);
      Eigen::MatrixXd batch_x(size, train_inputs.cols());
      Eigen::VectorXd batch_y(size);
      for (int i = 0; i < size; ++i) {
        batch_x.row(i) = train_inputs.row(order[start + i]);
        batch_y[i] = train_targets[order[start + i]];
      }
      const NetGradients grads = net_gradient(net, batch_x, batch_y);
      ++step;
      const double bc1 = 1.0 - std::pow(options.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(options.beta2, static_cast<double>(step));
      for (int l = 0; l < net.n_layers(); ++l) {
        m_w[l] = options.beta1 * m_w[l] + (1.0 - options.beta1) * grads.weights[l];
        v_w[l] = (options.beta2 * v_w[l].array() +
                  (1.0 - options.beta2) * grads.weights[l].array().square())
                     .matrix();
        net.weights[l].array() -=
            options.learning_rate * (m_w[l].array() / bc1) /
            ((v_w[l].array() / bc2).sqrt() + options.epsilon);
        m_b[l] = options.beta1 * m_b[l] + (1.0 - options.beta1) * grads.biases[l];
        v_b[l] = (options.beta2 * v_b[l].array() +
                  (1.0 - options.beta2) * grads.biases[l].array().square())
                     .matrix();
        net.biases[l].array() -=
            options.learning_rate * (m_b[l].array() / bc1) /
            ((v_b[l].array() / bc2).sqrt() + options.epsilon);
      }
    }

    double train_mse = std::numeric_limits<double>::quiet_NaN();
    double val_mse = std::numeric_limits<double>::quiet_NaN();
    try {
      train_mse = mean_squared_error(net_predict(net, train_inputs), train_targets);
      val_mse = mean_squared_error(net_predict(net, val_inputs), val_targets);
    } catch (const Error&) {
      // fall through to the divergence check below
    }
    history.train_mse.push_back(train_mse);
    history.val_mse.push_back(val_mse);
    history.stopped_epoch = epoch;

    if (!std::isfinite(val_mse)) {
      throw TrainingDivergedError("validation MSE became non-finite at epoch " +
                                      std::to_string(epoch),
                                  history);
    }

    if (val_mse < best_val) {
      best_val = val_mse;
      best = net;
      history.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best > options.patience) break;
    }
  }

  net = best;
  return history;
}

}  // namespace fnncc
