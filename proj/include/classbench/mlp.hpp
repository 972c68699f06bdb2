#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "classbench/data.hpp"
#include "classbench/distribution.hpp"
#include "classbench/random.hpp"

namespace classbench {

struct MlpConfig {
  double learning_rate = 0.3;
  double momentum = 0.2;
  std::size_t hidden_units = 0;  // 0: inputs connect straight to the outputs
  std::size_t epochs = 500;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const MlpConfig&) const = default;
};

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Fully connected sigmoid layer: out = sigmoid(weights^T * in + bias).
/// `weights` is inputs x outputs; the delta buffers hold the previous update.
template <typename Scalar>
struct Layer {
  Mat<Scalar> weights;
  Vec<Scalar> bias;
  Mat<Scalar> weight_delta;
  Vec<Scalar> bias_delta;

  Layer(Eigen::Index inputs, Eigen::Index outputs)
      : weights(Mat<Scalar>::Zero(inputs, outputs)),
        bias(Vec<Scalar>::Zero(outputs)),
        weight_delta(Mat<Scalar>::Zero(inputs, outputs)),
        bias_delta(Vec<Scalar>::Zero(outputs)) {}

  Eigen::Index inputs() const { return weights.rows(); }
  Eigen::Index outputs() const { return weights.cols(); }
};

template <typename Scalar>
struct LayerGradient {
  Mat<Scalar> weights;
  Vec<Scalar> bias;
};

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  using std::exp;
  return Scalar(1) / (Scalar(1) + exp(-x));
}

/// Single-hidden-layer perceptron with one sigmoid output per class.
template <typename Scalar>
class Network {
 public:
  Network(std::size_t inputs, std::size_t hidden, std::size_t outputs) {
    const auto in = static_cast<Eigen::Index>(inputs);
    const auto h = static_cast<Eigen::Index>(hidden);
    const auto out = static_cast<Eigen::Index>(outputs);
    if (hidden == 0) {
      layers_.emplace_back(in, out);
    } else {
      layers_.emplace_back(in, h);
      layers_.emplace_back(h, out);
    }
  }

  std::size_t inputs() const { return static_cast<std::size_t>(layers_.front().inputs()); }
  std::size_t outputs() const { return static_cast<std::size_t>(layers_.back().outputs()); }
  std::size_t hidden_units() const {
    return layers_.size() == 1 ? 0 : static_cast<std::size_t>(layers_.front().outputs());
  }

  std::vector<Layer<Scalar>>& layers() { return layers_; }
  const std::vector<Layer<Scalar>>& layers() const { return layers_; }

  /// Activations of every layer, input first.
  template <typename Derived>
  std::vector<Vec<Scalar>> trace(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != layers_.front().inputs())
      throw std::invalid_argument("input has " + std::to_string(x.size()) +
                                  " values, network expects " + std::to_string(inputs()));
    std::vector<Vec<Scalar>> acts;
    acts.reserve(layers_.size() + 1);
    acts.emplace_back(x.template cast<Scalar>());
    for (const auto& layer : layers_) {
      Vec<Scalar> z = layer.weights.transpose() * acts.back() + layer.bias;
      acts.emplace_back(z.unaryExpr([](Scalar v) { return sigmoid(v); }));
    }
    return acts;
  }

  /// Raw sigmoid outputs.
  template <typename Derived>
  Vec<Scalar> outputs_for(const Eigen::MatrixBase<Derived>& x) const {
    return trace(x).back();
  }

  bool operator==(const Network& other) const {
    if (layers_.size() != other.layers_.size()) return false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& a = layers_[i];
      const auto& b = other.layers_[i];
      if (a.weights != b.weights || a.bias != b.bias || a.weight_delta != b.weight_delta ||
          a.bias_delta != b.bias_delta)
        return false;
    }
    return true;
  }

 private:
  std::vector<Layer<Scalar>> layers_;
};

using MlpNetwork = Network<double>;

/// Weights and biases uniform in [-0.5, 0.5] from cfg.seed; delta buffers zero.
template <typename Scalar = double>
Network<Scalar> init_network(std::size_t inputs, std::size_t classes, const MlpConfig& cfg) {
  if (inputs < 1) throw std::invalid_argument("network needs at least one input");
  if (classes < 2) throw std::invalid_argument("network needs at least two classes");
  Network<Scalar> net(inputs, cfg.hidden_units, classes);
  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(-0.5, 0.5);
  for (auto& layer : net.layers()) {
    for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
        layer.weights(r, c) = static_cast<Scalar>(uniform(rng));
    for (Eigen::Index c = 0; c < layer.bias.size(); ++c)
      layer.bias(c) = static_cast<Scalar>(uniform(rng));
  }
  return net;
}

/// Output activations normalized to sum to one.
template <typename Scalar, typename Derived>
ClassDistribution forward(const Network<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
  const Vec<Scalar> out = net.outputs_for(x);
  std::vector<double> weights(static_cast<std::size_t>(out.size()));
  for (Eigen::Index j = 0; j < out.size(); ++j)
    weights[static_cast<std::size_t>(j)] = static_cast<double>(out(j));
  return ClassDistribution(std::move(weights));
}

/// E = 1/2 * sum_j (o_j - t_j)^2 for one instance.
template <typename Scalar, typename DX, typename DT>
Scalar squared_error(const Network<Scalar>& net, const Eigen::MatrixBase<DX>& x,
                     const Eigen::MatrixBase<DT>& target) {
  const Vec<Scalar> out = net.outputs_for(x);
  return Scalar(0.5) * (out - target.template cast<Scalar>()).squaredNorm();
}

/// dE/dw and dE/db for every layer, by back-propagating the output error.
template <typename Scalar, typename DX, typename DT>
std::vector<LayerGradient<Scalar>> gradient(const Network<Scalar>& net,
                                            const Eigen::MatrixBase<DX>& x,
                                            const Eigen::MatrixBase<DT>& target) {
  const auto acts = net.trace(x);
  const auto& layers = net.layers();
  if (target.size() != layers.back().outputs())
    throw std::invalid_argument("target length does not match output count");
  std::vector<LayerGradient<Scalar>> grads(layers.size());
  const Vec<Scalar>& out = acts.back();
  Vec<Scalar> delta = ((out - target.template cast<Scalar>()).array() * out.array() *
                       (Scalar(1) - out.array()))
                          .matrix();
  for (std::size_t l = layers.size(); l-- > 0;) {
    grads[l].weights = acts[l] * delta.transpose();
    grads[l].bias = delta;
    if (l > 0) {
      const Vec<Scalar>& h = acts[l];
      delta = ((layers[l].weights * delta).array() * h.array() * (Scalar(1) - h.array()))
                  .matrix();
    }
  }
  return grads;
}

/// One generalized-delta-rule update with momentum:
/// dw(t) = -learning_rate * dE/dw + momentum * dw(t-1).
template <typename Scalar, typename DX, typename DT>
void backprop_step(Network<Scalar>& net, const Eigen::MatrixBase<DX>& x,
                   const Eigen::MatrixBase<DT>& target, Scalar learning_rate, Scalar momentum) {
  const auto grads = gradient(net, x, target);
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& layer = layers[l];
    layer.weight_delta = momentum * layer.weight_delta - learning_rate * grads[l].weights;
    layer.bias_delta = momentum * layer.bias_delta - learning_rate * grads[l].bias;
    layer.weights += layer.weight_delta;
    layer.bias += layer.bias_delta;
  }
}

/// Inputs (all non-class columns) and one-hot targets of a fully observed,
/// all-numeric dataset. Throws naming the first attribute that is nominal or
/// has a missing cell.
struct EncodedData {
  Mat<double> inputs;   // N x inputs
  Mat<double> targets;  // N x classes
  std::vector<std::size_t> labels;
};

EncodedData encode_for_network(const Dataset& d);
/// Input vector of one instance (class column dropped).
Vec<double> encode_instance(const Dataset& d, std::size_t row);

/// Mean squared error E averaged over the rows of `data`.
template <typename Scalar>
Scalar mean_squared_error(const Network<Scalar>& net, const EncodedData& data) {
  Scalar total(0);
  for (Eigen::Index r = 0; r < data.inputs.rows(); ++r)
    total += squared_error(net, data.inputs.row(r).transpose(), data.targets.row(r).transpose());
  return total / static_cast<Scalar>(data.inputs.rows());
}

/// Per-instance training for cfg.epochs passes; each pass visits the rows in
/// a fresh seed-determined order. No learning-rate decay.
template <typename Scalar = double>
Network<Scalar> train(const EncodedData& data, const MlpConfig& cfg) {
  cfg.validate();
  if (data.inputs.rows() == 0) throw std::invalid_argument("empty training set");
  auto init_cfg = cfg;
  init_cfg.seed = derive_seed(cfg.seed, {0});
  auto net = init_network<Scalar>(static_cast<std::size_t>(data.inputs.cols()),
                                  static_cast<std::size_t>(data.targets.cols()), init_cfg);
  Rng order_rng(derive_seed(cfg.seed, {1}));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.inputs.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto alpha = static_cast<Scalar>(cfg.learning_rate);
  const auto beta = static_cast<Scalar>(cfg.momentum);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    for (auto r : order)
      backprop_step(net, data.inputs.row(r).transpose(), data.targets.row(r).transpose(), alpha,
                    beta);
  }
  return net;
}

template <typename Scalar = double>
Network<Scalar> train(const Dataset& d, const MlpConfig& cfg) {
  return train<Scalar>(encode_for_network(d), cfg);
}

/// Versioned plain-text dump of weights and biases.
void write_network(std::ostream& out, const MlpNetwork& net);
MlpNetwork read_network(std::istream& in);

}  // namespace classbench
