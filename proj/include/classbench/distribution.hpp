#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace classbench {

/// Nonnegative per-class weights. The prediction is the lowest class index
/// that attains the maximum weight.
class ClassDistribution {
 public:
  ClassDistribution() = default;
  explicit ClassDistribution(std::vector<double> weights);

  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::size_t predicted() const noexcept { return predicted_; }
  /// Weights divided by their sum.
  std::vector<double> probabilities() const;

 private:
  std::vector<double> weights_;
  std::size_t predicted_ = 0;
};

inline ClassDistribution::ClassDistribution(std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (weights_.empty()) throw std::invalid_argument("class distribution is empty");
  bool positive = false;
  for (std::size_t c = 0; c < weights_.size(); ++c) {
    if (!(weights_[c] >= 0.0)) throw std::invalid_argument("class weights must be nonnegative");
    positive = positive || weights_[c] > 0.0;
    if (weights_[c] > weights_[predicted_]) predicted_ = c;
  }
  if (!positive) throw std::invalid_argument("class distribution has no positive weight");
}

inline std::vector<double> ClassDistribution::probabilities() const {
  double total = 0.0;
  for (double w : weights_) total += w;
  std::vector<double> p(weights_);
  for (double& v : p) v /= total;
  return p;
}

}  // namespace classbench
