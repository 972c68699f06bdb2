#include "classbench/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace classbench {

std::string_view to_string(Weighting w) {
  switch (w) {
    case Weighting::uniform: return "uniform";
    case Weighting::inverse_distance: return "inverse";
    case Weighting::complement_distance: return "complement";
  }
  return "uniform";
}

Weighting parse_weighting(std::string_view text) {
  if (text == "uniform" || text == "none") return Weighting::uniform;
  if (text == "inverse" || text == "1/d" || text == "inverse_distance")
    return Weighting::inverse_distance;
  if (text == "complement" || text == "1-d" || text == "complement_distance")
    return Weighting::complement_distance;
  throw std::invalid_argument("unknown distance weighting '" + std::string(text) + "'");
}

void KnnConfig::validate() const {
  if (k < 1 || k % 2 == 0)
    throw std::invalid_argument("k must be a positive odd integer, got " + std::to_string(k));
}

double attribute_difference(double a, double b, const Attribute& attr) {
  const bool ma = is_missing(a), mb = is_missing(b);
  if (ma && mb) return 1.0;
  if (attr.is_nominal()) {
    if (ma || mb) return 1.0;
    return a == b ? 0.0 : 1.0;
  }
  if (ma || mb) {
    const double v = ma ? b : a;
    return std::max(v, 1.0 - v);
  }
  return std::abs(a - b);
}

double distance(std::span<const double> a, std::span<const double> b,
                std::span<const Attribute> schema, std::size_t class_index) {
  if (a.size() != schema.size() || b.size() != schema.size())
    throw std::invalid_argument("instance length does not match schema");
  double sum = 0.0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (i == class_index) continue;
    const double delta = attribute_difference(a[i], b[i], schema[i]);
    sum += delta * delta;
  }
  return std::sqrt(sum);
}

ClassDistribution classify(const Dataset& train, std::span<const double> query,
                           const KnnConfig& cfg) {
  cfg.validate();
  const std::size_t n = train.num_instances();
  if (n == 0) throw std::invalid_argument("empty training set");
  if (cfg.k > n)
    throw std::invalid_argument("k=" + std::to_string(cfg.k) + " exceeds training size " +
                                std::to_string(n));

  std::vector<std::pair<double, std::size_t>> scored(n);
  for (std::size_t i = 0; i < n; ++i)
    scored[i] = {distance(train.instance(i), query, train.attributes(), train.class_index()), i};
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(cfg.k),
                    scored.end());
  const std::span<const std::pair<double, std::size_t>> nearest(scored.data(), cfg.k);

  std::vector<double> weights(train.num_classes(), 0.0);
  auto class_of = [&](std::size_t i) {
    auto c = train.class_of(i);
    if (!c) throw std::invalid_argument("training instance has a missing class");
    return *c;
  };

  if (cfg.weighting == Weighting::inverse_distance && nearest.front().first == 0.0) {
    // 1/d diverges: share the vote among exact matches only
    for (const auto& [d, i] : nearest)
      if (d == 0.0) weights[class_of(i)] += 1.0;
    return ClassDistribution(std::move(weights));
  }
  for (const auto& [d, i] : nearest) {
    double w = 1.0;
    if (cfg.weighting == Weighting::inverse_distance) w = 1.0 / d;
    else if (cfg.weighting == Weighting::complement_distance) w = std::max(0.0, 1.0 - d);
    weights[class_of(i)] += w;
  }
  if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) {
    // every neighbour is at distance >= 1 under complement weighting
    for (const auto& [d, i] : nearest) weights[class_of(i)] += 1.0;
  }
  return ClassDistribution(std::move(weights));
}

}  // namespace classbench
