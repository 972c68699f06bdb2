#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "classbench/data.hpp"
#include "classbench/distribution.hpp"

namespace classbench {

enum class Weighting { uniform, inverse_distance, complement_distance };

std::string_view to_string(Weighting w);
Weighting parse_weighting(std::string_view text);

struct KnnConfig {
  std::size_t k = 1;  // odd
  Weighting weighting = Weighting::uniform;

  void validate() const;
  bool operator==(const KnnConfig&) const = default;
};

/// Per-attribute difference used by the distance. Numeric values are
/// expected in [0,1]; a missing value is taken as far from the other value
/// as the unit range allows.
double attribute_difference(double a, double b, const Attribute& attr);

/// Euclidean distance over the non-class attributes.
double distance(std::span<const double> a, std::span<const double> b,
                std::span<const Attribute> schema, std::size_t class_index);

/// Votes among the k nearest training instances (distance ties go to the
/// lower training index). `train` must have no missing class values.
ClassDistribution classify(const Dataset& train, std::span<const double> query,
                           const KnnConfig& cfg);

}  // namespace classbench
