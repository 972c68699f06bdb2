#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "classbench/data.hpp"
#include "classbench/normal_model.hpp"

namespace classbench {

struct MissingnessSummary {
  std::vector<double> attribute_fraction;  // per attribute, class included
  double overall_fraction = 0.0;           // missing cells / all cells
  std::size_t affected_attributes = 0;
  std::size_t affected_instances = 0;
};

MissingnessSummary missingness_summary(const Dataset& d);

/// Column means (numeric) and modes (nominal, lowest index on ties).
struct MeanModeFill {
  std::vector<double> values;  // NaN where nothing is filled
};

/// Fits fill values on `d`. The class column is included only when
/// `include_class` is set. With `allow_unobserved` a column with no observed
/// value gets 0 instead of raising.
MeanModeFill fit_mean_mode(const Dataset& d, bool include_class = false,
                           bool allow_unobserved = false);
Dataset apply_mean_mode(const MeanModeFill& fill, const Dataset& d);
Dataset mean_mode_impute(const Dataset& d, bool include_class = false);

struct ImputationConfig {
  std::size_t m = 5;
  std::size_t burn_in = 200;
  std::size_t thin = 100;
  std::uint64_t seed = 0;
  double em_tolerance = 1e-6;
  std::size_t em_max_iterations = 1000;
  bool include_class = false;

  void validate() const;
};

struct AttributeImputation {
  std::size_t attribute = 0;
  std::size_t imputed_cells = 0;
  double mean_imputed = 0.0;  // over all m datasets
};

struct MultipleImputation {
  std::vector<Dataset> datasets;
  std::size_t em_iterations = 0;
  NormalModel<double> em_model;
  std::vector<std::size_t> columns;  // dataset attributes in the normal model
  std::vector<AttributeImputation> attributes;
};

/// Real matrix of the selected attributes (nominal as category index, NaN missing).
Eigen::MatrixXd encode_for_imputation(const Dataset& d, const std::vector<std::size_t>& columns);

/// EM start, `burn_in` data-augmentation steps, then one completed dataset
/// every `thin` steps until `m` are collected. Only originally missing cells
/// change; nominal draws are rounded to the nearest valid category.
MultipleImputation multiple_impute(const Dataset& d, const ImputationConfig& cfg);

nlohmann::json imputation_sidecar(const MultipleImputation& mi, const ImputationConfig& cfg,
                                  const Dataset& d);

}  // namespace classbench
