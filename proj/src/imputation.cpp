#include "classbench/imputation.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace classbench {

MissingnessSummary missingness_summary(const Dataset& d) {
  MissingnessSummary s;
  const std::size_t n = d.num_instances(), a = d.num_attributes();
  s.attribute_fraction.assign(a, 0.0);
  std::size_t total = 0;
  for (std::size_t c = 0; c < a; ++c) {
    std::size_t count = 0;
    for (std::size_t r = 0; r < n; ++r) count += d.missing(r, c) ? 1 : 0;
    total += count;
    s.attribute_fraction[c] = n ? static_cast<double>(count) / static_cast<double>(n) : 0.0;
    if (count) ++s.affected_attributes;
  }
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < a; ++c)
      if (d.missing(r, c)) {
        ++s.affected_instances;
        break;
      }
  s.overall_fraction = n ? static_cast<double>(total) / static_cast<double>(n * a) : 0.0;
  return s;
}

MeanModeFill fit_mean_mode(const Dataset& d, bool include_class, bool allow_unobserved) {
  MeanModeFill fill{std::vector<double>(d.num_attributes(), kMissing)};
  for (std::size_t a = 0; a < d.num_attributes(); ++a) {
    if (a == d.class_index() && !include_class) continue;
    const auto& attr = d.attribute(a);
    std::vector<std::size_t> counts(attr.category_count(), 0);
    double sum = 0.0;
    std::size_t observed = 0;
    for (std::size_t r = 0; r < d.num_instances(); ++r) {
      const double v = d(r, a);
      if (is_missing(v)) continue;
      ++observed;
      if (attr.is_nominal()) ++counts[static_cast<std::size_t>(v)];
      else sum += v;
    }
    if (observed == 0) {
      if (!allow_unobserved)
        throw DataError("attribute '" + attr.name + "' has no observed value to impute from");
      fill.values[a] = 0.0;
      continue;
    }
    if (attr.is_nominal())
      fill.values[a] = static_cast<double>(std::max_element(counts.begin(), counts.end()) -
                                           counts.begin());
    else
      fill.values[a] = sum / static_cast<double>(observed);
  }
  return fill;
}

Dataset apply_mean_mode(const MeanModeFill& fill, const Dataset& d) {
  if (fill.values.size() != d.num_attributes())
    throw DataError("mean/mode fill was fitted on a different schema");
  CellMatrix cells = d.cells();
  for (Eigen::Index r = 0; r < cells.rows(); ++r)
    for (Eigen::Index c = 0; c < cells.cols(); ++c)
      if (is_missing(cells(r, c))) cells(r, c) = fill.values[static_cast<std::size_t>(c)];
  return d.with_cells(std::move(cells));
}

Dataset mean_mode_impute(const Dataset& d, bool include_class) {
  return apply_mean_mode(fit_mean_mode(d, include_class), d);
}

void ImputationConfig::validate() const {
  if (m < 1) throw std::invalid_argument("imputation count m must be at least 1");
  if (thin < 1) throw std::invalid_argument("thin must be at least 1");
  if (!(em_tolerance > 0.0)) throw std::invalid_argument("EM tolerance must be positive");
  if (em_max_iterations < 1) throw std::invalid_argument("EM iteration cap must be at least 1");
}

Eigen::MatrixXd encode_for_imputation(const Dataset& d, const std::vector<std::size_t>& columns) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d.num_instances()),
                    static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j)
    x.col(static_cast<Eigen::Index>(j)) = d.cells().col(static_cast<Eigen::Index>(columns[j]));
  return x;
}

namespace {

Dataset decode(const Dataset& d, const std::vector<std::size_t>& columns,
               const Eigen::MatrixXd& completed) {
  CellMatrix cells = d.cells();
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto a = columns[j];
    const auto& attr = d.attribute(a);
    for (std::size_t r = 0; r < d.num_instances(); ++r) {
      if (!d.missing(r, a)) continue;
      double v = completed(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
      if (attr.is_nominal())
        v = std::clamp(std::round(v), 0.0, static_cast<double>(attr.category_count() - 1));
      cells(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) = v;
    }
  }
  return d.with_cells(std::move(cells));
}

}  // namespace

MultipleImputation multiple_impute(const Dataset& d, const ImputationConfig& cfg) {
  cfg.validate();
  MultipleImputation out;
  for (std::size_t a = 0; a < d.num_attributes(); ++a)
    if (a != d.class_index() || cfg.include_class) out.columns.push_back(a);

  const Eigen::MatrixXd x = encode_for_imputation(d, out.columns);
  for (auto a : out.columns) {
    bool observed = false;
    for (std::size_t r = 0; r < d.num_instances() && !observed; ++r) observed = !d.missing(r, a);
    if (!observed)
      throw DataError("attribute '" + d.attribute(a).name + "' has no observed value to impute from");
  }
  for (auto a : out.columns) out.attributes.push_back({a, 0, 0.0});

  if (!x.array().isNaN().any()) {
    out.datasets.assign(cfg.m, d);
    return out;
  }

  const auto em = em_mle<double>(x, EmOptions{cfg.em_tolerance, cfg.em_max_iterations});
  out.em_iterations = em.iterations;
  out.em_model = em.model;

  Rng rng(cfg.seed);
  NormalModel<double> state = em.model;
  for (std::size_t i = 0; i < cfg.burn_in; ++i) state = da_step(state, x, rng).model;
  for (std::size_t k = 0; k < cfg.m; ++k) {
    DaResult<double> step;
    for (std::size_t i = 0; i < cfg.thin; ++i) {
      step = da_step(state, x, rng);
      state = step.model;
    }
    out.datasets.push_back(decode(d, out.columns, step.completed));
  }

  for (auto& summary : out.attributes) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& imputed : out.datasets)
      for (std::size_t r = 0; r < d.num_instances(); ++r)
        if (d.missing(r, summary.attribute)) {
          sum += imputed(r, summary.attribute);
          ++count;
        }
    summary.imputed_cells = count / cfg.m;
    summary.mean_imputed = count ? sum / static_cast<double>(count) : 0.0;
  }
  return out;
}

nlohmann::json imputation_sidecar(const MultipleImputation& mi, const ImputationConfig& cfg,
                                  const Dataset& d) {
  nlohmann::json j;
  j["config"] = {{"m", cfg.m},
                 {"burn_in", cfg.burn_in},
                 {"thin", cfg.thin},
                 {"seed", cfg.seed},
                 {"em_tolerance", cfg.em_tolerance},
                 {"em_max_iterations", cfg.em_max_iterations},
                 {"include_class", cfg.include_class}};
  j["em_iterations"] = mi.em_iterations;
  auto attrs = nlohmann::json::array();
  for (const auto& a : mi.attributes) {
    if (a.imputed_cells == 0) continue;
    attrs.push_back({{"attribute", d.attribute(a.attribute).name},
                     {"imputed_cells", a.imputed_cells},
                     {"mean_imputed", a.mean_imputed}});
  }
  j["attributes"] = std::move(attrs);
  return j;
}

}  // namespace classbench
