#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "classbench/data.hpp"
#include "classbench/imputation.hpp"
#include "classbench/knn.hpp"
#include "classbench/metrics.hpp"
#include "classbench/mlp.hpp"

namespace classbench {

/// Predicts the most frequent training class; probabilities are the
/// training class frequencies.
struct MajorityConfig {
  bool operator==(const MajorityConfig&) const = default;
};

using ClassifierSpec = std::variant<KnnConfig, MlpConfig, MajorityConfig>;

/// Compact label without commas, e.g. "knn:k=9:uniform".
std::string describe(const ClassifierSpec& spec);

/// Inverse of describe(). Omitted fields keep their defaults, so "knn:k=5"
/// and "mlp:hidden=4" are accepted.
ClassifierSpec parse_spec(std::string_view text);

enum class MissingMethod { default_handling, mean_mode, multiple_imputation };

std::string_view to_string(MissingMethod m);
MissingMethod parse_missing_method(std::string_view text);

struct CvOptions {
  /// Fit normalization on each training partition; otherwise on the whole set.
  bool per_fold_normalization = true;
  /// Positive class for the one-vs-rest ROC curve.
  std::size_t roc_positive = 0;
};

/// Stratified k-fold cross-validation pooled into one report. Per fold the
/// preprocessing is fitted on the training partition only: min-max
/// statistics, and for the MLP a mean/mode fill of missing inputs followed by
/// nominal-to-binary encoding. kNN keeps missing cells (max-distance rule).
EvaluationReport cross_validate(const Dataset& d, const ClassifierSpec& spec, std::size_t folds,
                                std::uint64_t seed, const CvOptions& options = {});

struct SweepGrid {
  enum class Kind { knn, mlp };
  Kind kind = Kind::knn;
  std::vector<std::size_t> k;
  std::vector<Weighting> weightings;
  std::vector<double> learning_rates;
  std::vector<double> momenta;
  std::vector<std::size_t> hidden_units;
  std::size_t epochs = 500;

  void validate() const;
  std::vector<ClassifierSpec> cells() const;
};

/// Grid definition file: `key = value` lines, '#' comments. Keys:
/// classifier, k, weighting, learning_rate, momentum, hidden, epochs,
/// folds, seeds. List values are comma separated.
struct GridFile {
  SweepGrid grid;
  std::optional<std::size_t> folds;
  std::vector<std::uint64_t> seeds;
};

GridFile parse_grid(std::istream& in);
GridFile load_grid(const std::filesystem::path& path);

struct SeedResult {
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double rmse = 0.0;
  double kappa = 0.0;
  // spread over the m completed datasets under multiple imputation, else 0
  double accuracy_sd = 0.0;
  double rmse_sd = 0.0;
  double kappa_sd = 0.0;
  double wall_time = 0.0;

  bool operator==(const SeedResult&) const = default;
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
};

struct TableRow {
  std::string dataset;
  std::string classifier;
  std::string missing_method;
  std::vector<SeedResult> seeds;
  bool best = false;

  Summary accuracy() const;
  Summary rmse() const;
  Summary kappa() const;
  Summary wall_time() const;

  bool operator==(const TableRow&) const = default;
};

struct ComparisonTable {
  std::vector<TableRow> rows;
  bool operator==(const ComparisonTable&) const = default;
};

/// Orders rows by mean accuracy (descending) then mean RMSE (ascending) and
/// flags the first row as best.
void rank(ComparisonTable& table);

ComparisonTable sweep(const Dataset& d, const std::string& dataset_name, const SweepGrid& grid,
                      std::size_t folds, std::span<const std::uint64_t> seeds,
                      const CvOptions& options = {});

/// Evaluates every spec under every missing-value method. Under multiple
/// imputation each seed draws its own m completed datasets and the metrics
/// are averaged over them. Rows follow (method, spec) order.
ComparisonTable compare_missing_methods(const Dataset& d, const std::string& dataset_name,
                                        std::span<const ClassifierSpec> specs,
                                        std::span<const MissingMethod> methods, std::size_t folds,
                                        std::span<const std::uint64_t> seeds,
                                        const ImputationConfig& imputation = {},
                                        const CvOptions& options = {});

/// Dataset prepared for one missing-value method (class-missing rows dropped).
std::vector<Dataset> prepare_for_method(const Dataset& d, MissingMethod method,
                                        const ImputationConfig& imputation, std::uint64_t seed);

enum class ReportFormat { csv, json };

ReportFormat parse_report_format(std::string_view text);

/// CSV: one line per (row, seed). JSON: rows with per-seed results and
/// mean/sd summaries. Wall time is included only when requested.
void write_table(std::ostream& out, const ComparisonTable& table, ReportFormat format,
                 bool with_timing = false);
nlohmann::json table_to_json(const ComparisonTable& table, bool with_timing = false);
ComparisonTable table_from_json(const nlohmann::json& j);
void emit_report(const ComparisonTable& table, ReportFormat format,
                 const std::filesystem::path& path, bool with_timing = false);

}  // namespace classbench
