#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace classbench {

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rows are actual classes, columns predicted classes.
class ConfusionMatrix {
 public:
  using Counts = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

  explicit ConfusionMatrix(std::size_t classes = 0);
  explicit ConfusionMatrix(Counts counts);

  void add(std::size_t actual, std::size_t predicted, std::int64_t count = 1);
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  std::size_t classes() const noexcept { return static_cast<std::size_t>(counts_.rows()); }
  std::int64_t operator()(std::size_t actual, std::size_t predicted) const {
    return counts_(static_cast<Eigen::Index>(actual), static_cast<Eigen::Index>(predicted));
  }
  std::int64_t total() const { return counts_.sum(); }
  std::int64_t correct() const { return counts_.trace(); }
  const Counts& counts() const noexcept { return counts_; }

  bool operator==(const ConfusionMatrix& other) const { return counts_ == other.counts_; }

 private:
  Counts counts_;
};

double accuracy(const ConfusionMatrix& cm);

/// Chance-corrected agreement (p0 - pe) / (1 - pe). When pe = 1 the result
/// is 1 for perfect agreement and 0 otherwise.
double kappa(const ConfusionMatrix& cm);

struct TpFpRates {
  double tp_rate = 0.0;
  double fp_rate = 0.0;
};

TpFpRates tp_fp_rates(const ConfusionMatrix& cm, std::size_t positive);

/// sqrt(sum_i sum_j (p_ij - y_ij)^2 / (N * C)) with y the one-hot truth.
double rmse(std::span<const std::vector<double>> probabilities,
            std::span<const std::size_t> actual);

struct RocPoint {
  double fp_rate = 0.0;
  double tp_rate = 0.0;
  bool operator==(const RocPoint&) const = default;
};

/// Threshold sweep over the distinct scores in descending order, starting at
/// (0,0) and ending at (1,1). Equal scores form one step.
std::vector<RocPoint> roc_points(std::span<const double> scores, const std::vector<bool>& labels);

struct Prediction {
  std::size_t actual = 0;
  std::vector<double> probabilities;
  std::size_t predicted = 0;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t instances = 0;
  double accuracy = 0.0;
  double rmse = 0.0;
  double kappa = 0.0;
};

struct EvaluationReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double rmse = 0.0;
  double kappa = 0.0;
  std::vector<double> tp_rate;  // per class; NaN when undefined
  std::vector<double> fp_rate;
  std::size_t roc_positive = 0;
  std::vector<RocPoint> roc;
  double wall_time = 0.0;  // seconds
  std::vector<FoldResult> folds;
  std::vector<Prediction> predictions;
};

/// Pools predictions into one report; the ROC curve is one-vs-rest for
/// `positive` and is left empty when only one side is present.
EvaluationReport make_report(std::span<const Prediction> predictions, std::size_t classes,
                             std::size_t positive = 0);

FoldResult fold_result(std::size_t fold, std::span<const Prediction> predictions,
                       std::size_t classes);

/// One row per fold plus an "all" row. Timing is written only when asked
/// for so repeated runs stay byte-identical.
void write_report_csv(std::ostream& out, const EvaluationReport& report, bool with_timing = false);
nlohmann::json report_to_json(const EvaluationReport& report, bool with_timing = false);
void write_roc_csv(std::ostream& out, std::span<const RocPoint> points);

}  // namespace classbench
