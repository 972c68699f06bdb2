#include "classbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "classbench/data.hpp"

namespace classbench {

ConfusionMatrix::ConfusionMatrix(std::size_t classes)
    : counts_(Counts::Zero(static_cast<Eigen::Index>(classes),
                           static_cast<Eigen::Index>(classes))) {}

ConfusionMatrix::ConfusionMatrix(Counts counts) : counts_(std::move(counts)) {
  if (counts_.rows() != counts_.cols()) throw MetricError("confusion matrix must be square");
  if ((counts_.array() < 0).any()) throw MetricError("confusion counts must be nonnegative");
}

void ConfusionMatrix::add(std::size_t actual, std::size_t predicted, std::int64_t count) {
  if (actual >= classes() || predicted >= classes())
    throw MetricError("class index out of range for confusion matrix");
  counts_(static_cast<Eigen::Index>(actual), static_cast<Eigen::Index>(predicted)) += count;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.classes() != classes()) throw MetricError("confusion matrix sizes differ");
  counts_ += other.counts_;
  return *this;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total <= 0) throw MetricError("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.correct()) / static_cast<double>(total);
}

double kappa(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total <= 0) throw MetricError("kappa of an empty confusion matrix");
  const double n = static_cast<double>(total);
  const double p0 = static_cast<double>(cm.correct()) / n;
  const auto rows = cm.counts().rowwise().sum();
  const auto cols = cm.counts().colwise().sum();
  double chance = 0.0;
  for (Eigen::Index j = 0; j < rows.size(); ++j)
    chance += static_cast<double>(rows(j)) * static_cast<double>(cols(j));
  const double pe = chance / (n * n);
  if (pe == 1.0) return p0 == 1.0 ? 1.0 : 0.0;
  return (p0 - pe) / (1.0 - pe);
}

TpFpRates tp_fp_rates(const ConfusionMatrix& cm, std::size_t positive) {
  if (positive >= cm.classes()) throw MetricError("positive class out of range");
  const auto p = static_cast<Eigen::Index>(positive);
  const auto& c = cm.counts();
  const double tp = static_cast<double>(c(p, p));
  const double fn = static_cast<double>(c.row(p).sum()) - tp;
  const double fp = static_cast<double>(c.col(p).sum()) - tp;
  const double tn = static_cast<double>(cm.total()) - tp - fn - fp;
  if (tp + fn == 0.0) throw MetricError("TP+FN is zero: positive class has no actual instances");
  if (fp + tn == 0.0) throw MetricError("FP+TN is zero: no actual negative instances");
  return {tp / (tp + fn), fp / (fp + tn)};
}

double rmse(std::span<const std::vector<double>> probabilities,
            std::span<const std::size_t> actual) {
  if (probabilities.size() != actual.size())
    throw MetricError("rmse: " + std::to_string(probabilities.size()) + " predictions for " +
                      std::to_string(actual.size()) + " labels");
  if (actual.empty()) throw MetricError("rmse of zero predictions");
  const std::size_t classes = probabilities.front().size();
  if (classes == 0) throw MetricError("rmse: empty probability vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (probabilities[i].size() != classes) throw MetricError("rmse: ragged probability vectors");
    if (actual[i] >= classes) throw MetricError("rmse: label out of range");
    for (std::size_t j = 0; j < classes; ++j) {
      const double err = probabilities[i][j] - (j == actual[i] ? 1.0 : 0.0);
      sum += err * err;
    }
  }
  return std::sqrt(sum / static_cast<double>(actual.size() * classes));
}

std::vector<RocPoint> roc_points(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw MetricError("roc: scores and labels differ in length");
  const auto positives = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  const auto negatives = static_cast<double>(labels.size()) - positives;
  if (positives == 0 || negatives == 0)
    throw MetricError("roc: labels must contain both positive and negative instances");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> points{{0.0, 0.0}};
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i)
      (labels[order[i]] ? tp : fp) += 1.0;
    points.push_back({fp / negatives, tp / positives});
  }
  return points;
}

FoldResult fold_result(std::size_t fold, std::span<const Prediction> predictions,
                       std::size_t classes) {
  ConfusionMatrix cm(classes);
  std::vector<std::vector<double>> probs;
  std::vector<std::size_t> actual;
  for (const auto& p : predictions) {
    cm.add(p.actual, p.predicted);
    probs.push_back(p.probabilities);
    actual.push_back(p.actual);
  }
  return {fold, predictions.size(), accuracy(cm), rmse(probs, actual), kappa(cm)};
}

EvaluationReport make_report(std::span<const Prediction> predictions, std::size_t classes,
                             std::size_t positive) {
  EvaluationReport report;
  report.confusion = ConfusionMatrix(classes);
  std::vector<std::vector<double>> probs;
  std::vector<std::size_t> actual;
  std::vector<double> scores;
  std::vector<bool> labels;
  for (const auto& p : predictions) {
    report.confusion.add(p.actual, p.predicted);
    probs.push_back(p.probabilities);
    actual.push_back(p.actual);
    scores.push_back(p.probabilities.at(positive));
    labels.push_back(p.actual == positive);
  }
  report.accuracy = accuracy(report.confusion);
  report.rmse = rmse(probs, actual);
  report.kappa = kappa(report.confusion);
  for (std::size_t c = 0; c < classes; ++c) {
    double tp = std::numeric_limits<double>::quiet_NaN(), fp = tp;
    try {
      const auto r = tp_fp_rates(report.confusion, c);
      tp = r.tp_rate;
      fp = r.fp_rate;
    } catch (const MetricError&) {
      // class absent from the evaluated instances
    }
    report.tp_rate.push_back(tp);
    report.fp_rate.push_back(fp);
  }
  report.roc_positive = positive;
  const bool both = std::find(labels.begin(), labels.end(), true) != labels.end() &&
                    std::find(labels.begin(), labels.end(), false) != labels.end();
  if (both) report.roc = roc_points(scores, labels);
  report.predictions.assign(predictions.begin(), predictions.end());
  return report;
}

void write_report_csv(std::ostream& out, const EvaluationReport& report, bool with_timing) {
  out << "fold,instances,accuracy,rmse,kappa" << (with_timing ? ",wall_time" : "") << '\n';
  for (const auto& f : report.folds) {
    out << f.fold << ',' << f.instances << ',' << format_number(f.accuracy) << ','
        << format_number(f.rmse) << ',' << format_number(f.kappa) << (with_timing ? "," : "")
        << '\n';
  }
  out << "all," << report.confusion.total() << ',' << format_number(report.accuracy) << ','
      << format_number(report.rmse) << ',' << format_number(report.kappa);
  if (with_timing) out << ',' << format_number(report.wall_time);
  out << '\n';
}

nlohmann::json report_to_json(const EvaluationReport& report, bool with_timing) {
  nlohmann::json j;
  j["instances"] = report.confusion.total();
  j["accuracy"] = report.accuracy;
  j["rmse"] = report.rmse;
  j["kappa"] = report.kappa;
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < report.confusion.counts().rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < report.confusion.counts().cols(); ++c)
      row.push_back(report.confusion.counts()(r, c));
    rows.push_back(std::move(row));
  }
  j["confusion"] = std::move(rows);
  auto nan_to_null = [](const std::vector<double>& v) {
    auto a = nlohmann::json::array();
    for (double x : v) a.push_back(std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x));
    return a;
  };
  j["tp_rate"] = nan_to_null(report.tp_rate);
  j["fp_rate"] = nan_to_null(report.fp_rate);
  j["roc_positive"] = report.roc_positive;
  auto roc = nlohmann::json::array();
  for (const auto& p : report.roc) roc.push_back({p.fp_rate, p.tp_rate});
  j["roc"] = std::move(roc);
  auto folds = nlohmann::json::array();
  for (const auto& f : report.folds)
    folds.push_back({{"fold", f.fold},
                     {"instances", f.instances},
                     {"accuracy", f.accuracy},
                     {"rmse", f.rmse},
                     {"kappa", f.kappa}});
  j["folds"] = std::move(folds);
  if (with_timing) j["wall_time"] = report.wall_time;
  return j;
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> points) {
  out << "fp_rate,tp_rate\n";
  for (const auto& p : points) out << format_number(p.fp_rate) << ',' << format_number(p.tp_rate) << '\n';
}

}  // namespace classbench
