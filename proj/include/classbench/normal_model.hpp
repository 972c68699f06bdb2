#pragma once

// Multivariate normal model with arbitrary missingness: EM for the MLE and
// one data-augmentation step (conditional draw of the missing cells followed
// by a posterior draw of mean and covariance).

#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "classbench/random.hpp"

namespace classbench {

template <typename Scalar>
struct NormalModel {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> covariance;

  Eigen::Index dimension() const { return mean.size(); }
};

struct EmOptions {
  double tolerance = 1e-6;
  std::size_t max_iterations = 1000;
};

template <typename Scalar>
struct EmResult {
  NormalModel<Scalar> model;
  std::size_t iterations = 0;
  /// Observed-data log-likelihood at the start of each iteration.
  std::vector<Scalar> log_likelihood;
  bool ridge_applied = false;
};

class EmNotConverged : public std::runtime_error {
 public:
  EmNotConverged(std::size_t iterations, NormalModel<double> last)
      : std::runtime_error("EM did not converge within " + std::to_string(iterations) +
                           " iterations"),
        last_(std::move(last)) {}
  const NormalModel<double>& last_state() const noexcept { return last_; }

 private:
  NormalModel<double> last_;
};

namespace detail {

/// Rows grouped by which coordinates are observed, in first-appearance order.
struct MissingPattern {
  std::vector<Eigen::Index> observed;
  std::vector<Eigen::Index> missing;
  std::vector<Eigen::Index> rows;
};

template <typename Derived>
std::vector<MissingPattern> missing_patterns(const Eigen::MatrixBase<Derived>& x) {
  std::vector<MissingPattern> patterns;
  std::map<std::vector<bool>, std::size_t> index;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::vector<bool> mask(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      mask[static_cast<std::size_t>(c)] = !std::isnan(static_cast<double>(x(r, c)));
    auto [it, inserted] = index.try_emplace(mask, patterns.size());
    if (inserted) {
      MissingPattern p;
      for (Eigen::Index c = 0; c < x.cols(); ++c)
        (mask[static_cast<std::size_t>(c)] ? p.observed : p.missing).push_back(c);
      patterns.push_back(std::move(p));
    }
    patterns[it->second].rows.push_back(r);
  }
  return patterns;
}

template <typename Scalar>
using DynMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DynVec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
DynMat<Scalar> block(const DynMat<Scalar>& m, const std::vector<Eigen::Index>& rows,
                     const std::vector<Eigen::Index>& cols) {
  DynMat<Scalar> out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
  return out;
}

/// Cholesky factor of a symmetric matrix; on failure adds
/// lambda * I with lambda = 1e-8 * trace / p, growing tenfold until it succeeds.
template <typename Scalar>
Eigen::LLT<DynMat<Scalar>> robust_llt(DynMat<Scalar> m, bool& ridged, const char* what) {
  Eigen::LLT<DynMat<Scalar>> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  const auto p = static_cast<Scalar>(m.rows());
  Scalar lambda = Scalar(1e-8) * std::abs(m.trace()) / p;
  if (!(lambda > Scalar(0))) lambda = Scalar(1e-8);
  for (int attempt = 0; attempt < 40; ++attempt) {
    m.diagonal().array() += lambda;
    llt.compute(m);
    if (llt.info() == Eigen::Success) {
      if (!ridged) std::clog << "warning: " << what << " not positive definite; ridge applied\n";
      ridged = true;
      return llt;
    }
    lambda *= Scalar(10);
  }
  throw std::runtime_error(std::string(what) + " could not be repaired to positive definite");
}

/// Conditional distribution of the missing coordinates given the observed ones:
/// mean = mu_M + coef * (x_O - mu_O), covariance = Sigma_MM - coef * Sigma_OM.
template <typename Scalar>
struct Conditional {
  DynMat<Scalar> coef;
  DynMat<Scalar> covariance;
  Eigen::LLT<DynMat<Scalar>> observed_llt;
  Scalar observed_logdet = 0;
};

template <typename Scalar>
Conditional<Scalar> conditional(const NormalModel<Scalar>& model, const MissingPattern& p,
                                bool& ridged) {
  Conditional<Scalar> out;
  const auto& S = model.covariance;
  if (p.observed.empty()) {
    out.covariance = block(S, p.missing, p.missing);
    return out;
  }
  out.observed_llt = robust_llt<Scalar>(block(S, p.observed, p.observed), ridged,
                                        "observed-block covariance");
  const auto L = out.observed_llt.matrixL();
  out.observed_logdet = Scalar(2) * L.toDenseMatrix().diagonal().array().log().sum();
  if (p.missing.empty()) return out;
  const DynMat<Scalar> cross = block(S, p.observed, p.missing);  // Sigma_OM
  out.coef = out.observed_llt.solve(cross).transpose();
  out.covariance = block(S, p.missing, p.missing) - out.coef * cross;
  out.covariance = Scalar(0.5) * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

}  // namespace detail

/// Maximum-likelihood mean and covariance (1/N) of a normal sample whose
/// missing entries are NaN. Starts from observed means and variances.
template <typename Scalar, typename Derived>
EmResult<Scalar> em_mle(const Eigen::MatrixBase<Derived>& x, const EmOptions& options = {}) {
  using Mat = detail::DynMat<Scalar>;
  using Vec = detail::DynVec<Scalar>;
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n == 0 || p == 0) throw std::invalid_argument("em_mle: empty data matrix");
  const auto patterns = detail::missing_patterns(x);

  EmResult<Scalar> result;
  auto& model = result.model;
  model.mean = Vec::Zero(p);
  model.covariance = Mat::Zero(p, p);
  for (Eigen::Index c = 0; c < p; ++c) {
    Scalar sum(0), sq(0);
    Eigen::Index count = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto v = static_cast<Scalar>(x(r, c));
      if (std::isnan(static_cast<double>(v))) continue;
      sum += v;
      sq += v * v;
      ++count;
    }
    if (count == 0)
      throw std::invalid_argument("em_mle: column " + std::to_string(c) + " has no observed value");
    model.mean(c) = sum / static_cast<Scalar>(count);
    const Scalar var = sq / static_cast<Scalar>(count) - model.mean(c) * model.mean(c);
    model.covariance(c, c) = var > Scalar(0) ? var : Scalar(1);
  }

  const Scalar log2pi = static_cast<Scalar>(std::log(2.0 * std::numbers::pi));
  for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
    Vec t1 = Vec::Zero(p);
    Mat t2 = Mat::Zero(p, p);
    Scalar loglik(0);
    for (const auto& pat : patterns) {
      const auto cond = detail::conditional(model, pat, result.ridge_applied);
      const auto no = static_cast<Eigen::Index>(pat.observed.size());
      Vec mu_o(no);
      for (Eigen::Index i = 0; i < no; ++i) mu_o(i) = model.mean(pat.observed[static_cast<std::size_t>(i)]);
      for (auto r : pat.rows) {
        Vec xhat(p);
        Vec dev(no);
        for (Eigen::Index i = 0; i < no; ++i) {
          const auto c = pat.observed[static_cast<std::size_t>(i)];
          xhat(c) = static_cast<Scalar>(x(r, c));
          dev(i) = xhat(c) - mu_o(i);
        }
        if (no > 0)
          loglik -= Scalar(0.5) * (static_cast<Scalar>(no) * log2pi + cond.observed_logdet +
                                   dev.dot(cond.observed_llt.solve(dev)));
        if (!pat.missing.empty()) {
          Vec cm = no > 0 ? Vec(cond.coef * dev) : Vec::Zero(static_cast<Eigen::Index>(pat.missing.size()));
          for (std::size_t j = 0; j < pat.missing.size(); ++j)
            xhat(pat.missing[j]) = model.mean(pat.missing[j]) + cm(static_cast<Eigen::Index>(j));
        }
        t1 += xhat;
        t2.noalias() += xhat * xhat.transpose();
        for (std::size_t a = 0; a < pat.missing.size(); ++a)
          for (std::size_t b = 0; b < pat.missing.size(); ++b)
            t2(pat.missing[a], pat.missing[b]) +=
                cond.covariance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      }
    }
    result.log_likelihood.push_back(loglik);

    const Vec mean = t1 / static_cast<Scalar>(n);
    Mat cov = t2 / static_cast<Scalar>(n) - mean * mean.transpose();
    cov = Scalar(0.5) * (cov + cov.transpose()).eval();
    const Scalar dmu = (mean - model.mean).cwiseAbs().maxCoeff();
    const Scalar dsigma = (cov - model.covariance).cwiseAbs().maxCoeff();
    model.mean = mean;
    model.covariance = cov;
    result.iterations = iter;
    if (dmu < options.tolerance && dsigma < options.tolerance) return result;
  }
  NormalModel<double> last{model.mean.template cast<double>(),
                           model.covariance.template cast<double>()};
  throw EmNotConverged(options.max_iterations, std::move(last));
}

template <typename Scalar>
struct DaResult {
  NormalModel<Scalar> model;
  detail::DynMat<Scalar> completed;
};

/// Draws W ~ InverseWishart(df, scale) by the Bartlett decomposition.
template <typename Scalar>
detail::DynMat<Scalar> draw_inverse_wishart(const detail::DynMat<Scalar>& scale, double df, Rng& rng,
                                            bool& ridged) {
  using Mat = detail::DynMat<Scalar>;
  const Eigen::Index p = scale.rows();
  if (df < static_cast<double>(p))
    throw std::invalid_argument("inverse-Wishart degrees of freedom below dimension");
  // scale = U U^T, Sigma = (U A^-T)(U A^-T)^T with A the Bartlett factor
  const auto llt = detail::robust_llt<Scalar>(scale, ridged, "scatter matrix");
  const Mat U = llt.matrixL();
  Mat A = Mat::Zero(p, p);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < p; ++i) {
    std::chi_squared_distribution<double> chi2(df - static_cast<double>(i));
    A(i, i) = static_cast<Scalar>(std::sqrt(chi2(rng)));
    for (Eigen::Index j = 0; j < i; ++j) A(i, j) = static_cast<Scalar>(normal(rng));
  }
  const Mat t = A.template triangularView<Eigen::Lower>().solve(U.transpose()).transpose();
  Mat sigma = t * t.transpose();
  return Scalar(0.5) * (sigma + sigma.transpose());
}

/// One data-augmentation iteration. I-step: each row's missing coordinates
/// are drawn from their conditional normal under `model`. P-step: Sigma is
/// drawn from InverseWishart(N-1, S) and mu from Normal(mean, Sigma/N) given
/// the completed data (S its centred scatter matrix).
template <typename Scalar, typename Derived>
DaResult<Scalar> da_step(const NormalModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x,
                         Rng& rng) {
  using Mat = detail::DynMat<Scalar>;
  using Vec = detail::DynVec<Scalar>;
  const Eigen::Index n = x.rows(), p = x.cols();
  if (model.dimension() != p) throw std::invalid_argument("da_step: model dimension mismatch");
  bool ridged = false;
  DaResult<Scalar> out;
  out.completed = x.template cast<Scalar>();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& pat : detail::missing_patterns(x)) {
    if (pat.missing.empty()) continue;
    const auto cond = detail::conditional(model, pat, ridged);
    const Mat L = detail::robust_llt<Scalar>(cond.covariance, ridged, "conditional covariance")
                      .matrixL();
    const auto nm = static_cast<Eigen::Index>(pat.missing.size());
    const auto no = static_cast<Eigen::Index>(pat.observed.size());
    for (auto r : pat.rows) {
      Vec mean(nm);
      for (Eigen::Index j = 0; j < nm; ++j) mean(j) = model.mean(pat.missing[static_cast<std::size_t>(j)]);
      if (no > 0) {
        Vec dev(no);
        for (Eigen::Index i = 0; i < no; ++i) {
          const auto c = pat.observed[static_cast<std::size_t>(i)];
          dev(i) = out.completed(r, c) - model.mean(c);
        }
        mean += cond.coef * dev;
      }
      Vec z(nm);
      for (Eigen::Index j = 0; j < nm; ++j) z(j) = static_cast<Scalar>(normal(rng));
      const Vec draw = mean + L * z;
      for (Eigen::Index j = 0; j < nm; ++j) out.completed(r, pat.missing[static_cast<std::size_t>(j)]) = draw(j);
    }
  }

  const Vec ybar = out.completed.colwise().mean().transpose();
  const Mat centred = out.completed.rowwise() - ybar.transpose();
  const Mat scatter = centred.transpose() * centred;
  out.model.covariance =
      draw_inverse_wishart<Scalar>(scatter, static_cast<double>(n - 1), rng, ridged);
  const auto llt = detail::robust_llt<Scalar>(out.model.covariance / static_cast<Scalar>(n), ridged,
                                              "posterior mean covariance");
  Vec z(p);
  for (Eigen::Index j = 0; j < p; ++j) z(j) = static_cast<Scalar>(normal(rng));
  out.model.mean = ybar + Mat(llt.matrixL()) * z;
  return out;
}

}  // namespace classbench
