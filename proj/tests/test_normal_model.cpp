#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "classbench/normal_model.hpp"

using namespace classbench;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd correlated_sample(Rng& rng, Eigen::Index n, const Eigen::Vector2d& mu, double rho) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd x(n, 2);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double a = z(rng), b = z(rng);
    x(r, 0) = mu(0) + a;
    x(r, 1) = mu(1) + rho * a + std::sqrt(1 - rho * rho) * b;
  }
  return x;
}

}  // namespace

TEST(EmMle, CompleteDataIsSampleMoments) {
  Rng rng(1);
  const Eigen::MatrixXd x = correlated_sample(rng, 50, {1.0, -2.0}, 0.6);
  const Eigen::VectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = c.transpose() * c / 50.0;
  const auto res = em_mle<double>(x);
  EXPECT_TRUE(res.model.mean.isApprox(mean, 1e-12));
  EXPECT_TRUE(res.model.covariance.isApprox(cov, 1e-12));
  // the first iteration already lands on the answer
  try {
    em_mle<double>(x, EmOptions{1e-300, 1});
    FAIL();
  } catch (const EmNotConverged& e) {
    EXPECT_TRUE(e.last_state().mean.isApprox(mean, 1e-12));
    EXPECT_TRUE(e.last_state().covariance.isApprox(cov, 1e-12));
  }
}

TEST(EmMle, UnivariateIgnoresMissingRows) {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, kNaN, 3;
  const auto res = em_mle<double>(x);
  EXPECT_NEAR(res.model.mean(0), 2.0, 1e-12);
  EXPECT_NEAR(res.model.covariance(0, 0), 2.0 / 3.0, 1e-9);
}

TEST(EmMle, MonotonePatternMatchesFactoredLikelihood) {
  Rng rng(8);
  Eigen::MatrixXd x = correlated_sample(rng, 200, {0.5, 1.5}, 0.7);
  std::bernoulli_distribution drop(0.3);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    if (drop(rng)) x(r, 1) = kNaN;

  // closed form: marginal of x1 on all rows, regression of x2 on x1 on complete rows
  const Eigen::Index n = x.rows();
  const double mu1 = x.col(0).mean();
  const double s11 = (x.col(0).array() - mu1).square().sum() / static_cast<double>(n);
  double m1 = 0, m2 = 0;
  Eigen::Index nc = 0;
  for (Eigen::Index r = 0; r < n; ++r)
    if (!std::isnan(x(r, 1))) {
      m1 += x(r, 0);
      m2 += x(r, 1);
      ++nc;
    }
  m1 /= static_cast<double>(nc);
  m2 /= static_cast<double>(nc);
  double c11 = 0, c12 = 0, c22 = 0;
  for (Eigen::Index r = 0; r < n; ++r)
    if (!std::isnan(x(r, 1))) {
      c11 += (x(r, 0) - m1) * (x(r, 0) - m1);
      c12 += (x(r, 0) - m1) * (x(r, 1) - m2);
      c22 += (x(r, 1) - m2) * (x(r, 1) - m2);
    }
  const double beta = c12 / c11;
  const double alpha = m2 - beta * m1;
  const double resid = (c22 - beta * c12) / static_cast<double>(nc);
  const double mu2 = alpha + beta * mu1;
  const double s12 = beta * s11;
  const double s22 = resid + beta * beta * s11;

  const auto res = em_mle<double>(x, EmOptions{1e-12, 10000});
  EXPECT_NEAR(res.model.mean(0), mu1, 1e-9);
  EXPECT_NEAR(res.model.mean(1), mu2, 1e-9);
  EXPECT_NEAR(res.model.covariance(0, 0), s11, 1e-9);
  EXPECT_NEAR(res.model.covariance(0, 1), s12, 1e-9);
  EXPECT_NEAR(res.model.covariance(1, 1), s22, 1e-9);
}

TEST(EmMle, LogLikelihoodNeverDecreases) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::bernoulli_distribution drop(0.25);
    Eigen::MatrixXd x(80, 4);
    for (Eigen::Index r = 0; r < 80; ++r) {
      const double common = z(rng);
      for (Eigen::Index c = 0; c < 4; ++c) x(r, c) = common * (c + 1) * 0.5 + z(rng);
      for (Eigen::Index c = 0; c < 4; ++c)
        if (drop(rng) && c != r % 4) x(r, c) = kNaN;
    }
    const auto res = em_mle<double>(x, EmOptions{1e-10, 5000});
    ASSERT_GE(res.log_likelihood.size(), 2u);
    for (std::size_t i = 1; i < res.log_likelihood.size(); ++i)
      EXPECT_GE(res.log_likelihood[i], res.log_likelihood[i - 1] - 1e-9) << "seed " << seed;
  }
}

TEST(EmMle, NonConvergenceCarriesLastState) {
  Rng rng(4);
  Eigen::MatrixXd x = correlated_sample(rng, 100, {0, 0}, 0.9);
  for (Eigen::Index r = 0; r < 50; ++r) x(r, 1) = kNaN;
  try {
    em_mle<double>(x, EmOptions{1e-14, 2});
    FAIL();
  } catch (const EmNotConverged& e) {
    EXPECT_EQ(e.last_state().dimension(), 2);
    EXPECT_TRUE(e.last_state().mean.allFinite());
  }
}

TEST(EmMle, SingularCovarianceGetsRidge) {
  // third column is an exact copy of the first
  Eigen::MatrixXd x(8, 3);
  x << 1, 0.5, 1, 2, 0.1, 2, 3, 0.7, 3, 4, 0.2, 4, 5, 0.9, 5, 6, 0.3, 6, 7, 0.4, 7, 8, kNaN, 8;
  const auto res = em_mle<double>(x, EmOptions{1e-6, 5000});
  EXPECT_TRUE(res.ridge_applied);
  EXPECT_TRUE(res.model.mean.allFinite());
}

TEST(EmMle, LongDoubleAgreesWithDouble) {
  Rng rng(21);
  Eigen::MatrixXd x = correlated_sample(rng, 60, {1, 2}, 0.5);
  for (Eigen::Index r = 0; r < 60; r += 3) x(r, r % 2) = kNaN;
  const auto d = em_mle<double>(x, EmOptions{1e-12, 10000});
  const auto l = em_mle<long double>(x, EmOptions{1e-12, 10000});
  EXPECT_TRUE(d.model.mean.isApprox(l.model.mean.cast<double>(), 1e-9));
}

TEST(DaStep, NoMissingKeepsData) {
  Rng data_rng(2);
  const Eigen::MatrixXd x = correlated_sample(data_rng, 30, {0, 0}, 0.3);
  const auto start = em_mle<double>(x).model;
  Rng rng(5);
  const auto out = da_step(start, x, rng);
  EXPECT_EQ(out.completed, x);
  EXPECT_FALSE(out.model.mean.isApprox(start.mean, 1e-14));
}

TEST(DaStep, DiagonalModelDrawsFromMarginals) {
  NormalModel<double> model{Eigen::Vector2d(1.0, -1.0), Eigen::Vector2d(1.0, 4.0).asDiagonal()};
  const Eigen::Index n = 10000;
  Eigen::MatrixXd x(n, 2);
  for (Eigen::Index r = 0; r < n; ++r) {
    x(r, 0) = kNaN;
    x(r, 1) = r % 2 ? kNaN : 3.0;
  }
  Rng rng(77);
  const auto out = da_step(model, x, rng);
  const Eigen::VectorXd c0 = out.completed.col(0);
  const double mean0 = c0.mean();
  const double var0 = (c0.array() - mean0).square().sum() / (n - 1);
  EXPECT_NEAR(mean0, 1.0, 4 * std::sqrt(1.0 / n));
  EXPECT_NEAR(var0, 1.0, 4 * std::sqrt(2.0 / (n - 1)));
  std::vector<double> drawn;
  for (Eigen::Index r = 1; r < n; r += 2) drawn.push_back(out.completed(r, 1));
  double m = 0, v = 0;
  for (double d : drawn) m += d;
  m /= static_cast<double>(drawn.size());
  for (double d : drawn) v += (d - m) * (d - m);
  v /= static_cast<double>(drawn.size() - 1);
  const double k = static_cast<double>(drawn.size());
  EXPECT_NEAR(m, -1.0, 4 * std::sqrt(4.0 / k));
  EXPECT_NEAR(v, 4.0, 4 * 4.0 * std::sqrt(2.0 / (k - 1)));
}

TEST(DaStep, FixedSeedIsBitIdentical) {
  Rng data_rng(3);
  Eigen::MatrixXd x = correlated_sample(data_rng, 40, {0, 1}, 0.4);
  for (Eigen::Index r = 0; r < 40; r += 4) x(r, 1) = kNaN;
  const auto model = em_mle<double>(x).model;
  Rng a(9), b(9);
  const auto ra = da_step(model, x, a);
  const auto rb = da_step(model, x, b);
  EXPECT_EQ(ra.completed, rb.completed);
  EXPECT_EQ(ra.model.mean, rb.model.mean);
  EXPECT_EQ(ra.model.covariance, rb.model.covariance);
}

TEST(InverseWishart, MonteCarloMean) {
  Eigen::Matrix2d scale;
  scale << 4.0, 1.0, 1.0, 2.0;
  const double df = 12.0;
  Rng rng(31);
  bool ridged = false;
  Eigen::Matrix2d sum = Eigen::Matrix2d::Zero();
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) sum += draw_inverse_wishart<double>(scale, df, rng, ridged);
  const Eigen::Matrix2d expected = scale / (df - 2 - 1);
  EXPECT_TRUE((sum / draws - expected).cwiseAbs().maxCoeff() < 0.03 * expected.maxCoeff());
  EXPECT_FALSE(ridged);
}
