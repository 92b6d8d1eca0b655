#include <gtest/gtest.h>

#include <cmath>

#include "scrabble_lab/bayesopt.hpp"

namespace scrabble_lab {
namespace {

GpHyper hyper1(double ell, double sf2, double sn2) { return {Eigen::VectorXd::Constant(1, ell), sf2, sn2}; }

BayesOptions options(int init, int iters, std::uint64_t seed, int workers = 1) {
  BayesOptions opt;
  opt.init_points = init;
  opt.iterations = iters;
  opt.seed = seed;
  opt.workers = workers;
  return opt;
}

Eigen::MatrixXd column(std::initializer_list<double> xs) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) X(i++, 0) = x;
  return X;
}

TEST(Gp, InterpolatesWithoutNoise) {
  auto m = gp_fit(column({0.5}), Eigen::VectorXd::Constant(1, 2.0), hyper1(0.3, 1.0, 0.0));
  auto p = gp_posterior(m, Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_NEAR(p.mean, 2.0, 1e-12);
  EXPECT_NEAR(p.variance, 0.0, 1e-8);

  Eigen::VectorXd y(4);
  y << 1.0, -0.5, 0.25, 2.0;
  auto X = column({0.0, 0.3, 0.6, 0.9});
  auto g = gp_fit(X, y, hyper1(0.25, 1.5, 0.0));
  for (int i = 0; i < 4; ++i) {
    auto q = gp_posterior(g, X.row(i).transpose());
    EXPECT_NEAR(q.mean, y(i), 1e-8);
    EXPECT_NEAR(q.variance, 0.0, 1e-8);
  }
}

TEST(Gp, DuplicatesAndFarPoints) {
  auto X = column({0.2, 0.2, 0.7});
  Eigen::VectorXd y(3);
  y << 1.0, 1.2, -1.0;
  EXPECT_NO_THROW(gp_fit(X, y, hyper1(0.2, 1.0, 1e-4)));
  auto noiseless = gp_fit(X, y, hyper1(0.2, 1.0, 0.0));
  EXPECT_GT(noiseless.jitter, 0.0);
  auto m = gp_fit(X, y, hyper1(0.2, 1.0, 1e-4));
  auto far = gp_posterior(m, Eigen::VectorXd::Constant(1, 50.0));
  EXPECT_NEAR(far.mean, y.mean(), 1e-6);
  EXPECT_NEAR(far.variance, 1.0, 1e-6);
  EXPECT_THROW(gp_fit(X, Eigen::VectorXd::Zero(2), hyper1(0.2, 1.0, 0.0)), std::invalid_argument);
}

// Direct-solve oracle: mean = mu + k^T (K + s I)^{-1} (y - mu), var = k(x,x) - k^T (K + s I)^{-1} k.
TEST(Gp, MatchesDirectSolve) {
  Rng rng(3);
  const int n = 7;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = uniform01(rng);
    y(i) = std::sin(6 * X(i, 0)) + 0.1 * uniform01(rng);
  }
  const double ell = 0.15, sf2 = 0.8, sn2 = 1e-3;
  auto m = gp_fit(X, y, hyper1(ell, sf2, sn2));
  auto k = [&](double a, double b) { return sf2 * std::exp(-0.5 * (a - b) * (a - b) / (ell * ell)); };
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = k(X(i, 0), X(j, 0)) + (i == j ? sn2 : 0.0);
  const Eigen::MatrixXd Kinv = K.fullPivLu().inverse();
  const double mu = y.mean();
  for (int g = 0; g <= 40; ++g) {
    const double x = -0.2 + 1.4 * g / 40.0;
    Eigen::VectorXd kx(n);
    for (int i = 0; i < n; ++i) kx(i) = k(X(i, 0), x);
    const double mean = mu + kx.dot(Kinv * (y.array() - mu).matrix());
    const double var = sf2 - kx.dot(Kinv * kx);
    auto p = gp_posterior(m, Eigen::VectorXd::Constant(1, x));
    EXPECT_NEAR(p.mean, mean, 1e-8);
    EXPECT_NEAR(p.variance, std::max(0.0, var), 1e-8);
  }
}

TEST(Gp, SymmetricDataGivesSymmetricPosterior) {
  auto X = column({-0.6, -0.2, 0.2, 0.6});
  Eigen::VectorXd y(4);
  y << 1.0, -0.3, -0.3, 1.0;
  auto m = gp_fit(X, y, hyper1(0.3, 1.0, 1e-3));
  for (double x : {0.05, 0.4, 0.9, 1.7}) {
    auto a = gp_posterior(m, Eigen::VectorXd::Constant(1, x));
    auto b = gp_posterior(m, Eigen::VectorXd::Constant(1, -x));
    EXPECT_NEAR(a.mean, b.mean, 1e-12);
    EXPECT_NEAR(a.variance, b.variance, 1e-12);
  }
}

TEST(Ei, ClosedFormCases) {
  EXPECT_EQ(expected_improvement(1.0, 0.0, 1.0), 0.0);
  EXPECT_EQ(expected_improvement(0.5, 0.0, 1.0), 0.5);
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 1.0), 0.8413447460685429 + 0.24197072451914337, 1e-12);
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 1.0), 1.0833, 1e-4);
  double prev = 0;
  for (double v : {0.01, 0.1, 1.0, 4.0}) {
    const double ei = expected_improvement(1.0, v, 1.0);
    EXPECT_GT(ei, prev);
    prev = ei;
  }
  EXPECT_LT(expected_improvement(0.0, 1.0, 1.0, 0.5), expected_improvement(0.0, 1.0, 1.0, 0.0));
}

TEST(Ei, NonNegativeOnRandomFits) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(uniform_below(rng, 8));
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = uniform01(rng);
      X(i, 1) = uniform01(rng);
      y(i) = 4 * uniform01(rng) - 2;
    }
    GpHyper h{Eigen::Vector2d(0.1 + uniform01(rng), 0.1 + uniform01(rng)), 0.5 + uniform01(rng), 0.0};
    auto m = gp_fit(X, y, h);
    for (int k = 0; k < 50; ++k) {
      Eigen::Vector2d x(1.5 * uniform01(rng) - 0.25, 1.5 * uniform01(rng) - 0.25);
      auto p = gp_posterior(m, x);
      EXPECT_GE(p.variance, 0.0);
      EXPECT_LE(p.variance, h.signal_var + 1e-9);
      EXPECT_GE(expected_improvement(m, x, y.minCoeff()), 0.0);
    }
    Eigen::Index best;
    y.minCoeff(&best);
    EXPECT_NEAR(expected_improvement(m, X.row(best).transpose(), y.minCoeff()), 0.0, 1e-6);
  }
}

TEST(BayesOpt, InitOnlyAndHistory) {
  auto f = [](const Eigen::VectorXd& x) { return (x(0) - 0.3) * (x(0) - 0.3); };
  auto r = bayesopt_run(f, {{0.0, 1.0}}, options(6, 0, 2));
  ASSERT_EQ(r.history.size(), 6u);
  double best = 1e9;
  for (const auto& h : r.history) best = std::min(best, h.y);
  EXPECT_EQ(r.best_y, best);
  // One point per stratum of the Latin hypercube.
  std::vector<int> strata(6, 0);
  for (const auto& h : r.history) ++strata[static_cast<std::size_t>(h.x(0) * 6)];
  for (int c : strata) EXPECT_EQ(c, 1);

  auto full = bayesopt_run(f, {{0.0, 1.0}}, options(5, 10, 2));
  EXPECT_EQ(full.history.size(), 15u);
  for (std::size_t i = 1; i < full.history.size(); ++i) EXPECT_LE(full.history[i].best_y, full.history[i - 1].best_y);
  auto again = bayesopt_run(f, {{0.0, 1.0}}, options(5, 10, 2, 3));
  EXPECT_EQ(again.best_x, full.best_x);
  EXPECT_THROW(bayesopt_run(f, {{1.0, 0.0}}), std::invalid_argument);
}

TEST(BayesOpt, FindsTwoDimensionalMinimum) {
  auto f = [](const Eigen::VectorXd& x) { return (x(0) - 1.0) * (x(0) - 1.0) + 2 * (x(1) + 0.5) * (x(1) + 0.5); };
  auto r = bayesopt_run(f, {{-2.0, 2.0}, {-2.0, 2.0}}, options(8, 30, 5));
  EXPECT_LT(r.best_y, 0.05);
}

}  // namespace
}  // namespace scrabble_lab
