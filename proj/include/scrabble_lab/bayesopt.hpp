#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "scrabble_lab/parallel.hpp"
#include "scrabble_lab/rng.hpp"

namespace scrabble_lab {

struct GpHyper {
  Eigen::VectorXd lengthscales;  // one per dimension
  double signal_var = 1.0;
  double noise_var = 1e-6;
};

/// Squared-exponential GP with constant prior mean equal to the sample mean.
struct GpModel {
  Eigen::MatrixXd X;  // n x d
  Eigen::VectorXd y;
  GpHyper hyper;
  double prior_mean = 0;
  double jitter = 0;  // added to the diagonal beyond noise_var
  Eigen::LLT<Eigen::MatrixXd> chol;
  Eigen::VectorXd alpha;

  double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return hyper.signal_var * std::exp(-0.5 * (a - b).cwiseQuotient(hyper.lengthscales).squaredNorm());
  }
};

inline GpModel gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpHyper& hyper) {
  const auto n = X.rows();
  if (n < 1 || y.size() != n) throw std::invalid_argument("gp_fit needs n >= 1 points with one target each");
  if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("gp_fit needs finite data");
  if (hyper.lengthscales.size() != X.cols() || (hyper.lengthscales.array() <= 0).any())
    throw std::invalid_argument("gp_fit needs one positive lengthscale per dimension");
  if (!(hyper.signal_var > 0) || hyper.noise_var < 0) throw std::invalid_argument("gp_fit needs signal_var > 0, noise_var >= 0");
  GpModel m;
  m.X = X;
  m.y = y;
  m.hyper = hyper;
  m.prior_mean = y.mean();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) K(i, j) = K(j, i) = m.kernel(X.row(i).transpose(), X.row(j).transpose());
  K.diagonal().array() += hyper.noise_var;
  for (double jitter = 0.0;; jitter = jitter == 0.0 ? 1e-12 * hyper.signal_var : jitter * 10) {
    if (jitter > 1e-2 * hyper.signal_var) throw std::runtime_error("gp_fit: gram matrix not positive definite");
    Eigen::MatrixXd A = K;
    A.diagonal().array() += jitter;
    m.chol.compute(A);
    if (m.chol.info() == Eigen::Success) {
      m.jitter = jitter;
      break;
    }
  }
  m.alpha = m.chol.solve((y.array() - m.prior_mean).matrix());
  return m;
}

struct Posterior {
  double mean = 0;
  double variance = 0;
};

/// Predictive mean and latent variance. Variances within cancellation error
/// of zero (1e-12 of the signal variance) are reported as exactly 0.
inline Posterior gp_posterior(const GpModel& m, const Eigen::VectorXd& x) {
  Eigen::VectorXd k(m.X.rows());
  for (Eigen::Index i = 0; i < m.X.rows(); ++i) k(i) = m.kernel(m.X.row(i).transpose(), x);
  const Eigen::VectorXd v = m.chol.matrixL().solve(k);
  const double var = m.hyper.signal_var - v.squaredNorm();
  return {m.prior_mean + k.dot(m.alpha), var > 1e-12 * m.hyper.signal_var ? var : 0.0};
}

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Expected improvement below best_y - xi (minimization).
inline double expected_improvement(double mean, double variance, double best_y, double xi = 0.0) {
  const double gain = best_y - xi - mean;
  if (!(variance > 0.0)) return std::max(gain, 0.0);
  const double sd = std::sqrt(variance);
  const double z = gain / sd;
  return std::max(0.0, gain * normal_cdf(z) + sd * normal_pdf(z));
}

inline double expected_improvement(const GpModel& m, const Eigen::VectorXd& x, double best_y, double xi = 0.0) {
  const auto p = gp_posterior(m, x);
  return expected_improvement(p.mean, p.variance, best_y, xi);
}

struct BayesOptions {
  int init_points = 5;
  int iterations = 30;
  std::size_t candidate_pool = 2048;
  std::uint64_t seed = 0;
  double lengthscale = 0.2;           // in box-normalized [0, 1] units
  std::optional<double> signal_var;   // sample variance of y when unset
  double noise_ratio = 1e-2;          // noise_var / signal_var
  double xi = 0.0;
  int workers = 1;                    // parallel EI over the candidate pool
  std::function<void(const nlohmann::json&)> on_iteration;
};

struct BayesStep {
  int iter = 0;
  Eigen::VectorXd x;
  double y = 0;
  double best_y = 0;
};

struct BayesResult {
  Eigen::VectorXd best_x;
  double best_y = 0;
  std::vector<BayesStep> history;
};

/// d points by Latin hypercube sampling in the unit cube.
inline Eigen::MatrixXd latin_hypercube(int n, int d, Rng& rng) {
  Eigen::MatrixXd U(n, d);
  for (int j = 0; j < d; ++j) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = n; i > 1; --i) std::swap(perm[static_cast<std::size_t>(i - 1)], perm[uniform_below(rng, static_cast<std::uint64_t>(i))]);
    for (int i = 0; i < n; ++i) U(i, j) = (perm[static_cast<std::size_t>(i)] + uniform01(rng)) / n;
  }
  return U;
}

inline nlohmann::json bayes_step_to_json(const BayesStep& s) {
  return {{"iter", s.iter}, {"x", std::vector<double>(s.x.data(), s.x.data() + s.x.size())}, {"y", s.y}, {"best_y", s.best_y}};
}

/// Minimizes `objective` over the box: Latin-hypercube start, then each step
/// evaluates the candidate-pool point of largest expected improvement.
inline BayesResult bayesopt_run(const std::function<double(const Eigen::VectorXd&)>& objective,
                                const std::vector<std::pair<double, double>>& bounds, const BayesOptions& opt = {}) {
  const int d = static_cast<int>(bounds.size());
  if (d < 1) throw std::invalid_argument("bayesopt needs at least one dimension");
  for (const auto& [lo, hi] : bounds)
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) throw std::invalid_argument("bayesopt needs finite bounds with lo < hi");
  if (opt.init_points < 1 || opt.iterations < 0 || opt.candidate_pool < 1)
    throw std::invalid_argument("bayesopt needs init_points >= 1, iterations >= 0, a nonempty pool");
  auto to_box = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x(j) = bounds[static_cast<std::size_t>(j)].first + u(j) * (bounds[static_cast<std::size_t>(j)].second - bounds[static_cast<std::size_t>(j)].first);
    return x;
  };
  Rng rng(opt.seed);
  BayesResult r;
  std::vector<Eigen::VectorXd> U;
  std::vector<double> ys;
  auto observe = [&](const Eigen::VectorXd& u) {
    const Eigen::VectorXd x = to_box(u);
    const int iter = static_cast<int>(ys.size());
    double y;
    try {
      y = objective(x);
    } catch (const std::exception& e) {
      throw std::runtime_error("objective failed at iteration " + std::to_string(iter) + ": " + e.what());
    }
    if (!std::isfinite(y)) throw std::runtime_error("objective returned a non-finite value at iteration " + std::to_string(iter));
    U.push_back(u);
    ys.push_back(y);
    if (iter == 0 || y < r.best_y) {
      r.best_y = y;
      r.best_x = x;
    }
    r.history.push_back({iter, x, y, r.best_y});
    if (opt.on_iteration) opt.on_iteration(bayes_step_to_json(r.history.back()));
  };
  const Eigen::MatrixXd init = latin_hypercube(opt.init_points, d, rng);
  for (int i = 0; i < opt.init_points; ++i) observe(init.row(i).transpose());

  for (int it = 0; it < opt.iterations; ++it) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(U.size()), d);
    Eigen::VectorXd y(static_cast<Eigen::Index>(ys.size()));
    for (std::size_t i = 0; i < U.size(); ++i) {
      X.row(static_cast<Eigen::Index>(i)) = U[i].transpose();
      y(static_cast<Eigen::Index>(i)) = ys[i];
    }
    double var = ys.size() > 1 ? (y.array() - y.mean()).square().sum() / static_cast<double>(ys.size() - 1) : 1.0;
    if (!(var > 1e-12)) var = 1e-12;
    GpHyper hyper;
    hyper.lengthscales = Eigen::VectorXd::Constant(d, opt.lengthscale);
    hyper.signal_var = opt.signal_var.value_or(var);
    hyper.noise_var = opt.noise_ratio * hyper.signal_var;
    const GpModel gp = gp_fit(X, y, hyper);
    const double best = y.minCoeff();

    std::vector<Eigen::VectorXd> pool(opt.candidate_pool, Eigen::VectorXd(d));
    for (auto& u : pool)
      for (int j = 0; j < d; ++j) u(j) = uniform01(rng);
    std::vector<double> ei(pool.size());
    parallel_for(pool.size(), opt.workers, [&](std::size_t i) { ei[i] = expected_improvement(gp, pool[i], best, opt.xi); });
    const auto pick = static_cast<std::size_t>(std::max_element(ei.begin(), ei.end()) - ei.begin());
    observe(pool[pick]);
  }
  return r;
}

}  // namespace scrabble_lab
