#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "scrabble_lab/parallel.hpp"
#include "scrabble_lab/rng.hpp"

namespace scrabble_lab {

struct CmaesState {
  int dim = 0;
  int lambda = 25;
  int mu = 13;
  Eigen::VectorXd mean;
  double sigma = 1.0;
  Eigen::MatrixXd C;
  Eigen::MatrixXd B;  // eigenvectors of C
  Eigen::VectorXd D;  // square roots of the eigenvalues
  Eigen::VectorXd p_sigma;
  Eigen::VectorXd p_c;
  Eigen::VectorXd weights;
  double mu_eff = 0, c_sigma = 0, d_sigma = 0, c_c = 0, c_1 = 0, c_mu = 0, chi_n = 0;
  int generation = 0;
  int repairs = 0;  // times the covariance needed an eigenvalue shift
};

namespace detail {

// Refreshes B and D from C, shifting C when its smallest eigenvalue is not positive.
inline void cmaes_decompose(CmaesState& s) {
  s.C = 0.5 * (s.C + s.C.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.C);
  if (eig.info() != Eigen::Success) throw std::runtime_error("cma-es: eigendecomposition failed");
  const double min_ev = eig.eigenvalues().minCoeff();
  if (!(min_ev > 0.0)) {
    s.C += (std::abs(min_ev) + 1e-12) * Eigen::MatrixXd::Identity(s.dim, s.dim);
    ++s.repairs;
    eig.compute(s.C);
    if (eig.info() != Eigen::Success) throw std::runtime_error("cma-es: eigendecomposition failed after repair");
  }
  s.B = eig.eigenvectors();
  s.D = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace detail

/// Log-decreasing recombination weights and the standard strategy constants.
inline CmaesState cmaes_init(const Eigen::VectorXd& x0, double sigma0, int lambda = 25, int mu = 13) {
  if (x0.size() < 1) throw std::domain_error("cma-es needs at least one dimension");
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw std::domain_error("cma-es needs sigma0 > 0");
  if (lambda < 2 || mu < 1 || mu > lambda) throw std::domain_error("cma-es needs 1 <= mu <= lambda and lambda >= 2");
  if (!x0.allFinite()) throw std::domain_error("cma-es needs a finite starting point");
  CmaesState s;
  s.dim = static_cast<int>(x0.size());
  s.lambda = lambda;
  s.mu = mu;
  s.mean = x0;
  s.sigma = sigma0;
  s.C = Eigen::MatrixXd::Identity(s.dim, s.dim);
  s.B = Eigen::MatrixXd::Identity(s.dim, s.dim);
  s.D = Eigen::VectorXd::Ones(s.dim);
  s.p_sigma = Eigen::VectorXd::Zero(s.dim);
  s.p_c = Eigen::VectorXd::Zero(s.dim);
  s.weights.resize(mu);
  for (int i = 0; i < mu; ++i) s.weights(i) = std::log(mu + 0.5) - std::log(i + 1.0);
  s.weights /= s.weights.sum();
  const double n = s.dim;
  s.mu_eff = 1.0 / s.weights.squaredNorm();
  s.c_sigma = (s.mu_eff + 2.0) / (n + s.mu_eff + 5.0);
  s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mu_eff - 1.0) / (n + 1.0)) - 1.0) + s.c_sigma;
  s.c_c = (4.0 + s.mu_eff / n) / (n + 4.0 + 2.0 * s.mu_eff / n);
  s.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + s.mu_eff);
  s.c_mu = std::min(1.0 - s.c_1, 2.0 * (s.mu_eff - 2.0 + 1.0 / s.mu_eff) / ((n + 2.0) * (n + 2.0) + s.mu_eff));
  s.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  return s;
}

/// lambda candidates m + sigma B D z with z standard normal.
inline std::vector<Eigen::VectorXd> cmaes_sample(const CmaesState& s, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(s.lambda));
  for (int k = 0; k < s.lambda; ++k) {
    Eigen::VectorXd z(s.dim);
    for (int i = 0; i < s.dim; ++i) z(i) = normal(rng);
    out.push_back(s.mean + s.sigma * (s.B * s.D.cwiseProduct(z)));
  }
  return out;
}

/// One generation of the (mu/mu_w, lambda) update; fitness is minimized.
/// Ties in fitness keep the candidates' input order.
inline CmaesState cmaes_update(const CmaesState& state, const std::vector<Eigen::VectorXd>& candidates,
                               const std::vector<double>& fitness) {
  if (static_cast<int>(candidates.size()) != state.lambda || fitness.size() != candidates.size())
    throw std::invalid_argument("cma-es update needs exactly lambda candidates and fitness values");
  for (double f : fitness)
    if (!std::isfinite(f)) throw std::invalid_argument("cma-es update: non-finite fitness value");
  CmaesState s = state;
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });

  const double n = s.dim;
  std::vector<Eigen::VectorXd> y(static_cast<std::size_t>(s.mu));
  Eigen::VectorXd y_w = Eigen::VectorXd::Zero(s.dim);
  for (int i = 0; i < s.mu; ++i) {
    y[static_cast<std::size_t>(i)] = (candidates[order[static_cast<std::size_t>(i)]] - state.mean) / state.sigma;
    y_w += s.weights(i) * y[static_cast<std::size_t>(i)];
  }
  s.mean = state.mean + state.sigma * y_w;

  // C^{-1/2} y_w = B D^{-1} B^T y_w
  const Eigen::VectorXd inv_sqrt_y = state.B * (state.B.transpose() * y_w).cwiseQuotient(state.D);
  s.p_sigma = (1.0 - s.c_sigma) * state.p_sigma + std::sqrt(s.c_sigma * (2.0 - s.c_sigma) * s.mu_eff) * inv_sqrt_y;
  const double ps_norm = s.p_sigma.norm();
  const double generations_done = state.generation + 1.0;
  const bool h_sigma = ps_norm / std::sqrt(1.0 - std::pow(1.0 - s.c_sigma, 2.0 * generations_done)) <
                       (1.4 + 2.0 / (n + 1.0)) * s.chi_n;
  s.p_c = (1.0 - s.c_c) * state.p_c + (h_sigma ? std::sqrt(s.c_c * (2.0 - s.c_c) * s.mu_eff) : 0.0) * y_w;
  const double delta_h = h_sigma ? 0.0 : s.c_c * (2.0 - s.c_c);

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(s.dim, s.dim);
  for (int i = 0; i < s.mu; ++i) rank_mu += s.weights(i) * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)].transpose();
  s.C = (1.0 - s.c_1 - s.c_mu) * state.C + s.c_1 * (s.p_c * s.p_c.transpose() + delta_h * state.C) + s.c_mu * rank_mu;
  s.sigma = state.sigma * std::exp((s.c_sigma / s.d_sigma) * (ps_norm / s.chi_n - 1.0));
  if (!std::isfinite(s.sigma) || !(s.sigma > 0.0)) throw std::runtime_error("cma-es: step size degenerated");
  detail::cmaes_decompose(s);
  ++s.generation;
  return s;
}

struct CmaesGeneration {
  int gen = 0;
  double best_f = 0;      // best seen so far, including x0
  double gen_best_f = 0;  // best of this generation
  double median_f = 0;
  double sigma = 0;
  double asymmetry = 0;  // max |C - C^T| after the update
  Eigen::VectorXd mean;
  Eigen::VectorXd best_x;
  Eigen::VectorXd eig;
  Eigen::VectorXd diag_c;
};

struct CmaesOptions {
  int lambda = 25;
  int mu = 13;
  std::uint64_t seed = 0;
  std::vector<bool> frozen;  // coordinates held at x0; empty means none
  int workers = 1;           // parallel objective evaluations within a generation
  std::function<void(const CmaesGeneration&)> on_generation;
};

struct CmaesResult {
  Eigen::VectorXd best_x;
  double best_f = 0;
  std::vector<CmaesGeneration> history;
  CmaesState state;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Minimizes `objective`. Frozen coordinates are excluded from the search
/// distribution and always passed at their x0 values.
inline CmaesResult cmaes_run(const Objective& objective, const Eigen::VectorXd& x0, double sigma0, int generations,
                             const CmaesOptions& opt = {}) {
  if (generations < 0) throw std::invalid_argument("generations must be >= 0");
  if (!opt.frozen.empty() && opt.frozen.size() != static_cast<std::size_t>(x0.size()))
    throw std::invalid_argument("frozen mask must match the dimension");
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < x0.size(); ++i)
    if (opt.frozen.empty() || !opt.frozen[static_cast<std::size_t>(i)]) free.push_back(i);
  if (free.empty()) throw std::invalid_argument("every coordinate is frozen");
  auto expand = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd x = x0;
    for (std::size_t k = 0; k < free.size(); ++k) x(free[k]) = z(static_cast<Eigen::Index>(k));
    return x;
  };
  auto evaluate = [&](const Eigen::VectorXd& x, int gen) {
    try {
      return objective(x);
    } catch (const std::exception& e) {
      throw std::runtime_error("objective failed in generation " + std::to_string(gen) + ": " + e.what());
    }
  };
  Eigen::VectorXd z0(static_cast<Eigen::Index>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k) z0(static_cast<Eigen::Index>(k)) = x0(free[k]);

  CmaesResult r;
  r.state = cmaes_init(z0, sigma0, opt.lambda, opt.mu);
  r.best_x = x0;
  r.best_f = evaluate(x0, 0);
  Rng rng(opt.seed);
  for (int g = 1; g <= generations; ++g) {
    const auto candidates = cmaes_sample(r.state, rng);
    std::vector<double> f(candidates.size());
    parallel_for(candidates.size(), opt.workers, [&](std::size_t i) { f[i] = evaluate(expand(candidates[i]), g); });
    for (double v : f)
      if (!std::isfinite(v)) throw std::runtime_error("objective returned a non-finite value in generation " + std::to_string(g));
    std::size_t best = 0;
    for (std::size_t i = 1; i < f.size(); ++i)
      if (f[i] < f[best]) best = i;
    if (f[best] < r.best_f) {
      r.best_f = f[best];
      r.best_x = expand(candidates[best]);
    }
    std::vector<double> sorted = f;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);

    r.state = cmaes_update(r.state, candidates, f);
    CmaesGeneration h;
    h.gen = g;
    h.best_f = r.best_f;
    h.gen_best_f = f[best];
    h.median_f = median;
    h.sigma = r.state.sigma;
    h.asymmetry = (r.state.C - r.state.C.transpose()).cwiseAbs().maxCoeff();
    h.mean = expand(r.state.mean);
    h.best_x = r.best_x;
    h.eig = r.state.D.cwiseProduct(r.state.D);
    h.diag_c = r.state.C.diagonal();
    if (opt.on_generation) opt.on_generation(h);
    r.history.push_back(std::move(h));
  }
  return r;
}

inline nlohmann::json cmaes_generation_to_json(const CmaesGeneration& h) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"gen", h.gen},           {"best_f", h.best_f}, {"gen_best_f", h.gen_best_f}, {"median_f", h.median_f},
          {"sigma", h.sigma},       {"eig", vec(h.eig)},  {"diagC", vec(h.diag_c)},     {"mean", vec(h.mean)},
          {"best_x", vec(h.best_x)}};
}

}  // namespace scrabble_lab
