#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "scrabble_lab/evaluation.hpp"
#include "scrabble_lab/imitation.hpp"
#include "scrabble_lab/parallel.hpp"
#include "scrabble_lab/players.hpp"
#include "scrabble_lab/selfplay.hpp"

namespace scrabble_lab {

struct FTrueSpec {
  PlayerSpec opponent = SpeedySpec{};
  long long n_games = 1000;
  double delta = 0.05;
  int workers = 1;
};

struct FScoreSpec {
  PlayerSpec opponent = SpeedySpec{};
  long long n_games = 1000;
  int workers = 1;
};

struct FSimSpec {
  const std::vector<RankedPosition>* dataset = nullptr;
  std::size_t top_k = 10;
  int workers = 1;
};

/// Win rate of Speedy{candidate} against the opponent, seats alternating
/// with the candidate first in even-numbered games.
inline MatchStats f_true_match(const EvalModel& candidate, const FTrueSpec& spec, const EvalContext& ctx,
                               std::uint64_t master_seed) {
  return run_match(SpeedySpec{candidate}, spec.opponent, spec.n_games, spec.delta, master_seed, spec.workers, ctx);
}

inline double f_true(const EvalModel& candidate, const FTrueSpec& spec, const EvalContext& ctx, std::uint64_t master_seed) {
  return f_true_match(candidate, spec, ctx, master_seed).win_rate;
}

struct FScoreResult {
  long long sum = 0;
  double mean = 0;
};

/// Total final-score difference of the candidate over the games.
inline FScoreResult f_score(const EvalModel& candidate, const FScoreSpec& spec, const EvalContext& ctx,
                            std::uint64_t master_seed) {
  auto st = run_match(SpeedySpec{candidate}, spec.opponent, spec.n_games, 0.05, master_seed, spec.workers, ctx);
  return {st.spread_sum, st.mean_spread()};
}

/// 1-based index of the recorded best move in the candidate's top-k list, 0 if absent.
inline std::size_t best_move_rank(const EvalModel& candidate, const RankedPosition& p, std::size_t top_k,
                                  const EvalContext& ctx, std::uint64_t seed = 0) {
  const GameState s = position_state(p, ctx.cfg);
  const auto top = top_moves(candidate, s, top_k, ctx, seed);
  for (std::size_t i = 0; i < top.size(); ++i)
    if (canonical_equal(top[i].move, p.moves.front().move)) return i + 1;
  return 0;
}

struct FSimResult {
  double sum = 0;
  double mean = 0;
  std::vector<std::size_t> ranks;  // per position, 0 when absent
};

/// Sum over positions of 1/k, k the rank of the recorded best move among the
/// candidate's top-k; positions where it is absent add 0.
inline FSimResult f_sim_detail(const EvalModel& candidate, const FSimSpec& spec, const EvalContext& ctx) {
  if (spec.dataset == nullptr || spec.dataset->empty()) throw std::invalid_argument("f_sim needs a nonempty dataset");
  if (spec.top_k < 1) throw std::invalid_argument("f_sim needs top_k >= 1");
  const auto& data = *spec.dataset;
  FSimResult r;
  r.ranks.resize(data.size());
  parallel_for(data.size(), spec.workers, [&](std::size_t i) {
    if (data[i].moves.empty()) throw std::invalid_argument("dataset position without moves");
    r.ranks[i] = best_move_rank(candidate, data[i], spec.top_k, ctx, seed_mix(0, i));
  });
  for (auto k : r.ranks)
    if (k > 0) r.sum += 1.0 / static_cast<double>(k);
  r.mean = r.sum / static_cast<double>(data.size());
  return r;
}

inline double f_sim(const EvalModel& candidate, const FSimSpec& spec, const EvalContext& ctx) {
  return f_sim_detail(candidate, spec, ctx).sum;
}

}  // namespace scrabble_lab
