#include <gtest/gtest.h>

#include <cmath>

#include "scrabble_lab/fitness.hpp"
#include "test_support.hpp"

namespace scrabble_lab {
namespace {

const Lexicon& full_lexicon() {
  static const Lexicon lex = Lexicon::load(testing::data_path("words.txt"));
  return lex;
}

struct Fixture {
  GameConfig cfg = standard_config();
  LeaveValueTable leaves = LeaveValueTable::per_tile_default();
  EvalContext ctx{full_lexicon(), cfg, leaves};

  // Positions whose recorded best move is chosen by rank in e_quackle's full
  // ordering (1-based; 0 picks a move outside the top 10).
  std::vector<RankedPosition> with_ranks(const std::vector<std::size_t>& ranks) const {
    std::vector<RankedPosition> out;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      GameState s = new_game(cfg, 40 + i);
      for (int p = 0; p < 4; ++p) {
        auto m = best_move(e_quackle(), s, ctx, 0);
        apply_trusted(s, m.move, m.score);
      }
      auto all = rank_moves(e_quackle(), s, generate_moves(s, ctx.lex, cfg), 1000, ctx, 0);
      EXPECT_GT(all.size(), 11u);
      RankedPosition p;
      p.board = s.board;
      p.rack = s.mover_rack();
      p.bag_count = s.bag_size();
      p.scores = s.scores;
      p.turn = s.turn;
      const auto& pick = all[ranks[i] ? ranks[i] - 1 : all.size() - 1];
      p.moves.push_back({pick.move, pick.score, pick.features});
      out.push_back(std::move(p));
    }
    return out;
  }
};

TEST(FSim, HandBuiltRanks) {
  Fixture f;
  auto data = f.with_ranks({1, 2, 0});
  auto r = f_sim_detail(e_quackle(), {&data, 10, 1}, f.ctx);
  EXPECT_EQ(r.ranks, (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_DOUBLE_EQ(r.sum, 1.5);
  EXPECT_DOUBLE_EQ(r.mean, 0.5);
}

TEST(FSim, AllFirstAndAllTenth) {
  Fixture f;
  auto first = f.with_ranks({1, 1, 1, 1});
  EXPECT_DOUBLE_EQ(f_sim(e_quackle(), {&first, 10, 2}, f.ctx), 4.0);
  auto tenth = f.with_ranks({10, 10, 10});
  EXPECT_NEAR(f_sim(e_quackle(), {&tenth, 10, 1}, f.ctx), 0.3, 1e-12);
  EXPECT_DOUBLE_EQ(f_sim(e_quackle(), {&tenth, 9, 1}, f.ctx), 0.0);
}

TEST(FSim, ScaleInvariantAndValidated) {
  Fixture f;
  auto data = f.with_ranks({1, 3, 5, 0});
  auto base = linear_model({kMoveScore, kLeaveValue}, {1.0, 1.0});
  auto scaled = linear_model({kMoveScore, kLeaveValue}, {3.5, 3.5});
  EXPECT_DOUBLE_EQ(f_sim(base, {&data, 10, 1}, f.ctx), f_sim(scaled, {&data, 10, 1}, f.ctx));
  std::vector<RankedPosition> empty;
  EXPECT_THROW(f_sim(base, {&empty, 10, 1}, f.ctx), std::invalid_argument);
}

TEST(FTrue, DominantAgainstPasser) {
  Fixture f;
  EXPECT_EQ(f_true(e_quackle(), {PassSpec{}, 6, 0.05, 1}, f.ctx, 1), 1.0);
}

TEST(FTrue, SelfPlayNearHalf) {
  Fixture f;
  const long long n = 40;
  auto st = f_true_match(e_quackle(), {SpeedySpec{}, n, 0.05, 1}, f.ctx, 3);
  EXPECT_LE(std::abs(st.win_rate - 0.5), hoeffding_half_width(0.05, n));
  EXPECT_EQ(st.win_rate, f_true(e_quackle(), {SpeedySpec{}, n, 0.05, 4}, f.ctx, 3));
}

TEST(FScore, SumsSpreads) {
  Fixture f;
  auto one = f_score(e_quackle(), {RandomSpec{true}, 1, 1}, f.ctx, 5);
  const auto [seat, seed] = match_schedule(Seating::Alternate, 5, 0);
  ASSERT_EQ(seat, 0);
  auto g = play_game(SpeedySpec{}, RandomSpec{true}, f.ctx, seed);
  EXPECT_EQ(one.sum, g.scores[0] - g.scores[1]);
  auto many = f_score(e_quackle(), {RandomSpec{true}, 6, 2}, f.ctx, 5);
  EXPECT_DOUBLE_EQ(many.mean * 6, static_cast<double>(many.sum));
}

TEST(FScore, SelfPlaySymmetric) {
  Fixture f;
  const long long n = 30;
  auto st = run_match(SpeedySpec{}, SpeedySpec{}, n, 0.05, 8, 1, f.ctx, {Seating::Alternate, true});
  double sq = 0;
  for (std::size_t i = 0; i < st.games.size(); ++i) {
    const auto& g = st.games[i];
    const int sa = st.a_seats[i];
    const double d = g.scores[static_cast<std::size_t>(sa)] - g.scores[static_cast<std::size_t>(1 - sa)];
    sq += d * d;
  }
  const double sd = std::sqrt(sq / static_cast<double>(n));
  auto r = f_score(e_quackle(), {SpeedySpec{}, n, 1}, f.ctx, 8);
  EXPECT_EQ(r.sum, st.spread_sum);
  EXPECT_LE(std::abs(static_cast<double>(r.sum)), 3 * sd * std::sqrt(static_cast<double>(n)));
}

}  // namespace
}  // namespace scrabble_lab
