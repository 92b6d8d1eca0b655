#include <gtest/gtest.h>

#include <cmath>

#include "scrabble_lab/evaluation.hpp"
#include "test_support.hpp"

namespace scrabble_lab {
namespace {

const Lexicon& full_lexicon() {
  static const Lexicon lex = Lexicon::load(testing::data_path("words.txt"));
  return lex;
}

GameState midgame(std::uint64_t seed, int plies) {
  const auto cfg = standard_config();
  const auto leaves = LeaveValueTable::per_tile_default();
  EvalContext ctx{full_lexicon(), cfg, leaves};
  GameState s = new_game(cfg, seed);
  for (int p = 0; p < plies && !is_over(s); ++p) {
    auto m = best_move(e_quackle(), s, ctx, 0);
    apply_trusted(s, m.move, m.score);
  }
  return s;
}

TEST(Evaluate, EQuackleIsScorePlusLeave) {
  FeatureVector f{};
  f[kMoveScore] = 8;
  f[kLeaveValue] = -2;
  EXPECT_DOUBLE_EQ(evaluate(e_quackle(), f, 50), 6.0);
  EXPECT_DOUBLE_EQ(evaluate(linear_model({kMoveScore, kLeaveValue, kCvDiff}, {0, 0, 0}), f, 50), 0.0);
  EXPECT_THROW(evaluate(EvalModel{LinearEval{{kMoveScore}, {1.0, 2.0}}}, f, 50), std::invalid_argument);
}

TEST(Evaluate, PhaseSplitBoundaries) {
  auto constant = [](double c) { return linear_model({kMoveScore}, {c}); };
  auto model = phase_split(constant(1), constant(2), constant(3));
  FeatureVector f{};
  f[kMoveScore] = 1;
  EXPECT_EQ(evaluate(model, f, 86), 1);
  EXPECT_EQ(evaluate(model, f, 80), 1);
  EXPECT_EQ(evaluate(model, f, 79), 2);
  EXPECT_EQ(evaluate(model, f, 20), 2);
  EXPECT_EQ(evaluate(model, f, 19), 3);
  EXPECT_EQ(evaluate(model, f, 0), 3);
}

// Straight-line forward pass over plain loops.
double hand_forward(const Mlp& net, const std::vector<double>& x) {
  std::vector<double> a(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = (x[i] - net.input_shift(static_cast<Eigen::Index>(i))) * net.input_scale(static_cast<Eigen::Index>(i));
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const auto& w = net.weights[l];
    std::vector<double> z(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      double s = net.biases[l](r);
      for (Eigen::Index c = 0; c < w.cols(); ++c) s += w(r, c) * a[static_cast<std::size_t>(c)];
      const bool hidden = l + 1 < net.weights.size();
      z[static_cast<std::size_t>(r)] = !hidden ? s : net.activation == Activation::Tanh ? std::tanh(s) : std::max(0.0, s);
    }
    a = z;
  }
  return a[0];
}

TEST(Mlp, ForwardMatchesHandComputation) {
  Rng rng(3);
  for (auto act : {Activation::Tanh, Activation::Relu}) {
    for (const std::vector<int>& hidden : {std::vector<int>{5}, std::vector<int>{6, 3}}) {
      Mlp net = Mlp::random(4, hidden, act, rng);
      for (Eigen::Index i = 0; i < 4; ++i) {
        net.input_shift(i) = uniform01(rng);
        net.input_scale(i) = 0.5 + uniform01(rng);
      }
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(4);
        Eigen::VectorXd xv(4);
        for (int i = 0; i < 4; ++i) xv(i) = x[static_cast<std::size_t>(i)] = 4 * uniform01(rng) - 2;
        const double want = hand_forward(net, x);
        EXPECT_NEAR(net.forward(xv), want, 1e-12 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST(Mlp, SingleHiddenUnitByHand) {
  // h = tanh(2x0 - x1 + 0.5), out = 3h - 1
  Mlp net;
  net.activation = Activation::Tanh;
  net.weights = {Eigen::MatrixXd{{2.0, -1.0}}, Eigen::MatrixXd{{3.0}}};
  net.biases = {Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, -1.0)};
  net.input_shift = Eigen::VectorXd::Zero(2);
  net.input_scale = Eigen::VectorXd::Ones(2);
  EXPECT_NEAR(net.forward(Eigen::Vector2d(1.0, 0.5)), 3 * std::tanh(2.0) - 1, 1e-15);
  EXPECT_THROW(net.forward(Eigen::Vector3d(1, 2, 3)), std::invalid_argument);
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
  Rng rng(11);
  Mlp net = Mlp::random(3, {4, 3}, Activation::Tanh, rng);
  Eigen::VectorXd x(3);
  x << 0.3, -1.2, 0.8;
  Mlp::Tape tape;
  net.forward(x, tape);
  Mlp grad = net.zeros_like();
  net.backward(tape, 1.0, grad);
  auto p = net.flatten();
  const auto g = grad.flatten();
  const double h = 1e-6;
  for (std::size_t i = 0; i < p.size(); ++i) {
    Mlp probe = net;
    auto q = p;
    q[i] = p[i] + h;
    probe.unflatten(q);
    const double up = probe.forward(x);
    q[i] = p[i] - h;
    probe.unflatten(q);
    const double down = probe.forward(x);
    EXPECT_NEAR(g[i], (up - down) / (2 * h), 1e-7) << i;
  }
}

TEST(Mlp, JsonRoundTrip) {
  Rng rng(5);
  Mlp net = Mlp::random(3, {4, 2}, Activation::Relu, rng);
  Mlp back = mlp_from_json(nlohmann::json::parse(mlp_to_json(net).dump()));
  EXPECT_EQ(back.flatten(), net.flatten());
  EXPECT_EQ(back.activation, net.activation);
  auto bad = mlp_to_json(net);
  bad["layers"][1]["weights"][0].push_back(1.0);
  EXPECT_THROW(mlp_from_json(bad), ConfigError);
}

TEST(Models, JsonRoundTripAndErrors) {
  Rng rng(9);
  EvalModel mlp{MlpEval{{kMoveScore, kLeaveValue, kBoardVcDiff}, Mlp::random(3, {4}, Activation::Tanh, rng)}};
  auto model = phase_split(e_quackle(), mlp, linear_model({kMoveScore, kOpenTW}, {1.0, -0.5}));
  auto j = model_to_json(model);
  auto back = model_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(model_to_json(back), j);
  EXPECT_EQ(model_to_json(e_quackle())["type"], "linear");

  nlohmann::json bad = {{"type", "linear"}, {"feature_names", {"move_score", "nonsense"}}, {"weights", {1, 1}}};
  try {
    model_from_json(bad);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("nonsense"), std::string::npos);
  }
  EXPECT_THROW(model_from_json({{"type", "linear"}, {"feature_names", {"move_score"}}, {"weights", {1, 2}}}), ConfigError);
  EXPECT_THROW(model_from_json({{"type", "quadratic"}}), ConfigError);
}

TEST(LeaveTable, LookupAndFallback) {
  auto table = LeaveValueTable::per_tile_default();
  EXPECT_EQ(table.value(TileCounts{}), 0.0);
  table.set(counts_from_string("Q"), -6.0);
  EXPECT_EQ(table.value(counts_from_string("Q")), -6.0);
  const auto es = counts_from_string("ES");
  EXPECT_DOUBLE_EQ(table.value(es), table.tile_values()[4] + table.tile_values()[18]);
  EXPECT_FALSE(table.entry(es).has_value());

  auto back = LeaveValueTable::from_json(nlohmann::json::parse(table.to_json().dump()));
  EXPECT_EQ(back.value(counts_from_string("Q")), -6.0);
  EXPECT_EQ(back.value(es), table.value(es));
  EXPECT_THROW(LeaveValueTable::from_json({{"leaves", {{"AEINRST", 1.0}}}}), ConfigError);
  EXPECT_THROW(LeaveValueTable::from_json({{"leaves", {{"A1", 1.0}}}}), ConfigError);
}

LoggedMove logged(int player, const std::string& rack, int score) {
  return {player, counts_from_string(rack), Pass{}, score, "-"};
}

TEST(LeaveTable, BuiltFromLogsIsCenteredMean) {
  // Next-turn pairs: S -> 40, Q -> 20; global mean 30.
  std::vector<std::vector<LoggedMove>> logs{{logged(0, "S", 0), logged(1, "Q", 0), logged(0, "E", 40), logged(1, "E", 20)}};
  auto table = build_leave_table(logs, 6, 1);
  ASSERT_TRUE(table.entry(counts_from_string("S")).has_value());
  EXPECT_DOUBLE_EQ(*table.entry(counts_from_string("S")), 10.0);
  EXPECT_DOUBLE_EQ(*table.entry(counts_from_string("Q")), -10.0);

  auto sparse = build_leave_table(logs, 6, 2);
  EXPECT_EQ(sparse.size(), 0u);

  std::vector<std::vector<LoggedMove>> flat{{logged(0, "S", 30), logged(1, "Q", 30), logged(0, "A", 30), logged(1, "B", 30),
                                             logged(0, "C", 30)}};
  auto zero = build_leave_table(flat, 6, 1);
  EXPECT_GT(zero.size(), 0u);
  for (const char* leave : {"S", "Q", "A"}) EXPECT_DOUBLE_EQ(*zero.entry(counts_from_string(leave)), 0.0);

  EXPECT_THROW(build_leave_table({}, 6, 1), std::invalid_argument);
}

TEST(LeaveTable, PlayabilitySingleCompletion) {
  const auto cfg = standard_config();
  auto lex = Lexicon::build({"AB", "BA"});
  // Only a blank is left to draw; the best opening of {A, B, ?} is AB or BA
  // across the centre double word: (1 + 3) * 2 = 8.
  EXPECT_DOUBLE_EQ(leave_playability(counts_from_string("AB"), counts_from_string("?"), lex, cfg, 5, 1), 8.0);
  EXPECT_DOUBLE_EQ(leave_playability(counts_from_string("CD"), counts_from_string("EEEEE"), lex, cfg, 3, 1), 0.0);
  EXPECT_THROW(leave_playability(TileCounts{}, counts_from_string("A"), lex, cfg, 0, 1), std::invalid_argument);
}

TEST(LeaveTable, PlayabilityEstimateIsStable) {
  const auto cfg = standard_config();
  const auto& lex = full_lexicon();
  const auto pool = counts_from_string("AAAAEEEEIIIOONNRRSSTTLDGU?");
  const auto leave = counts_from_string("ERS");
  auto stats = [&](int n) {
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(leave_playability(leave, pool, lex, cfg, 1, 1000 + static_cast<std::uint64_t>(i)));
    double m = 0;
    for (double x : xs) m += x;
    m /= n;
    double v = 0;
    for (double x : xs) v += (x - m) * (x - m);
    return std::pair{m, std::sqrt(v / (n - 1) / n)};
  };
  auto [m1, se1] = stats(16);
  auto [m2, se2] = stats(32);
  EXPECT_LT(std::abs(m1 - m2), 3 * std::hypot(se1, se2) + 1e-9);
}

TEST(Features, PassExchangeAndBingo) {
  const auto cfg = standard_config();
  auto lex = Lexicon::build({"AB", "BA", "ABCDEIO"});
  const auto leaves = LeaveValueTable::per_tile_default();
  EvalContext ctx{lex, cfg, leaves};
  auto s = testing::position(Board{}, counts_from_string("ABCDEIO"), 50);

  auto pass = extract_features(s, Pass{}, ctx, 1);
  EXPECT_EQ(pass[kMoveScore], 0);
  EXPECT_EQ(pass[kLeaveLength], 7);
  EXPECT_DOUBLE_EQ(pass[kLeaveValue], leaves.value(counts_from_string("ABCDEIO")));

  auto ab = extract_features(s, parse_move("8H AB", s.board), ctx, 1);
  EXPECT_EQ(ab[kMoveScore], 8);
  EXPECT_EQ(ab[kCvDiff], -1);  // C, D against E, I, O
  EXPECT_EQ(ab[kLeaveLength], 5);
  EXPECT_EQ(ab[kBlanksLeft], 0);

  auto bingo = extract_features(s, parse_move("8H ABCDEIO", s.board), ctx, 1);
  EXPECT_EQ(bingo[kLeaveLength], 0);
  EXPECT_EQ(bingo[kLeaveValue], 0);
  EXPECT_EQ(bingo[kBlanksLeft], 0);
  EXPECT_EQ(bingo[kMoveScore], score_move(s.board, parse_move("8H ABCDEIO", s.board), cfg));

  auto ex = extract_features(s, Exchange{counts_from_string("CD")}, ctx, 1);
  EXPECT_EQ(ex[kMoveScore], 0);
  EXPECT_EQ(ex[kLeaveLength], 5);
}

TEST(Features, BlanksLeftCountsRackBlanks) {
  const auto cfg = standard_config();
  auto lex = Lexicon::build({"AB", "BA"});
  const auto leaves = LeaveValueTable::per_tile_default();
  EvalContext ctx{lex, cfg, leaves};
  auto s = testing::position(Board{}, counts_from_string("AB??"), 50);
  EXPECT_EQ(extract_features(s, parse_move("8H AB", s.board), ctx, 1)[kBlanksLeft], 2);
  EXPECT_EQ(extract_features(s, parse_move("8H Ab", s.board), ctx, 1)[kBlanksLeft], 1);
}

TEST(Openings, OneDoubleLetterHook) {
  const auto cfg = standard_config();
  auto lex = Lexicon::build({"AB"});
  // AB at 8H-8I. Above the B (row 7, col I) an A makes the down word AB and
  // that cell is a double letter. Below the A an A..B hook also works, but
  // that cell is plain.
  ASSERT_EQ(cfg.premium_at(6, 8), Premium::DL);
  ASSERT_EQ(cfg.premium_at(8, 7), Premium::None);
  Board before;
  Board after = before;
  after.place(7, 7, 0, false);
  after.place(7, 8, 1, false);
  auto open = opening_features(before, after, lex, cfg);
  EXPECT_EQ(open, (std::array<int, 4>{1, 0, 0, 0}));
  EXPECT_EQ(opening_features(after, after, lex, cfg), (std::array<int, 4>{0, 0, 0, 0}));
}

TEST(Openings, NonNegativeOnGames) {
  const auto cfg = standard_config();
  const auto& lex = full_lexicon();
  const auto leaves = LeaveValueTable::per_tile_default();
  EvalContext ctx{lex, cfg, leaves};
  auto s = midgame(4, 6);
  for (const auto& m : generate_moves(s, lex, cfg)) {
    auto f = extract_features(s, m, ctx, 1);
    for (int k = kOpenDL; k <= kOpenTW; ++k) EXPECT_GE(f[static_cast<std::size_t>(k)], 0);
  }
}

TEST(Ranking, TiesAndSizes) {
  const auto cfg = standard_config();
  auto lex = Lexicon::build({"AB", "BA"});
  const auto leaves = LeaveValueTable::per_tile_default();
  EvalContext ctx{lex, cfg, leaves};
  auto s = testing::position(Board{}, counts_from_string("AB"), 0);
  auto moves = generate_moves(s, lex, cfg);
  ASSERT_GT(moves.size(), 4u);
  auto top = rank_moves(e_quackle(), s, moves, 10, ctx, 1);
  EXPECT_EQ(top.size(), moves.size());
  for (std::size_t i = 1; i < top.size(); ++i) {
    EXPECT_GE(top[i - 1].value, top[i].value);
    if (top[i - 1].value == top[i].value) {
      EXPECT_TRUE(canonical_less(top[i - 1].move, top[i].move));
    }
  }
  EXPECT_EQ(rank_moves(e_quackle(), s, moves, 2, ctx, 1).size(), 2u);
  EXPECT_EQ(rank_moves(e_quackle(), s, {Move{Pass{}}}, 10, ctx, 1).size(), 1u);
}

TEST(Ranking, EQuackleMatchesIndependentSort) {
  const auto cfg = standard_config();
  const auto& lex = full_lexicon();
  const auto leaves = LeaveValueTable::per_tile_default();
  EvalContext ctx{lex, cfg, leaves};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto s = midgame(seed, 5);
    auto moves = generate_moves(s, lex, cfg);
    std::vector<std::pair<double, Move>> want;
    for (const auto& m : moves) {
      want.emplace_back(score_move(s.board, m, cfg) + leaves.value(leave_after(s.mover_rack(), m)), m);
    }
    std::stable_sort(want.begin(), want.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return canonical_less(a.second, b.second);
    });
    auto got = rank_moves(e_quackle(), s, moves, moves.size(), ctx, 1);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_TRUE(canonical_equal(got[i].move, want[i].second)) << i;
  }
}

TEST(Ranking, ScalingLinearWeightsKeepsOrder) {
  const auto cfg = standard_config();
  const auto& lex = full_lexicon();
  const auto leaves = LeaveValueTable::per_tile_default();
  EvalContext ctx{lex, cfg, leaves};
  auto s = midgame(8, 4);
  auto moves = generate_moves(s, lex, cfg);
  auto base = linear_model({kMoveScore, kLeaveValue, kCvDiff}, {1.0, 0.75, -0.5});
  auto scaled = linear_model({kMoveScore, kLeaveValue, kCvDiff}, {4.0, 3.0, -2.0});
  auto a = rank_moves(base, s, moves, 20, ctx, 1);
  auto b = rank_moves(scaled, s, moves, 20, ctx, 1);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(canonical_equal(a[i].move, b[i].move));
}

// top_moves and best_move stream the generator; they must agree with
// generating everything and ranking it.
TEST(Ranking, StreamingMatchesFullRanking) {
  const auto cfg = standard_config();
  const auto& lex = full_lexicon();
  const auto leaves = LeaveValueTable::per_tile_default();
  EvalContext ctx{lex, cfg, leaves};
  Rng rng(2);
  std::vector<EvalModel> models{e_quackle(), linear_model({kMoveScore, kLeaveValue, kOpenDW, kBoardVcDiff}, {1.0, 1.0, -2.0, 0.1}),
                                EvalModel{MlpEval{{kMoveScore, kLeaveValue, kLeaveLength}, Mlp::random(3, {4}, Activation::Tanh, rng)}}};
  models.push_back(phase_split(models[0], models[1], models[2]));
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto s = midgame(seed + 20, static_cast<int>(seed * 3));
    if (seed == 3) s.racks[static_cast<std::size_t>(s.turn)] = counts_from_string("EIRST??");
    auto moves = generate_moves(s, lex, cfg);
    for (const auto& model : models) {
      auto full = rank_moves(model, s, moves, 10, ctx, 7);
      auto streamed = top_moves(model, s, 10, ctx, 7);
      ASSERT_EQ(full.size(), streamed.size());
      for (std::size_t i = 0; i < full.size(); ++i) {
        EXPECT_TRUE(canonical_equal(full[i].move, streamed[i].move)) << i << " " << move_notation(full[i].move);
        EXPECT_EQ(full[i].value, streamed[i].value);
        EXPECT_EQ(full[i].score, streamed[i].score);
      }
      auto best = best_move(model, s, ctx, 7);
      EXPECT_TRUE(canonical_equal(best.move, full[0].move));
      EXPECT_EQ(best.value, full[0].value);
    }
  }
}

TEST(Ranking, PhaseSplitOfIdenticalModelsPlaysIdentically) {
  const auto cfg = standard_config();
  const auto& lex = full_lexicon();
  const auto leaves = LeaveValueTable::per_tile_default();
  EvalContext ctx{lex, cfg, leaves};
  auto split = phase_split(e_quackle(), e_quackle(), e_quackle());
  GameState a = new_game(cfg, 12), b = new_game(cfg, 12);
  while (!is_over(a)) {
    auto ma = best_move(e_quackle(), a, ctx, 0);
    auto mb = best_move(split, b, ctx, 0);
    ASSERT_TRUE(canonical_equal(ma.move, mb.move));
    apply_trusted(a, ma.move, ma.score);
    apply_trusted(b, mb.move, mb.score);
  }
  EXPECT_EQ(a.scores, b.scores);
}

}  // namespace
}  // namespace scrabble_lab
