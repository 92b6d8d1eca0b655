#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "scrabble_lab/engine.hpp"
#include "scrabble_lab/evaluation.hpp"
#include "scrabble_lab/mlp.hpp"
#include "scrabble_lab/parallel.hpp"
#include "scrabble_lab/players.hpp"
#include "scrabble_lab/rng.hpp"

namespace scrabble_lab {

// ---------------------------------------------------------------------------
// Dataset records

struct LabeledMove {
  Move move;
  int score = 0;
  FeatureVector features{};
};

/// A position plus the championship player's ordering of its candidates;
/// moves[0] is the move the championship player would choose.
struct RankedPosition {
  Board board;
  TileCounts rack{};
  int bag_count = 0;
  std::array<int, 2> scores{};
  int turn = 0;
  std::vector<LabeledMove> moves;
};

/// Rebuilds a playable state. The unseen tiles are split between the
/// opponent rack and the bag in sorted order; evaluation only depends on
/// their union and on the bag count.
inline GameState position_state(const RankedPosition& p, const GameConfig& cfg) {
  GameState s;
  s.board = p.board;
  s.turn = p.turn;
  s.scores = p.scores;
  s.racks[static_cast<std::size_t>(p.turn)] = p.rack;
  std::array<int, kTileKinds> unseen = cfg.tiles.count;
  auto take = [&](int t) {
    if (unseen[static_cast<std::size_t>(t)] == 0) throw ConfigError("position uses more tiles than the distribution holds");
    --unseen[static_cast<std::size_t>(t)];
  };
  for (int r = 0; r < kBoardSize; ++r)
    for (int c = 0; c < kBoardSize; ++c)
      if (!p.board.empty(r, c)) take(p.board.is_blank(r, c) ? kBlank : p.board.letter(r, c));
  for (int t = 0; t < kTileKinds; ++t)
    for (int k = 0; k < p.rack[static_cast<std::size_t>(t)]; ++k) take(t);
  std::vector<std::uint8_t> pool;
  for (int t = 0; t < kTileKinds; ++t) pool.insert(pool.end(), unseen[static_cast<std::size_t>(t)], static_cast<std::uint8_t>(t));
  const int opp = static_cast<int>(pool.size()) - p.bag_count;
  if (opp < 0 || opp > kRackSize) throw ConfigError("position bag count inconsistent with the tile distribution");
  auto& orack = s.racks[static_cast<std::size_t>(1 - p.turn)];
  for (int k = 0; k < opp; ++k) ++orack[pool[static_cast<std::size_t>(k)]];
  s.bag.assign(pool.begin() + opp, pool.end());
  return s;
}

inline std::string position_key(const Board& board, const TileCounts& rack) {
  std::string key;
  for (const auto& row : board.rows()) key += row;
  return key + "|" + counts_to_string(rack);
}

inline nlohmann::json position_to_json(const RankedPosition& p) {
  nlohmann::json moves = nlohmann::json::array();
  for (const auto& m : p.moves) {
    nlohmann::json f = nlohmann::json::object();
    for (int k = 0; k < kFeatureCount; ++k) f[kFeatureNames[static_cast<std::size_t>(k)]] = m.features[static_cast<std::size_t>(k)];
    moves.push_back({{"move", move_notation(m.move)}, {"score", m.score}, {"features", f}});
  }
  return {{"board", p.board.rows()}, {"rack", counts_to_string(p.rack)}, {"bag", p.bag_count},
          {"scores", p.scores},      {"turn", p.turn},                   {"moves", moves}};
}

inline RankedPosition position_from_json(const nlohmann::json& j, const std::string& path = "$") {
  auto fail = [&](const std::string& where, const std::string& what) { return ConfigError(path + where + ": " + what); };
  RankedPosition p;
  try {
    p.board = Board::from_rows(j.at("board").get<std::vector<std::string>>());
    p.rack = counts_from_string(j.at("rack").get<std::string>());
    p.bag_count = j.at("bag").get<int>();
    p.scores = j.at("scores").get<std::array<int, 2>>();
    p.turn = j.at("turn").get<int>();
    const auto& moves = j.at("moves");
    if (!moves.is_array() || moves.empty() || moves.size() > 10) throw fail(".moves", "expected 1..10 moves");
    for (std::size_t i = 0; i < moves.size(); ++i) {
      const auto& mj = moves[i];
      LabeledMove m;
      m.move = parse_move(mj.at("move").get<std::string>(), p.board);
      m.score = mj.at("score").get<int>();
      for (const auto& [name, value] : mj.at("features").items()) m.features[feature_from_name(name)] = value.get<double>();
      p.moves.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw fail("", e.what());
  }
  if (p.turn != 0 && p.turn != 1) throw fail(".turn", "must be 0 or 1");
  return p;
}

inline void write_dataset(const std::vector<RankedPosition>& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset '" + path.string() + "'");
  for (const auto& p : data) out << position_to_json(p).dump() << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline std::vector<RankedPosition> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset '" + path.string() + "'");
  std::vector<RankedPosition> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(n);
    try {
      out.push_back(position_from_json(nlohmann::json::parse(line), where));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset generation

struct SamplerSpec {
  double inclusion = 0.25;  // per-turn probability of keeping a position
  int skip_last = 2;        // final turns of each game never sampled
  EvalModel model = e_quackle();
};

/// Labels one position with the championship ranking.
inline RankedPosition label_position(const GameState& s, const ChampionshipSpec& spec, const EvalContext& ctx,
                                     std::uint64_t seed) {
  Rng rng(seed);
  auto ranking = championship_ranking(spec, s, ctx, rng);
  RankedPosition p;
  p.board = s.board;
  p.rack = s.mover_rack();
  p.bag_count = s.bag_size();
  p.scores = s.scores;
  p.turn = s.turn;
  const auto n = std::min<std::size_t>(ranking.size(), 10);
  for (std::size_t i = 0; i < n; ++i) p.moves.push_back({ranking[i].ranked.move, ranking[i].ranked.score, ranking[i].ranked.features});
  return p;
}

namespace detail {

// Sampled pre-move states of one Speedy self-play game.
inline std::vector<GameState> sample_game(const SamplerSpec& sampler, const EvalContext& ctx, std::uint64_t seed) {
  GameState s = new_game(ctx.cfg, seed);
  std::vector<GameState> states;
  Rng eval_rng(seed_mix(seed, 1));
  while (!is_over(s)) {
    states.push_back(fork_state(s));
    auto m = best_move(sampler.model, s, ctx, eval_rng());
    apply_trusted(s, m.move, m.score, false);
  }
  Rng pick(seed_mix(seed, 2));
  std::vector<GameState> kept;
  const auto usable = states.size() > static_cast<std::size_t>(sampler.skip_last) ? states.size() - static_cast<std::size_t>(sampler.skip_last) : 0;
  for (std::size_t i = 0; i < usable; ++i)
    if (uniform01(pick) < sampler.inclusion) kept.push_back(std::move(states[i]));
  return kept;
}

}  // namespace detail

/// Samples `n` distinct positions (board plus mover rack) from self-play and
/// labels each with the championship ranking. Output is independent of the
/// worker count.
inline std::vector<RankedPosition> generate_dataset(std::size_t n, const ChampionshipSpec& spec, const SamplerSpec& sampler,
                                                    const EvalContext& ctx, std::uint64_t seed, int workers = 1) {
  if (n < 1) throw std::invalid_argument("dataset needs at least one position");
  if (!(sampler.inclusion > 0.0 && sampler.inclusion <= 1.0)) throw std::invalid_argument("inclusion probability must lie in (0, 1]");
  std::vector<GameState> states;
  std::unordered_set<std::string> seen;
  const std::size_t batch = std::max<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), 8);
  std::uint64_t game = 0;
  while (states.size() < n) {
    std::vector<std::vector<GameState>> sampled(batch);
    parallel_for(batch, workers, [&](std::size_t i) {
      sampled[i] = detail::sample_game(sampler, ctx, seed_mix(seed_mix(seed, 0), game + i));
    });
    game += batch;
    for (auto& g : sampled)
      for (auto& st : g)
        if (states.size() < n && seen.insert(position_key(st.board, st.mover_rack())).second) states.push_back(std::move(st));
    if (game > 1000 * n + 1000) throw std::runtime_error("could not sample enough distinct positions");
  }
  std::vector<RankedPosition> out(n);
  parallel_for(n, workers, [&](std::size_t i) { out[i] = label_position(states[i], spec, ctx, seed_mix(seed_mix(seed, 1), i)); });
  return out;
}

struct Split {
  std::vector<RankedPosition> train;
  std::vector<RankedPosition> val;
};

/// Uniform 97:3 split by record; the validation side gets round(3% of n),
/// at least one record, and never all of them.
inline Split split_dataset(const std::vector<RankedPosition>& data, std::uint64_t seed) {
  if (data.size() < 2) throw std::invalid_argument("split needs at least two records");
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(uniform_below(rng, i))]);
  const auto n = data.size();
  const auto n_val = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(0.03 * static_cast<double>(n))), 1, n - 1);
  Split s;
  std::vector<bool> is_val(n, false);
  for (std::size_t k = 0; k < n_val; ++k) is_val[order[k]] = true;
  for (std::size_t i = 0; i < n; ++i) (is_val[i] ? s.val : s.train).push_back(data[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Board tensors

inline constexpr int kTensorChannels = 28;
inline constexpr std::size_t kTensorSize = static_cast<std::size_t>(kCells) * kTensorChannels;

using BoardTensor = std::vector<float>;

constexpr std::size_t tensor_index(int row, int col, int channel) {
  return (static_cast<std::size_t>(row) * kBoardSize + static_cast<std::size_t>(col)) * kTensorChannels +
         static_cast<std::size_t>(channel);
}

/// Channel 0: empty square. 1..26: letter one-hot. 27: tile value for
/// occupied cells (0 for blanks), -1 for empty premium squares, 0 otherwise.
inline BoardTensor encode_board(const Board& board, const GameConfig& cfg) {
  BoardTensor t(kTensorSize, 0.0f);
  for (int r = 0; r < kBoardSize; ++r) {
    for (int c = 0; c < kBoardSize; ++c) {
      if (board.empty(r, c)) {
        t[tensor_index(r, c, 0)] = 1.0f;
        if (cfg.premium_at(r, c) != Premium::None) t[tensor_index(r, c, 27)] = -1.0f;
      } else {
        const int letter = board.letter(r, c);
        t[tensor_index(r, c, 1 + letter)] = 1.0f;
        t[tensor_index(r, c, 27)] = board.is_blank(r, c) ? 0.0f : static_cast<float>(cfg.tile_value(letter));
      }
    }
  }
  return t;
}

inline Board board_after(const Board& board, const Move& move) {
  Board after = board;
  if (const auto* p = std::get_if<Place>(&move))
    for (const auto& t : p->tiles) after.place(p->tile_row(t), p->tile_col(t), t.letter, t.blank);
  return after;
}

struct PairInput {
  std::vector<float> input1;  // 15 x 15 x 56: before channels then after channels per cell
  std::array<double, 2> input2{};  // move score, leave value
};

inline PairInput encode_move_pairinput(const GameState& s, const Move& move, const GameConfig& cfg,
                                       const LeaveValueTable& leaves) {
  const auto before = encode_board(s.board, cfg);
  const auto after = encode_board(board_after(s.board, move), cfg);
  PairInput in;
  in.input1.resize(2 * kTensorSize);
  for (std::size_t cell = 0; cell < static_cast<std::size_t>(kCells); ++cell) {
    std::copy_n(before.begin() + static_cast<std::ptrdiff_t>(cell * kTensorChannels), kTensorChannels,
                in.input1.begin() + static_cast<std::ptrdiff_t>(cell * 2 * kTensorChannels));
    std::copy_n(after.begin() + static_cast<std::ptrdiff_t>(cell * kTensorChannels), kTensorChannels,
                in.input1.begin() + static_cast<std::ptrdiff_t>(cell * 2 * kTensorChannels + kTensorChannels));
  }
  in.input2 = {static_cast<double>(score_move(s.board, move, cfg)), leaves.value(leave_after(s.mover_rack(), move))};
  return in;
}

// ---------------------------------------------------------------------------
// Tensor export (SBT1)

struct TensorMove {
  BoardTensor after;
  std::array<float, 2> input2{};
};

struct TensorRecord {
  BoardTensor base;
  std::vector<TensorMove> moves;

  friend bool operator==(const TensorRecord& a, const TensorRecord& b) {
    auto same = [](const BoardTensor& x, const BoardTensor& y) {
      return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(float)) == 0;
    };
    if (!same(a.base, b.base) || a.moves.size() != b.moves.size()) return false;
    for (std::size_t i = 0; i < a.moves.size(); ++i) {
      if (!same(a.moves[i].after, b.moves[i].after)) return false;
      if (std::memcmp(a.moves[i].input2.data(), b.moves[i].input2.data(), sizeof(float) * 2) != 0) return false;
    }
    return true;
  }
};

inline constexpr std::uint32_t kTensorFormatVersion = 1;

inline TensorRecord tensor_record(const RankedPosition& p, const GameConfig& cfg) {
  TensorRecord r;
  r.base = encode_board(p.board, cfg);
  for (const auto& m : p.moves)
    r.moves.push_back({encode_board(board_after(p.board, m.move), cfg),
                       {static_cast<float>(m.features[kMoveScore]), static_cast<float>(m.features[kLeaveValue])}});
  return r;
}

/// Bytes of one record: base tensor, move count, per move tensor plus input2.
constexpr std::size_t tensor_record_bytes(std::size_t n_moves) {
  return kTensorSize * 4 + 4 + n_moves * (kTensorSize * 4 + 8);
}

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF), static_cast<char>((v >> 16) & 0xFF),
                     static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

inline void put_f32s(std::ostream& out, const float* data, std::size_t n) {
  std::vector<char> buf(n * 4);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = std::bit_cast<std::uint32_t>(data[i]);
    for (int k = 0; k < 4; ++k) buf[i * 4 + static_cast<std::size_t>(k)] = static_cast<char>((v >> (8 * k)) & 0xFF);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error(path + ": truncated tensor file");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 | static_cast<std::uint32_t>(b[2]) << 16 |
         static_cast<std::uint32_t>(b[3]) << 24;
}

inline void get_f32s(std::istream& in, float* data, std::size_t n, const std::string& path) {
  std::vector<unsigned char> buf(n * 4);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw std::runtime_error(path + ": truncated tensor file");
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(buf[i * 4 + static_cast<std::size_t>(k)]) << (8 * k);
    data[i] = std::bit_cast<float>(v);
  }
}

}  // namespace detail

inline void export_tensor_dataset(const std::vector<RankedPosition>& data, const GameConfig& cfg,
                                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write tensor file '" + path.string() + "'");
  out.write("SBT1", 4);
  detail::put_u32(out, kTensorFormatVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(data.size()));
  for (const auto& p : data) {
    if (p.moves.empty() || p.moves.size() > 10) throw std::invalid_argument("tensor export needs 1..10 moves per position");
    const auto r = tensor_record(p, cfg);
    detail::put_f32s(out, r.base.data(), r.base.size());
    detail::put_u32(out, static_cast<std::uint32_t>(r.moves.size()));
    for (const auto& m : r.moves) {
      detail::put_f32s(out, m.after.data(), m.after.size());
      detail::put_f32s(out, m.input2.data(), 2);
    }
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline std::vector<TensorRecord> read_tensor_dataset(const std::filesystem::path& path) {
  const std::string where = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open tensor file '" + where + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "SBT1", 4) != 0) throw std::runtime_error(where + ": bad magic");
  if (detail::get_u32(in, where) != kTensorFormatVersion) throw std::runtime_error(where + ": unsupported version");
  const auto n = detail::get_u32(in, where);
  std::vector<TensorRecord> out(n);
  for (auto& r : out) {
    r.base.resize(kTensorSize);
    detail::get_f32s(in, r.base.data(), kTensorSize, where);
    const auto moves = detail::get_u32(in, where);
    if (moves < 1 || moves > 10) throw std::runtime_error(where + ": move count out of range");
    r.moves.resize(moves);
    for (auto& m : r.moves) {
      m.after.resize(kTensorSize);
      detail::get_f32s(in, m.after.data(), kTensorSize, where);
      detail::get_f32s(in, m.input2.data(), 2, where);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error(where + ": trailing bytes");
  return out;
}

// ---------------------------------------------------------------------------
// RankNet

/// One ranking example: candidate inputs, index 0 the preferred move.
using RankList = std::vector<Eigen::VectorXd>;

inline Eigen::VectorXd select_features(const FeatureVector& f, const std::vector<Feature>& features) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < features.size(); ++i) x(static_cast<Eigen::Index>(i)) = f[features[i]];
  return x;
}

inline std::vector<RankList> rank_lists(const std::vector<RankedPosition>& data, const std::vector<Feature>& features) {
  std::vector<RankList> out;
  for (const auto& p : data) {
    if (p.moves.size() < 2) continue;
    RankList l;
    for (const auto& m : p.moves) l.push_back(select_features(m.features, features));
    out.push_back(std::move(l));
  }
  return out;
}

namespace detail {

// -log sigmoid(d), stable for large |d|.
inline double neg_log_sigmoid(double d) { return d > 0 ? std::log1p(std::exp(-d)) : -d + std::log1p(std::exp(d)); }
inline double sigmoid(double d) { return d >= 0 ? 1.0 / (1.0 + std::exp(-d)) : std::exp(d) / (1.0 + std::exp(d)); }

}  // namespace detail

/// sum over i >= 1 of -ln sigmoid(g[0] - g[i]).
inline double ranknet_loss(const std::vector<double>& g) {
  if (g.size() < 2) throw std::invalid_argument("ranknet loss needs at least two candidates");
  double loss = 0;
  for (std::size_t i = 1; i < g.size(); ++i) loss += detail::neg_log_sigmoid(g[0] - g[i]);
  return loss;
}

/// d loss / d g for the list scores g.
inline std::vector<double> ranknet_loss_gradient(const std::vector<double>& g) {
  std::vector<double> d(g.size(), 0.0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double p = detail::sigmoid(-(g[0] - g[i]));  // 1 - sigmoid(diff)
    d[0] -= p;
    d[i] += p;
  }
  return d;
}

/// Loss of one list and its parameter gradient added into grad.
inline double ranknet_backprop(const Mlp& net, const RankList& list, Mlp& grad) {
  std::vector<Mlp::Tape> tapes(list.size());
  std::vector<double> g(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) g[i] = net.forward(list[i], tapes[i]);
  const auto d = ranknet_loss_gradient(g);
  for (std::size_t i = 0; i < list.size(); ++i)
    if (d[i] != 0.0) net.backward(tapes[i], d[i], grad);
  return ranknet_loss(g);
}

inline double mean_ranknet_loss(const Mlp& net, const std::vector<RankList>& lists) {
  if (lists.empty()) return 0.0;
  double total = 0;
  for (const auto& l : lists) {
    std::vector<double> g(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) g[i] = net.forward(l[i]);
    total += ranknet_loss(g);
  }
  return total / static_cast<double>(lists.size());
}

/// Fraction of (first, other) pairs the scorer orders strictly correctly.
inline double pairwise_accuracy(const std::vector<std::vector<double>>& scores) {
  long long pairs = 0, right = 0;
  for (const auto& g : scores) {
    for (std::size_t i = 1; i < g.size(); ++i) {
      ++pairs;
      if (g[0] > g[i]) ++right;
    }
  }
  return pairs ? static_cast<double>(right) / static_cast<double>(pairs) : 0.0;
}

inline double pairwise_accuracy(const Mlp& net, const std::vector<RankList>& lists) {
  std::vector<std::vector<double>> scores;
  for (const auto& l : lists) {
    std::vector<double> g;
    for (const auto& x : l) g.push_back(net.forward(x));
    scores.push_back(std::move(g));
  }
  return pairwise_accuracy(scores);
}

/// Pairwise accuracy of an evaluation model over dataset records.
inline double pairwise_accuracy(const EvalModel& model, const std::vector<RankedPosition>& data) {
  std::vector<std::vector<double>> scores;
  for (const auto& p : data) {
    std::vector<double> g;
    for (const auto& m : p.moves) g.push_back(evaluate(model, m.features, p.bag_count));
    scores.push_back(std::move(g));
  }
  return pairwise_accuracy(scores);
}

struct TrainOptions {
  std::vector<int> hidden{16};
  Activation activation = Activation::Tanh;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  int epochs = 20;
  std::uint64_t seed = 0;
  bool normalize_inputs = true;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double train_accuracy = 0;
  double val_accuracy = 0;
};

struct TrainResult {
  Mlp net;
  std::vector<EpochStats> curves;  // entry 0 is the untrained network
};

/// Minibatch momentum SGD on the mean per-list RankNet loss. Inputs are
/// standardized with training-set statistics stored in the network.
inline TrainResult train_ranknet_mlp(const std::vector<RankList>& train, const std::vector<RankList>& val,
                                     const TrainOptions& opt, const Mlp* init = nullptr) {
  if (train.empty()) throw std::invalid_argument("training set is empty");
  if (opt.batch_size < 1) throw std::invalid_argument("batch size must be positive");
  const auto dim = train.front().front().size();
  Rng rng(opt.seed);
  TrainResult r;
  r.net = init ? *init : Mlp::random(static_cast<int>(dim), opt.hidden, opt.activation, rng);
  if (!init && opt.normalize_inputs) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim), sq = Eigen::VectorXd::Zero(dim);
    double count = 0;
    for (const auto& l : train)
      for (const auto& x : l) {
        sum += x;
        sq += x.cwiseProduct(x);
        count += 1;
      }
    const Eigen::VectorXd mean = sum / count;
    const Eigen::VectorXd var = (sq / count - mean.cwiseProduct(mean)).cwiseMax(0.0);
    r.net.input_shift = mean;
    r.net.input_scale = var.unaryExpr([](double v) { return v > 1e-12 ? 1.0 / std::sqrt(v) : 1.0; });
  }
  auto record = [&](int epoch) {
    r.curves.push_back({epoch, mean_ranknet_loss(r.net, train), mean_ranknet_loss(r.net, val), pairwise_accuracy(r.net, train),
                        pairwise_accuracy(r.net, val)});
  };
  record(0);
  Mlp velocity = r.net.zeros_like();
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
    Rng shuffle(seed_mix(opt.seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(uniform_below(shuffle, i))]);
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t end = std::min(order.size(), start + opt.batch_size);
      Mlp grad = r.net.zeros_like();
      for (std::size_t k = start; k < end; ++k) ranknet_backprop(r.net, train[order[k]], grad);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t l = 0; l < r.net.weights.size(); ++l) {
        velocity.weights[l] = opt.momentum * velocity.weights[l] - opt.learning_rate * scale * grad.weights[l];
        velocity.biases[l] = opt.momentum * velocity.biases[l] - opt.learning_rate * scale * grad.biases[l];
        r.net.weights[l] += velocity.weights[l];
        r.net.biases[l] += velocity.biases[l];
      }
    }
    record(epoch);
    if (!r.net.all_finite() || !std::isfinite(r.curves.back().train_loss))
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch));
  }
  return r;
}

inline nlohmann::json epoch_to_json(const EpochStats& e) {
  return {{"epoch", e.epoch},
          {"train_loss", e.train_loss},
          {"val_loss", e.val_loss},
          {"train_accuracy", e.train_accuracy},
          {"val_accuracy", e.val_accuracy}};
}

}  // namespace scrabble_lab
