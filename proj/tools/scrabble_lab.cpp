#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scrabble_lab/scrabble_lab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scrabble_lab;

namespace {

// Raised for bad flag combinations; exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string lexicon = std::string(SCRABBLE_LAB_DATA_DIR) + "/words.txt";
  std::string leaves;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool needs_game = true) {
  cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory (default out/<command>)");
  if (!needs_game) return;
  cmd->add_option("--config", c.config, "Game config JSON (default $SCRABBLE_LAB_CONFIG, else the standard game)");
  cmd->add_option("--lexicon", c.lexicon, "Word list, one word per line")->capture_default_str();
  cmd->add_option("--leaves", c.leaves, "Leave table JSON (default: built-in per-tile values)");
  cmd->add_option("--workers", c.workers, "Worker threads; outputs do not depend on it")->capture_default_str()->check(CLI::PositiveNumber);
}

// Loaded game inputs shared by the game-playing commands.
struct World {
  GameConfig cfg;
  Lexicon lex;
  LeaveValueTable leaves;
  std::string config_source;

  EvalContext ctx() const { return EvalContext{lex, cfg, leaves}; }
};

World load_world(const Common& c) {
  World w{c.config.empty() ? default_config() : load_config(c.config), Lexicon::load(c.lexicon),
          c.leaves.empty() ? LeaveValueTable::per_tile_default() : LeaveValueTable::load(c.leaves), ""};
  const char* env = std::getenv("SCRABBLE_LAB_CONFIG");
  w.config_source = !c.config.empty() ? c.config : (env && *env ? std::string(env) : std::string("standard"));
  return w;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Collects outputs and timings; written once as manifest.json when the command finishes.
class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv, fs::path dir)
      : command_(std::move(command)), argv_(std::move(argv)), dir_(std::move(dir)), start_(std::chrono::steady_clock::now()),
        started_at_(utc_now()) {
    fs::create_directories(dir_);
  }

  fs::path path(const std::string& name) {
    const fs::path p = dir_ / name;
    outputs_[name] = p.string();
    return p;
  }
  void set(const std::string& key, json v) { extra_[key] = std::move(v); }
  void time(const std::string& phase, double seconds) { timings_[phase] = seconds; }
  void world(const World& w, const Common& c) {
    extra_["config"] = config_to_json(w.cfg);
    extra_["config_source"] = w.config_source;
    extra_["lexicon"] = {{"path", c.lexicon}, {"words", w.lex.word_count()}};
    extra_["leaves"] = {{"path", c.leaves}, {"source", w.leaves.source()}, {"entries", w.leaves.size()}};
  }

  void write(std::uint64_t seed) {
    timings_["total_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json m = extra_;
    m["command"] = command_;
    m["argv"] = argv_;
    m["master_seed"] = seed;
    m["artifact_version"] = std::string("scrabble_lab ") + SCRABBLE_LAB_VERSION;
    m["outputs"] = outputs_;
    m["started_at"] = started_at_;
    m["timings"] = timings_;
    std::ofstream(dir_ / "manifest.json") << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  std::string started_at_;
  json outputs_ = json::object(), extra_ = json::object(), timings_ = json::object();
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2) << '\n'; }

std::vector<Feature> parse_features(const std::vector<std::string>& names) {
  std::vector<Feature> out;
  for (const auto& n : names) out.push_back(feature_from_name(n));
  if (out.empty()) throw UsageError("at least one feature is required");
  return out;
}

EvalModel load_model_arg(const std::string& arg) {
  if (arg.empty() || arg == "e_quackle") return e_quackle();
  return load_model(arg);
}

PlayerSpec load_player_arg(const std::string& arg) {
  if (arg.empty() || arg == "speedy") return SpeedySpec{};
  return load_player(arg);
}

// ---------------------------------------------------------------------------

struct MatchArgs {
  std::string a, b, seating = "alternate";
  long long games = 100;
  double delta = 0.05;
  bool games_log = false;
};

int cmd_match(const MatchArgs& args, const Common& c, Manifest& m) {
  const World w = load_world(c);
  m.world(w, c);
  const PlayerSpec a = load_player(args.a), b = load_player(args.b);
  MatchOptions opt;
  opt.seating = seating_from_name(args.seating);
  opt.keep_games = args.games_log;
  const auto t0 = std::chrono::steady_clock::now();
  const auto st = run_match(a, b, args.games, args.delta, c.seed, c.workers, w.ctx(), opt);
  m.time("match_s", seconds_since(t0));
  json report = match_to_json(st);
  report["a"] = player_to_json(a);
  report["b"] = player_to_json(b);
  report["seating"] = seating_name(opt.seating);
  write_json(m.path("report.json"), report);
  if (args.games_log) {
    std::ofstream log(m.path("games.jsonl"));
    for (std::size_t i = 0; i < st.games.size(); ++i) log << game_to_json(st.games[i], i, st.a_seats[i]).dump() << '\n';
  }
  std::cout << report.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct OptimizeArgs {
  std::string method = "cmaes", fitness = "true";
  std::vector<std::string> features{"move_score", "leave_value"};
  std::vector<double> x0;
  std::vector<std::size_t> freeze;
  std::string opponent, dataset;
  long long games = 1000;
  int generations = 5, lambda = 25, mu = 13;
  double sigma = 0.5;
  int init_points = 5, iterations = 30;
  double lower = 0.0, upper = 2.0;
  bool selftest = false;
};

int optimize_selftest(const OptimizeArgs& args, const Common& c, Manifest& m) {
  json result;
  if (args.method == "cmaes") {
    auto sphere = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
    CmaesOptions opt;
    opt.seed = c.seed;
    std::ofstream hist(m.path("history.jsonl"));
    opt.on_generation = [&](const CmaesGeneration& g) { hist << cmaes_generation_to_json(g).dump() << '\n'; };
    const auto r = cmaes_run(sphere, Eigen::VectorXd::Constant(5, 1.0), 0.5, 300, opt);
    result = {{"objective", "sphere-5d"}, {"best_f", r.best_f}, {"converged", r.best_f < 1e-9}};
  } else {
    auto quad = [](const Eigen::VectorXd& x) { return (x(0) - 0.3) * (x(0) - 0.3); };
    BayesOptions opt;
    opt.seed = c.seed;
    const auto r = bayesopt_run(quad, {{0.0, 1.0}}, opt);
    result = {{"objective", "quadratic-1d"}, {"best_x", r.best_x(0)}, {"best_y", r.best_y}, {"converged", std::abs(r.best_x(0) - 0.3) < 0.1}};
  }
  write_json(m.path("selftest.json"), result);
  std::cout << result.dump(2) << '\n';
  return result["converged"].get<bool>() ? 0 : 1;
}

int cmd_optimize(const OptimizeArgs& args, const Common& c, Manifest& m) {
  if (args.method != "cmaes" && args.method != "bayes") throw UsageError("--method must be cmaes or bayes");
  if (args.selftest) return optimize_selftest(args, c, m);
  if (args.fitness != "true" && args.fitness != "sim" && args.fitness != "score") throw UsageError("--fitness must be true, sim or score");
  if (args.fitness == "sim" && args.dataset.empty()) throw UsageError("--fitness sim requires --dataset");
  const auto features = parse_features(args.features);
  const auto d = static_cast<Eigen::Index>(features.size());
  Eigen::VectorXd x0 = Eigen::VectorXd::Ones(d);
  if (!args.x0.empty()) {
    if (static_cast<Eigen::Index>(args.x0.size()) != d) throw UsageError("--x0 needs one value per feature");
    x0 = Eigen::Map<const Eigen::VectorXd>(args.x0.data(), d);
  }
  std::vector<bool> frozen(static_cast<std::size_t>(d), false);
  for (auto i : args.freeze) {
    if (i >= frozen.size()) throw UsageError("--freeze index out of range");
    frozen[i] = true;
  }

  const World w = load_world(c);
  m.world(w, c);
  const auto ctx = w.ctx();
  std::vector<RankedPosition> data;
  if (!args.dataset.empty()) data = read_dataset(args.dataset);
  const PlayerSpec opponent = load_player_arg(args.opponent);
  // Every candidate is scored on the same games: common random numbers.
  const std::uint64_t fitness_seed = seed_mix(c.seed, 100);
  const int inner_workers = args.method == "cmaes" ? 1 : c.workers;
  auto objective = [&](const Eigen::VectorXd& x) {
    const EvalModel model = linear_model(features, std::vector<double>(x.data(), x.data() + x.size()));
    if (args.fitness == "true") return -f_true(model, FTrueSpec{opponent, args.games, 0.05, inner_workers}, ctx, fitness_seed);
    if (args.fitness == "score")
      return -static_cast<double>(f_score(model, FScoreSpec{opponent, args.games, inner_workers}, ctx, fitness_seed).sum);
    return -f_sim(model, FSimSpec{&data, 10, inner_workers}, ctx);
  };
  m.set("optimize", {{"method", args.method}, {"fitness", args.fitness}, {"features", args.features}, {"games", args.games},
                     {"dataset", args.dataset}, {"opponent", player_to_json(opponent)}, {"frozen", args.freeze}});

  std::ofstream hist(m.path("history.jsonl"));
  std::ofstream csv(m.path("history.csv"));
  Eigen::VectorXd best_x;
  double best_f = 0;
  const auto t0 = std::chrono::steady_clock::now();
  if (args.method == "cmaes") {
    csv << "gen,best_f,gen_best_f,median_f,sigma\n";
    CmaesOptions opt;
    opt.lambda = args.lambda;
    opt.mu = args.mu;
    opt.seed = c.seed;
    opt.frozen = frozen;
    opt.workers = c.workers;
    opt.on_generation = [&](const CmaesGeneration& g) {
      hist << cmaes_generation_to_json(g).dump() << std::endl;
      csv << g.gen << ',' << g.best_f << ',' << g.gen_best_f << ',' << g.median_f << ',' << g.sigma << std::endl;
    };
    const auto r = cmaes_run(objective, x0, args.sigma, args.generations, opt);
    best_x = r.best_x;
    best_f = r.best_f;
  } else {
    csv << "iter,y,best_y\n";
    std::vector<std::pair<double, double>> bounds;
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < d; ++i)
      if (!frozen[static_cast<std::size_t>(i)]) {
        free.push_back(i);
        bounds.emplace_back(args.lower, args.upper);
      }
    if (free.empty()) throw UsageError("every coordinate is frozen");
    auto expand = [&](const Eigen::VectorXd& z) {
      Eigen::VectorXd x = x0;
      for (std::size_t k = 0; k < free.size(); ++k) x(free[k]) = z(static_cast<Eigen::Index>(k));
      return x;
    };
    BayesOptions opt;
    opt.init_points = args.init_points;
    opt.iterations = args.iterations;
    opt.seed = c.seed;
    opt.workers = c.workers;
    opt.on_iteration = [&](const json& j) {
      hist << j.dump() << std::endl;
      csv << j["iter"] << ',' << j["y"] << ',' << j["best_y"] << std::endl;
    };
    const auto r = bayesopt_run([&](const Eigen::VectorXd& z) { return objective(expand(z)); }, bounds, opt);
    best_x = expand(r.best_x);
    best_f = r.best_y;
  }
  m.time("optimize_s", seconds_since(t0));
  const EvalModel best = linear_model(features, std::vector<double>(best_x.data(), best_x.data() + best_x.size()));
  write_json(m.path("best_model.json"), model_to_json(best));
  const json summary = {{"best_f", best_f}, {"fitness_value", -best_f}, {"best_model", model_to_json(best)}};
  write_json(m.path("summary.json"), summary);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct DatasetArgs {
  std::size_t n = 100;
  double inclusion = 0.25;
  int candidates = 10, plies = 2, rollouts = 50;
  std::string model;
};

int cmd_dataset(const DatasetArgs& args, const Common& c, Manifest& m) {
  const World w = load_world(c);
  m.world(w, c);
  ChampionshipSpec spec{load_model_arg(args.model), args.candidates, args.plies, args.rollouts, std::nullopt, 1.0};
  SamplerSpec sampler;
  sampler.inclusion = args.inclusion;
  m.set("labeler", player_to_json(spec));
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = generate_dataset(args.n, spec, sampler, w.ctx(), c.seed, c.workers);
  m.time("generate_s", seconds_since(t0));
  const auto split = split_dataset(data, seed_mix(c.seed, 2));
  write_dataset(data, m.path("positions.jsonl"));
  write_dataset(split.train, m.path("train.jsonl"));
  write_dataset(split.val, m.path("val.jsonl"));
  const json summary = {{"positions", data.size()}, {"train", split.train.size()}, {"val", split.val.size()}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_export(const std::string& data_path, const Common& c, Manifest& m) {
  const GameConfig cfg = c.config.empty() ? default_config() : load_config(c.config);
  m.set("config", config_to_json(cfg));
  const auto data = read_dataset(data_path);
  const auto out = m.path("tensors.sbt1");
  export_tensor_dataset(data, cfg, out);
  const json summary = {{"records", data.size()}, {"bytes", fs::file_size(out)}, {"path", out.string()}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

struct TrainArgs {
  std::string data, train, val;
  std::vector<std::string> features{"move_score", "leave_value", "leave_playability", "cv_diff"};
  std::vector<int> hidden{16};
  std::string activation = "tanh";
  TrainOptions opt;
};

int cmd_train(TrainArgs args, const Common& c, Manifest& m) {
  std::vector<RankedPosition> train, val;
  if (!args.data.empty()) {
    if (!args.train.empty() || !args.val.empty()) throw UsageError("use either --data or --train/--val");
    auto split = split_dataset(read_dataset(args.data), seed_mix(c.seed, 2));
    train = std::move(split.train);
    val = std::move(split.val);
  } else {
    if (args.train.empty() || args.val.empty()) throw UsageError("need --data, or both --train and --val");
    train = read_dataset(args.train);
    val = read_dataset(args.val);
  }
  const auto features = parse_features(args.features);
  args.opt.hidden = args.hidden;
  args.opt.activation = activation_from_name(args.activation);
  args.opt.seed = c.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = train_ranknet_mlp(rank_lists(train, features), rank_lists(val, features), args.opt);
  m.time("train_s", seconds_since(t0));
  std::ofstream jl(m.path("curves.jsonl"));
  std::ofstream csv(m.path("curves.csv"));
  csv << "epoch,train_loss,val_loss,train_accuracy,val_accuracy\n";
  for (const auto& e : r.curves) {
    jl << epoch_to_json(e).dump() << '\n';
    csv << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.train_accuracy << ',' << e.val_accuracy << '\n';
  }
  const EvalModel model{MlpEval{features, r.net}};
  write_json(m.path("model.json"), model_to_json(model));
  m.set("train", {{"features", args.features}, {"hidden", args.hidden}, {"activation", args.activation},
                  {"learning_rate", args.opt.learning_rate}, {"momentum", args.opt.momentum},
                  {"batch_size", args.opt.batch_size}, {"epochs", args.opt.epochs}});
  const json summary = {{"train_lists", train.size()}, {"val_lists", val.size()}, {"final", epoch_to_json(r.curves.back())},
                        {"e_quackle_val_accuracy", pairwise_accuracy(e_quackle(), val)}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_eval(const std::string& data_path, const std::string& model_arg, const Common& c, Manifest& m) {
  const World w = load_world(c);
  m.world(w, c);
  const auto data = read_dataset(data_path);
  const EvalModel model = load_model_arg(model_arg);
  const auto sim = f_sim_detail(model, FSimSpec{&data, 10, c.workers}, w.ctx());
  std::size_t top5 = 0;
  for (auto k : sim.ranks) top5 += (k >= 1 && k <= 5) ? 1 : 0;
  const json report = {{"model", model_to_json(model)},
                       {"positions", data.size()},
                       {"pairwise_accuracy", pairwise_accuracy(model, data)},
                       {"f_sim", sim.sum},
                       {"f_sim_mean", sim.mean},
                       {"best_in_top5", static_cast<double>(top5) / static_cast<double>(data.size())}};
  write_json(m.path("eval.json"), report);
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_bounds(double p_hat, double delta, long long n, Manifest& m) {
  if (n < 1) throw UsageError("--n must be at least 1");
  if (!(delta > 0 && delta < 1)) throw UsageError("--delta must lie in (0, 1)");
  if (!(p_hat >= 0 && p_hat <= 1)) throw UsageError("--p-hat must lie in [0, 1]");
  const auto kl = kl_confidence_interval(p_hat, delta, n);
  const json report = {{"p_hat", p_hat},
                       {"delta", delta},
                       {"n", n},
                       {"hoeffding_half_width", hoeffding_half_width(delta, n)},
                       {"kl_interval", {kl.lo, kl.hi}},
                       {"kl_half_width", (kl.hi - kl.lo) / 2}};
  write_json(m.path("bounds.json"), report);
  std::cout << report.dump(2) << '\n';
  return 0;
}

struct LeavesArgs {
  long long games = 1000;
  int max_leave = 6, min_support = 20;
};

int cmd_leaves(const LeavesArgs& args, const Common& c, Manifest& m) {
  const World w = load_world(c);
  m.world(w, c);
  MatchOptions opt;
  opt.keep_games = true;
  const auto t0 = std::chrono::steady_clock::now();
  const auto st = run_match(SpeedySpec{}, SpeedySpec{}, args.games, 0.05, c.seed, c.workers, w.ctx(), opt);
  std::vector<std::vector<LoggedMove>> logs;
  for (const auto& g : st.games) logs.push_back(g.log);
  const auto table = build_leave_table(logs, args.max_leave, args.min_support, w.leaves);
  m.time("selfplay_s", seconds_since(t0));
  write_json(m.path("leaves.json"), table.to_json());
  const json summary = {{"games", args.games}, {"entries", table.size()}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scrabble research workbench: self-play, evaluator tuning and imitation datasets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("scrabble_lab ") + SCRABBLE_LAB_VERSION);
  Common common;
  std::function<int(Manifest&)> run;

  MatchArgs match;
  auto* m = app.add_subcommand("match", "Play a match between two player specs and report win-rate bounds");
  m->add_option("--a", match.a, "Player spec JSON for A")->required();
  m->add_option("--b", match.b, "Player spec JSON for B")->required();
  m->add_option("--games", match.games, "Number of games")->capture_default_str()->check(CLI::PositiveNumber);
  m->add_option("--delta", match.delta, "Confidence level parameter")->capture_default_str();
  m->add_option("--seating", match.seating, "alternate, fixed or paired")->capture_default_str();
  m->add_flag("--games-log", match.games_log, "Also write every game to games.jsonl");
  add_common(m, common);
  m->callback([&] { run = [&](Manifest& mf) { return cmd_match(match, common, mf); }; });

  OptimizeArgs opt;
  auto* o = app.add_subcommand("optimize", "Tune linear evaluator weights with CMA-ES or Bayesian optimization");
  o->add_option("--method", opt.method, "cmaes or bayes")->capture_default_str();
  o->add_option("--fitness", opt.fitness, "true, sim or score")->capture_default_str();
  o->add_option("--features", opt.features, "Linear model features")->capture_default_str();
  o->add_option("--x0", opt.x0, "Start weights (default all 1)");
  o->add_option("--freeze", opt.freeze, "Indices of weights held at x0");
  o->add_option("--opponent", opt.opponent, "Opponent player spec JSON (default Speedy e_quackle)");
  o->add_option("--dataset", opt.dataset, "Ranked-position JSONL, required for --fitness sim");
  o->add_option("--games", opt.games, "Games per fitness evaluation")->capture_default_str()->check(CLI::PositiveNumber);
  o->add_option("--generations", opt.generations, "CMA-ES generations")->capture_default_str()->check(CLI::NonNegativeNumber);
  o->add_option("--sigma", opt.sigma, "CMA-ES initial step size")->capture_default_str();
  o->add_option("--lambda", opt.lambda, "CMA-ES population size")->capture_default_str();
  o->add_option("--mu", opt.mu, "CMA-ES parents")->capture_default_str();
  o->add_option("--init-points", opt.init_points, "BO initial design size")->capture_default_str();
  o->add_option("--iterations", opt.iterations, "BO iterations")->capture_default_str()->check(CLI::NonNegativeNumber);
  o->add_option("--lower", opt.lower, "BO lower bound per weight")->capture_default_str();
  o->add_option("--upper", opt.upper, "BO upper bound per weight")->capture_default_str();
  o->add_flag("--selftest", opt.selftest, "Run the optimizer on a synthetic benchmark instead");
  add_common(o, common);
  o->callback([&] { run = [&](Manifest& mf) { return cmd_optimize(opt, common, mf); }; });

  DatasetArgs ds;
  auto* d = app.add_subcommand("dataset", "Generate championship-ranked positions and a 97:3 split");
  d->add_option("--n", ds.n, "Number of positions")->capture_default_str()->check(CLI::PositiveNumber);
  d->add_option("--inclusion", ds.inclusion, "Probability of keeping a self-play position")->capture_default_str();
  d->add_option("--candidates", ds.candidates, "Championship candidates")->capture_default_str();
  d->add_option("--plies", ds.plies, "Championship plies")->capture_default_str();
  d->add_option("--rollouts", ds.rollouts, "Championship rollouts")->capture_default_str();
  d->add_option("--model", ds.model, "Labeler model JSON (default e_quackle)");
  add_common(d, common);
  d->callback([&] { run = [&](Manifest& mf) { return cmd_dataset(ds, common, mf); }; });

  std::string export_data;
  auto* e = app.add_subcommand("export", "Write a ranked-position dataset as SBT1 tensors");
  e->add_option("--data", export_data, "Ranked-position JSONL")->required();
  e->add_option("--config", common.config, "Game config JSON (default $SCRABBLE_LAB_CONFIG, else the standard game)");
  add_common(e, common, false);
  e->callback([&] { run = [&](Manifest& mf) { return cmd_export(export_data, common, mf); }; });

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the feature RankNet MLP");
  t->add_option("--data", tr.data, "Ranked-position JSONL, split 97:3 by seed");
  t->add_option("--train", tr.train, "Training JSONL");
  t->add_option("--val", tr.val, "Validation JSONL");
  t->add_option("--features", tr.features, "Input features")->capture_default_str();
  t->add_option("--hidden", tr.hidden, "Hidden layer widths (1 or 2)")->capture_default_str();
  t->add_option("--activation", tr.activation, "tanh or relu")->capture_default_str();
  t->add_option("--lr", tr.opt.learning_rate, "Learning rate")->capture_default_str();
  t->add_option("--momentum", tr.opt.momentum, "Momentum")->capture_default_str();
  t->add_option("--batch", tr.opt.batch_size, "Lists per minibatch")->capture_default_str();
  t->add_option("--epochs", tr.opt.epochs, "Epochs")->capture_default_str()->check(CLI::NonNegativeNumber);
  add_common(t, common, false);
  t->callback([&] { run = [&](Manifest& mf) { return cmd_train(tr, common, mf); }; });

  std::string eval_data, eval_model;
  auto* v = app.add_subcommand("eval", "Report pairwise accuracy and f_sim of a model on a dataset");
  v->add_option("--data", eval_data, "Ranked-position JSONL")->required();
  v->add_option("--model", eval_model, "Model JSON or e_quackle")->capture_default_str();
  add_common(v, common);
  v->callback([&] { run = [&](Manifest& mf) { return cmd_eval(eval_data, eval_model, common, mf); }; });

  double p_hat = 0.5, delta = 0.05;
  long long n = 0;
  auto* b = app.add_subcommand("bounds", "Print Hoeffding and KL confidence bounds for a win rate");
  b->add_option("--p-hat", p_hat, "Observed win rate")->capture_default_str();
  b->add_option("--delta", delta, "Confidence level parameter")->capture_default_str();
  b->add_option("--n", n, "Number of games")->required();
  add_common(b, common, false);
  b->callback([&] { run = [&](Manifest& mf) { return cmd_bounds(p_hat, delta, n, mf); }; });

  LeavesArgs lv;
  auto* l = app.add_subcommand("leaves", "Build a leave table from Speedy self-play");
  l->add_option("--games", lv.games, "Self-play games")->capture_default_str()->check(CLI::PositiveNumber);
  l->add_option("--max-leave", lv.max_leave, "Largest leave size tabulated")->capture_default_str();
  l->add_option("--min-support", lv.min_support, "Minimum occurrences per leave")->capture_default_str();
  add_common(l, common);
  l->callback([&] { run = [&](Manifest& mf) { return cmd_leaves(lv, common, mf); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Manifest manifest(command, std::vector<std::string>(argv, argv + argc),
                      common.out.empty() ? fs::path("out") / command : fs::path(common.out));
    const int code = run(manifest);
    manifest.write(common.seed);
    return code;
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::domain_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}
