#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "scrabble_lab_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args, const std::string& env = "") {
  const fs::path log = work_dir() / "stdout.txt";
  const std::string cmd = "cd " + work_dir().string() + " && " + env + " " + SCRABBLE_LAB_CLI + " " + args + " > " + log.string() +
                          " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

void write(const std::string& name, const std::string& text) { std::ofstream(work_dir() / name) << text; }

TEST(Cli, HelpForEveryCommand) {
  EXPECT_EQ(run("--help").code, 0);
  for (const char* cmd : {"match", "optimize", "dataset", "export", "train", "eval", "bounds", "leaves"}) {
    const auto r = run(std::string(cmd) + " --help");
    EXPECT_EQ(r.code, 0) << cmd;
    EXPECT_NE(r.out.find("--seed"), std::string::npos) << cmd;
    EXPECT_NE(r.out.find("--out"), std::string::npos) << cmd;
  }
  EXPECT_NE(run("match --help").out.find("--workers"), std::string::npos);
  EXPECT_EQ(run("nonsense").code, 2);
  EXPECT_EQ(run("bounds --n").code, 2);
}

TEST(Cli, Bounds) {
  auto r = run("bounds --p-hat 0.438 --delta 0.001 --n 50000 --out bounds");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = read_json(work_dir() / "bounds/bounds.json");
  EXPECT_NEAR(j["kl_half_width"].get<double>(), 0.0082, 1e-4);
  EXPECT_NEAR(run("bounds --p-hat 0.1 --delta 0.001 --n 5000 --out b2").code, 0, 0);
  EXPECT_NEAR(read_json(work_dir() / "b2/bounds.json")["hoeffding_half_width"].get<double>(), 0.0276, 1e-4);
  EXPECT_EQ(run("bounds --n 0 --out b3").code, 2);
  EXPECT_TRUE(fs::exists(work_dir() / "bounds/manifest.json"));
}

TEST(Cli, MatchReportIsDeterministic) {
  write("random.json", R"({"type":"random"})");
  write("broken.json", R"({"type":"random",)");
  write("unknown.json", R"({"type":"wizard"})");
  ASSERT_EQ(run("match --a random.json --b random.json --games 10 --seed 4 --out m1").code, 0);
  ASSERT_EQ(run("match --a random.json --b random.json --games 10 --seed 4 --workers 3 --out m2").code, 0);
  EXPECT_EQ(read_json(work_dir() / "m1/report.json")["n_games"], 10);
  EXPECT_EQ(slurp(work_dir() / "m1/report.json"), slurp(work_dir() / "m2/report.json"));
  const auto manifest = read_json(work_dir() / "m1/manifest.json");
  EXPECT_EQ(manifest["command"], "match");
  EXPECT_EQ(manifest["master_seed"], 4);
  EXPECT_TRUE(manifest.contains("config") && manifest.contains("timings") && manifest.contains("artifact_version"));

  auto bad = run("match --a broken.json --b random.json --games 2 --out m3");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.out.find("broken.json"), std::string::npos) << bad.out;
  EXPECT_EQ(run("match --a unknown.json --b random.json --games 2 --out m3").code, 2);
  EXPECT_EQ(run("match --a missing.json --b random.json --games 2 --out m3").code, 2);
}

TEST(Cli, ConfigEnvironmentVariable) {
  write("random.json", R"({"type":"random"})");
  write("bad_config.json", R"({"tiles": 3})");
  EXPECT_EQ(run("match --a random.json --b random.json --games 2 --out m4", "SCRABBLE_LAB_CONFIG=bad_config.json").code, 2);
  fs::copy_file(fs::path(SCRABBLE_LAB_DATA_DIR) / "standard.json", work_dir() / "standard.json", fs::copy_options::overwrite_existing);
  EXPECT_EQ(run("match --a random.json --b random.json --games 2 --out m5", "SCRABBLE_LAB_CONFIG=standard.json").code, 0);
  EXPECT_EQ(read_json(work_dir() / "m5/manifest.json")["config_source"], "standard.json");
}

TEST(Cli, Optimize) {
  EXPECT_EQ(run("optimize --fitness sim --out o1").code, 2);
  EXPECT_EQ(run("optimize --method annealing --out o1").code, 2);
  ASSERT_EQ(run("optimize --generations 0 --games 2 --x0 1.0 0.5 --out o2").code, 0);
  const auto best = read_json(work_dir() / "o2/best_model.json");
  EXPECT_EQ(best["weights"], nlohmann::json::array({1.0, 0.5}));
  const auto st = run("optimize --selftest --out o3");
  EXPECT_EQ(st.code, 0);
  EXPECT_TRUE(read_json(work_dir() / "o3/selftest.json")["converged"].get<bool>());
}

TEST(Cli, DatasetExportTrainEval) {
  ASSERT_EQ(run("dataset --n 12 --candidates 4 --rollouts 2 --seed 5 --out ds").code, 0);
  const auto lines = slurp(work_dir() / "ds/positions.jsonl");
  EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), 12);

  ASSERT_EQ(run("export --data ds/positions.jsonl --out e1").code, 0);
  ASSERT_EQ(run("export --data ds/positions.jsonl --out e2").code, 0);
  EXPECT_EQ(slurp(work_dir() / "e1/tensors.sbt1"), slurp(work_dir() / "e2/tensors.sbt1"));
  ASSERT_EQ(run("dataset --n 12 --candidates 4 --rollouts 2 --seed 5 --out ds2").code, 0);
  EXPECT_EQ(lines, slurp(work_dir() / "ds2/positions.jsonl"));

  ASSERT_EQ(run("train --data ds/positions.jsonl --epochs 3 --out tr").code, 0);
  EXPECT_TRUE(fs::exists(work_dir() / "tr/model.json"));
  const auto curves = slurp(work_dir() / "tr/curves.csv");
  EXPECT_EQ(std::count(curves.begin(), curves.end(), '\n'), 5);

  for (const std::string model : {"e_quackle", "tr/model.json"}) {
    ASSERT_EQ(run("eval --data ds/positions.jsonl --model " + model + " --out ev").code, 0) << model;
    const double acc = read_json(work_dir() / "ev/eval.json")["pairwise_accuracy"].get<double>();
    EXPECT_GE(acc, 0.0);
    EXPECT_LE(acc, 1.0);
  }
  EXPECT_EQ(run("train --out tr2").code, 2);
  EXPECT_EQ(run("eval --data missing.jsonl --out ev2").code, 2);
}

}  // namespace
