#include <doctest.h>

#include <json.hpp>

#include <fstream>
#include <sstream>

#include "rnf/checkpoint.hpp"
#include "rnf/cli.hpp"
#include "rnf/config.hpp"
#include "rnf/inference.hpp"
#include "test_util.hpp"

using namespace rnf;
using rnf::test::TempDir;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string lgssm_config() {
  return "lgssm.state_dim = 1\n"
         "lgssm.input_dim = 1\n"
         "lgssm.obs_dim = 1\n"
         "lgssm.A = 0.9\n"
         "lgssm.B = 0.5\n"
         "lgssm.H = 1.0\n"
         "lgssm.Q = 0.1\n"
         "lgssm.R = 0.1\n"
         "lgssm.c = 0.0\n"
         "lgssm.D = 1.0\n"
         "sim.length = 400\n"
         "sim.seed = 5\n";
}

std::string tiny_train_config(const std::string& data_path) {
  return "data.path = " + data_path +
         "\n"
         "data.format = trajectory\n"
         "train.state_size = 4\n"
         "train.minibatch = 4\n"
         "train.segment_length = 25\n"
         "train.max_epochs = 2\n"
         "train.learning_rate = 0.001\n"
         "train.seed = 11\n";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("key-value config parsing") {
  const KeyValueConfig cfg = KeyValueConfig::parse_string(
      "# comment\n"
      "train.alpha_x = 0.5\n"
      "data.path = /tmp/x.csv  # trailing comment\n"
      "eval.tau = 5, 10\n");
  CHECK(cfg.get_double("train.alpha_x", 0.0) == 0.5);
  CHECK(cfg.get_string("data.path") == "/tmp/x.csv");
  const auto taus = cfg.get_sizes("eval.tau");
  REQUIRE(taus.size() == 2);
  CHECK(taus[0] == 5);
  CHECK(taus[1] == 10);

  CHECK_THROWS_AS(KeyValueConfig::parse_string("not a key value line\n"), ConfigError);
  CHECK_THROWS_AS(cfg.get_double("data.path", 0.0), ConfigError);
  CHECK_THROWS_AS(cfg.require_known({"train.alpha_x"}), ConfigError);
}

TEST_CASE("checkpoint round trip is byte identical") {
  TempDir dir("ckpt");
  RnfModel model = make_model(Variant::VrnfKf, 3, 2, 1, 501);
  rnf::test::randomize_params(model.params, 0.7, 502);
  NormStats norm;
  norm.method = NormMethod::Zscore;
  norm.offset = {0.1, 0.2, 0.3};
  norm.scale = {1.0, 2.0, 3.0};

  const auto p1 = dir.path() / "a.rnf";
  const auto p2 = dir.path() / "b.rnf";
  save_checkpoint(model, norm, p1);
  const LoadedCheckpoint loaded = load_checkpoint(p1);
  save_checkpoint(loaded.model, loaded.norm, p2);
  CHECK(read_file(p1) == read_file(p2));

  REQUIRE(loaded.norm.has_value());
  CHECK(loaded.norm->method == NormMethod::Zscore);
  CHECK(loaded.norm->offset[2] == 0.3);
}

TEST_CASE("loaded model reproduces predictions exactly") {
  TempDir dir("ckpt2");
  RnfModel model = make_model(Variant::Rnf, 4, 2, 1, 503);
  rnf::test::randomize_params(model.params, 0.6, 504);
  const auto path = dir.path() / "m.rnf";
  save_checkpoint(model, std::nullopt, path);
  const LoadedCheckpoint loaded = load_checkpoint(path);

  BeliefState ba = initial_belief(4), bb = initial_belief(4);
  Rng rng(505);
  for (int t = 0; t < 10; ++t) {
    const std::vector<double> u{rng.normal(), rng.normal()};
    const std::vector<double> y{rng.normal()};
    const FilterOutput oa = filter_step(model, ba, {true, true}, u, y);
    const FilterOutput ob = filter_step(loaded.model, bb, {true, true}, u, y);
    CHECK(oa.prediction.mean[0] == ob.prediction.mean[0]);
    CHECK(oa.prediction.sigma[0] == ob.prediction.sigma[0]);
    ba = oa.belief;
    bb = ob.belief;
  }
}

TEST_CASE("tampered checkpoint shape is rejected with the tensor name") {
  TempDir dir("ckpt3");
  RnfModel model = make_model(Variant::Rnf, 3, 2, 1, 507);
  const auto path = dir.path() / "m.rnf";
  save_checkpoint(model, std::nullopt, path);

  auto doc = nlohmann::ordered_json::parse(read_file(path));
  doc["params"][0]["shape"] = {99, 1};
  write_file(path, doc.dump(2) + "\n");
  try {
    load_checkpoint(path);
    FAIL("expected a shape error");
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find(doc["params"][0]["name"].get<std::string>()) != std::string::npos);
    CHECK(what.find("shape") != std::string::npos);
  }

  write_file(path, "{}");
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
}

TEST_CASE("simulate writes the trajectory, oracle and resolved config") {
  TempDir dir("sim");
  const auto cfg_path = dir.path() / "sim.cfg";
  write_file(cfg_path, lgssm_config());
  const int rc = cli::dispatch({"rnf", "simulate", "--config", cfg_path.string(), "--out",
                                dir.path().string()});
  REQUIRE(rc == 0);
  CHECK(std::filesystem::exists(dir.path() / "trajectory.csv"));
  CHECK(std::filesystem::exists(dir.path() / "oracle.csv"));
  CHECK(std::filesystem::exists(dir.path() / "resolved-config.txt"));

  const Trajectory t = load_trajectory_csv(dir.path() / "trajectory.csv");
  CHECK(t.length == 400);
  const std::string oracle = read_file(dir.path() / "oracle.csv");
  CHECK(oracle.rfind("t,known_mean,known_sigma,marginalised_mean,marginalised_sigma", 0) == 0);
}

TEST_CASE("train, evaluate and predict round trip through the CLI") {
  TempDir dir("cli");
  const auto sim_cfg = dir.path() / "sim.cfg";
  write_file(sim_cfg, lgssm_config());
  REQUIRE(cli::dispatch({"rnf", "simulate", "--config", sim_cfg.string(), "--out",
                         dir.path().string()}) == 0);

  const auto train_cfg = dir.path() / "train.cfg";
  write_file(train_cfg, tiny_train_config((dir.path() / "trajectory.csv").string()));
  const auto out_train = dir.path() / "run";
  REQUIRE(cli::dispatch({"rnf", "train", "--config", train_cfg.string(), "--out",
                         out_train.string()}) == 0);
  CHECK(std::filesystem::exists(out_train / "checkpoint.rnf"));
  CHECK(std::filesystem::exists(out_train / "training-log.txt"));
  CHECK(std::filesystem::exists(out_train / "resolved-config.txt"));

  const std::string log = read_file(out_train / "training-log.txt");
  CHECK(log.find("epoch=1 train=") != std::string::npos);

  const auto out_eval = dir.path() / "eval";
  REQUIRE(cli::dispatch({"rnf", "evaluate", "--config", train_cfg.string(), "--checkpoint",
                         (out_train / "checkpoint.rnf").string(), "--out", out_eval.string(),
                         "--tau", "3,5", "--input-mode", "both"}) == 0);
  const auto metrics = nlohmann::json::parse(read_file(out_eval / "metrics.json"));
  CHECK(metrics.at("one_step").contains("mse"));
  CHECK(metrics.at("one_step").contains("normalized_mse"));
  CHECK(metrics.at("one_step").contains("picp"));
  CHECK(metrics.at("one_step").at("tau") == 1);
  CHECK(metrics.at("multistep").size() == 4);  // two taus x two modes
  CHECK(metrics.at("multistep")[0].contains("input_mode"));

  const auto out_pred = dir.path() / "pred";
  REQUIRE(cli::dispatch({"rnf", "predict", "--config", train_cfg.string(), "--checkpoint",
                         (out_train / "checkpoint.rnf").string(), "--out", out_pred.string()}) == 0);
  const std::string csv = read_file(out_pred / "predictions.csv");
  CHECK(csv.rfind("t,mean,sigma,lo90,hi90", 0) == 0);
}

TEST_CASE("search writes a leaderboard") {
  TempDir dir("search");
  const auto sim_cfg = dir.path() / "sim.cfg";
  write_file(sim_cfg, lgssm_config());
  REQUIRE(cli::dispatch({"rnf", "simulate", "--config", sim_cfg.string(), "--out",
                         dir.path().string()}) == 0);

  const auto cfg = dir.path() / "search.cfg";
  write_file(cfg, tiny_train_config((dir.path() / "trajectory.csv").string()) +
                      "train.max_epochs = 1\nsearch.iterations = 2\n");
  REQUIRE(cli::dispatch({"rnf", "search", "--config", cfg.string(), "--out",
                         dir.path().string()}) == 0);
  const std::string board = read_file(dir.path() / "leaderboard.csv");
  CHECK(board.rfind("rank,draw,val_nll", 0) == 0);
  // header + two candidate lines
  CHECK(std::count(board.begin(), board.end(), '\n') == 3);
}

TEST_CASE("exit codes") {
  TempDir dir("exit");
  // unknown command
  CHECK(cli::dispatch({"rnf", "frobnicate"}) == 2);
  // unknown config key
  const auto bad = dir.path() / "bad.cfg";
  write_file(bad, "no.such.key = 1\n");
  CHECK(cli::dispatch({"rnf", "simulate", "--config", bad.string(), "--out",
                       dir.path().string()}) == 2);
  // runtime failure: checkpoint file does not exist
  CHECK(cli::dispatch({"rnf", "evaluate", "--config", "", "--checkpoint",
                       (dir.path() / "missing.rnf").string(), "--out", dir.path().string()}) == 1);
}

TEST_CASE("train is reproducible: identical seeds give identical artifacts") {
  TempDir dir("repro");
  const auto sim_cfg = dir.path() / "sim.cfg";
  write_file(sim_cfg, lgssm_config());
  REQUIRE(cli::dispatch({"rnf", "simulate", "--config", sim_cfg.string(), "--out",
                         dir.path().string()}) == 0);
  const auto cfg = dir.path() / "train.cfg";
  write_file(cfg, tiny_train_config((dir.path() / "trajectory.csv").string()));

  const auto out_a = dir.path() / "a";
  const auto out_b = dir.path() / "b";
  REQUIRE(cli::dispatch({"rnf", "train", "--config", cfg.string(), "--out", out_a.string()}) == 0);
  REQUIRE(cli::dispatch({"rnf", "train", "--config", cfg.string(), "--out", out_b.string()}) == 0);
  CHECK(read_file(out_a / "checkpoint.rnf") == read_file(out_b / "checkpoint.rnf"));
}

}  // TEST_SUITE
