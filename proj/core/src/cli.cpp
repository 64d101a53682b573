#include "rnf/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "rnf/checkpoint.hpp"
#include "rnf/config.hpp"
#include "rnf/dataset.hpp"
#include "rnf/evaluate.hpp"
#include "rnf/kalman.hpp"
#include "rnf/train.hpp"

namespace rnf::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

const std::vector<std::string> kKnownKeys = {
    "train.alpha_x",       "train.alpha_y",      "train.missing_rate",  "train.dropout",
    "train.state_size",    "train.learning_rate", "train.max_grad_norm", "train.minibatch",
    "train.segment_length", "train.max_epochs",   "train.patience",      "train.variant",
    "train.train_samples", "train.val_samples",  "train.test_samples",  "train.kl_all_stages",
    "train.threads",       "train.seed",
    "data.path",           "data.format",        "data.test_path",      "data.split",
    "data.normalize",
    "eval.tau",            "eval.input_mode",    "eval.level",          "eval.horizon_only",
    "lgssm.state_dim",     "lgssm.input_dim",    "lgssm.obs_dim",       "lgssm.A",
    "lgssm.B",             "lgssm.H",            "lgssm.Q",             "lgssm.R",
    "lgssm.c",             "lgssm.D",
    "sim.length",          "sim.seed",
    "search.iterations",
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Flag values that override config file entries.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<std::vector<std::size_t>> taus;
  std::optional<std::string> input_mode;
};

KeyValueConfig load_config(const std::string& config_path, const Overrides& ov) {
  KeyValueConfig cfg;
  if (!config_path.empty()) cfg = KeyValueConfig::parse_file(config_path);
  cfg.require_known(kKnownKeys);
  if (ov.seed) {
    cfg.set("train.seed", std::to_string(*ov.seed));
    cfg.set("sim.seed", std::to_string(*ov.seed));
  }
  if (ov.variant) cfg.set("train.variant", *ov.variant);
  if (ov.taus) {
    std::string list;
    for (std::size_t t : *ov.taus) {
      if (!list.empty()) list += ",";
      list += std::to_string(t);
    }
    cfg.set("eval.tau", list);
  }
  if (ov.input_mode) cfg.set("eval.input_mode", *ov.input_mode);
  return cfg;
}

TrainConfig read_train_config(const KeyValueConfig& cfg, KeyValueConfig& resolved) {
  TrainConfig t;
  t.alpha_x = cfg.get_double("train.alpha_x", t.alpha_x);
  t.alpha_y = cfg.get_double("train.alpha_y", t.alpha_y);
  t.missing_rate = cfg.get_double("train.missing_rate", t.missing_rate);
  t.dropout = cfg.get_double("train.dropout", t.dropout);
  t.state_size = cfg.get_size("train.state_size", t.state_size);
  t.learning_rate = cfg.get_double("train.learning_rate", t.learning_rate);
  t.max_grad_norm = cfg.get_double("train.max_grad_norm", t.max_grad_norm);
  t.minibatch = cfg.get_size("train.minibatch", t.minibatch);
  t.segment_length = cfg.get_size("train.segment_length", t.segment_length);
  t.max_epochs = cfg.get_size("train.max_epochs", t.max_epochs);
  t.patience = cfg.get_size("train.patience", t.patience);
  t.variant = variant_from_name(cfg.get_string("train.variant", "rnf"));
  t.train_samples = cfg.get_size("train.train_samples", t.train_samples);
  t.val_samples = cfg.get_size("train.val_samples", t.val_samples);
  t.test_samples = cfg.get_size("train.test_samples", t.test_samples);
  t.kl_all_stages = cfg.get_bool("train.kl_all_stages", t.kl_all_stages);
  t.threads = cfg.get_size("train.threads", t.threads);
  t.seed = cfg.get_u64("train.seed", t.seed);

  resolved.set("train.alpha_x", format_double(t.alpha_x));
  resolved.set("train.alpha_y", format_double(t.alpha_y));
  resolved.set("train.missing_rate", format_double(t.missing_rate));
  resolved.set("train.dropout", format_double(t.dropout));
  resolved.set("train.state_size", std::to_string(t.state_size));
  resolved.set("train.learning_rate", format_double(t.learning_rate));
  resolved.set("train.max_grad_norm", format_double(t.max_grad_norm));
  resolved.set("train.minibatch", std::to_string(t.minibatch));
  resolved.set("train.segment_length", std::to_string(t.segment_length));
  resolved.set("train.max_epochs", std::to_string(t.max_epochs));
  resolved.set("train.patience", std::to_string(t.patience));
  resolved.set("train.variant", variant_name(t.variant));
  resolved.set("train.train_samples", std::to_string(t.train_samples));
  resolved.set("train.val_samples", std::to_string(t.val_samples));
  resolved.set("train.test_samples", std::to_string(t.test_samples));
  resolved.set("train.kl_all_stages", t.kl_all_stages ? "true" : "false");
  resolved.set("train.threads", std::to_string(t.threads));
  resolved.set("train.seed", std::to_string(t.seed));
  return t;
}

struct DataConfig {
  std::string path;
  std::string format = "trajectory";  // trajectory | uci
  std::string test_path;
  SplitFractions split;
  NormMethod normalize = NormMethod::None;
};

DataConfig read_data_config(const KeyValueConfig& cfg, KeyValueConfig& resolved) {
  DataConfig d;
  d.path = cfg.get_string("data.path", "");
  d.format = cfg.get_string("data.format", d.format);
  if (d.format != "trajectory" && d.format != "uci") {
    throw ConfigError("data.format must be 'trajectory' or 'uci'");
  }
  d.test_path = cfg.get_string("data.test_path", "");
  const auto fractions = cfg.get_doubles("data.split");
  if (!fractions.empty()) {
    if (fractions.size() != 3) throw ConfigError("data.split needs three fractions");
    d.split = SplitFractions{fractions[0], fractions[1], fractions[2]};
  }
  d.normalize = norm_method_from_name(cfg.get_string("data.normalize", "none"));

  resolved.set("data.path", d.path);
  resolved.set("data.format", d.format);
  if (!d.test_path.empty()) resolved.set("data.test_path", d.test_path);
  resolved.set("data.split", format_double(d.split.train) + "," +
                                 format_double(d.split.validation) + "," +
                                 format_double(d.split.test));
  resolved.set("data.normalize", norm_method_name(d.normalize));
  return d;
}

struct EvalConfig {
  std::vector<std::size_t> taus{5, 10, 20};
  std::string input_mode = "both";  // known | unknown | both
  double level = 0.90;
  bool horizon_only = false;
};

EvalConfig read_eval_config(const KeyValueConfig& cfg, KeyValueConfig& resolved) {
  EvalConfig e;
  const auto taus = cfg.get_sizes("eval.tau");
  if (cfg.has("eval.tau")) e.taus = taus;
  e.input_mode = cfg.get_string("eval.input_mode", e.input_mode);
  if (e.input_mode != "known" && e.input_mode != "unknown" && e.input_mode != "both") {
    throw ConfigError("eval.input_mode must be known, unknown or both");
  }
  e.level = cfg.get_double("eval.level", e.level);
  e.horizon_only = cfg.get_bool("eval.horizon_only", e.horizon_only);

  std::string list;
  for (std::size_t t : e.taus) {
    if (!list.empty()) list += ",";
    list += std::to_string(t);
  }
  resolved.set("eval.tau", list);
  resolved.set("eval.input_mode", e.input_mode);
  resolved.set("eval.level", format_double(e.level));
  resolved.set("eval.horizon_only", e.horizon_only ? "true" : "false");
  return e;
}

Mat read_matrix(const KeyValueConfig& cfg, const std::string& key, std::size_t rows,
                std::size_t cols) {
  const auto values = cfg.get_doubles(key);
  if (values.size() != rows * cols) {
    throw ConfigError("config key '" + key + "': expected " + std::to_string(rows * cols) +
                      " row-major values, got " + std::to_string(values.size()));
  }
  return Mat(rows, cols, values);
}

LgssmSpec read_lgssm(const KeyValueConfig& cfg, KeyValueConfig& resolved) {
  LgssmSpec spec;
  spec.state_dim = cfg.get_size("lgssm.state_dim", 1);
  spec.input_dim = cfg.get_size("lgssm.input_dim", 1);
  spec.obs_dim = cfg.get_size("lgssm.obs_dim", 1);
  spec.A = read_matrix(cfg, "lgssm.A", spec.state_dim, spec.state_dim);
  spec.B = read_matrix(cfg, "lgssm.B", spec.state_dim, spec.input_dim);
  spec.H = read_matrix(cfg, "lgssm.H", spec.obs_dim, spec.state_dim);
  spec.Q = read_matrix(cfg, "lgssm.Q", spec.state_dim, spec.state_dim);
  spec.R = read_matrix(cfg, "lgssm.R", spec.obs_dim, spec.obs_dim);
  spec.c = cfg.get_doubles("lgssm.c");
  if (spec.c.empty()) spec.c.assign(spec.input_dim, 0.0);
  if (spec.c.size() != spec.input_dim) {
    throw ConfigError("config key 'lgssm.c': expected " + std::to_string(spec.input_dim) + " values");
  }
  spec.D = read_matrix(cfg, "lgssm.D", spec.input_dim, spec.input_dim);

  auto mat_text = [](const Mat& m) {
    std::string s;
    for (std::size_t i = 0; i < m.v.size(); ++i) {
      if (i) s += " ";
      s += format_double(m.v[i]);
    }
    return s;
  };
  resolved.set("lgssm.state_dim", std::to_string(spec.state_dim));
  resolved.set("lgssm.input_dim", std::to_string(spec.input_dim));
  resolved.set("lgssm.obs_dim", std::to_string(spec.obs_dim));
  resolved.set("lgssm.A", mat_text(spec.A));
  resolved.set("lgssm.B", mat_text(spec.B));
  resolved.set("lgssm.H", mat_text(spec.H));
  resolved.set("lgssm.Q", mat_text(spec.Q));
  resolved.set("lgssm.R", mat_text(spec.R));
  std::string c_text;
  for (std::size_t i = 0; i < spec.c.size(); ++i) {
    if (i) c_text += " ";
    c_text += format_double(spec.c[i]);
  }
  resolved.set("lgssm.c", c_text);
  resolved.set("lgssm.D", mat_text(spec.D));
  return spec;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_resolved_config(const KeyValueConfig& resolved, const fs::path& out_dir) {
  write_text(out_dir / "resolved-config.txt", resolved.serialize());
}

Trajectory load_data(const DataConfig& data) {
  if (data.path.empty()) throw ConfigError("data.path is required");
  if (data.format == "uci") return load_electricity(data.path);
  return load_trajectory_csv(data.path);
}

std::string training_log_text(const FitResult& fit_result) {
  std::string text;
  for (const EpochRecord& r : fit_result.log) {
    text += "epoch=" + std::to_string(r.epoch) + " train=" + format_double(r.train_loss) +
            " val=" + format_double(r.val_loss) + " wall_s=" + format_double(r.wall_seconds) + "\n";
  }
  return text;
}

int cmd_train(const std::string& config_path, const std::string& out_dir, const Overrides& ov) {
  const KeyValueConfig cfg = load_config(config_path, ov);
  KeyValueConfig resolved;
  const TrainConfig train_cfg = read_train_config(cfg, resolved);
  const DataConfig data_cfg = read_data_config(cfg, resolved);

  const Trajectory raw = load_data(data_cfg);
  const Split split = chronological_split(raw, data_cfg.split);

  std::optional<NormStats> norm;
  Trajectory train_part = split.train;
  Trajectory val_part = split.validation;
  if (data_cfg.normalize != NormMethod::None) {
    auto [normed, stats] = normalize(split.train, data_cfg.normalize, split.train);
    train_part = std::move(normed);
    norm = stats;
    val_part = apply_normalization(split.validation, stats);
  }

  RnfModel model = make_model(train_cfg.variant, train_cfg.state_size, raw.input_dim, raw.obs_dim,
                              train_cfg.seed);
  const FitResult fit_result = fit(model, {train_part}, {val_part}, train_cfg);

  fs::create_directories(out_dir);
  save_checkpoint(model, norm, fs::path(out_dir) / "checkpoint.rnf");
  write_text(fs::path(out_dir) / "training-log.txt", training_log_text(fit_result));
  write_resolved_config(resolved, out_dir);

  std::cout << "trained " << variant_name(train_cfg.variant) << " (J=" << train_cfg.state_size
            << ") for " << fit_result.log.size() << " epochs; best validation NLL "
            << fit_result.best_val << " at epoch " << fit_result.best_epoch << "\n";
  return 0;
}

Trajectory test_partition(const DataConfig& data_cfg, const std::optional<NormStats>& norm) {
  Trajectory test;
  if (!data_cfg.test_path.empty()) {
    test = data_cfg.format == "uci" ? load_electricity(data_cfg.test_path)
                                    : load_trajectory_csv(data_cfg.test_path);
  } else {
    const Trajectory raw = load_data(data_cfg);
    test = chronological_split(raw, data_cfg.split).test;
  }
  if (norm.has_value()) test = apply_normalization(test, *norm);
  return test;
}

int cmd_evaluate(const std::string& config_path, const std::string& checkpoint_path,
                 const std::string& out_dir, const Overrides& ov) {
  const KeyValueConfig cfg = load_config(config_path, ov);
  KeyValueConfig resolved;
  const TrainConfig train_cfg = read_train_config(cfg, resolved);
  const DataConfig data_cfg = read_data_config(cfg, resolved);
  const EvalConfig eval_cfg = read_eval_config(cfg, resolved);
  resolved.set("checkpoint", checkpoint_path);

  const LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
  const Trajectory test = test_partition(data_cfg, loaded.norm);

  EvalOptions options;
  options.taus = eval_cfg.taus;
  options.mode_known = eval_cfg.input_mode != "unknown";
  options.mode_unknown = eval_cfg.input_mode != "known";
  options.level = eval_cfg.level;
  options.horizon_only = eval_cfg.horizon_only;
  options.samples = train_cfg.test_samples;
  options.seed = train_cfg.seed;

  const EvalResult result = evaluate_model(loaded.model, test, options);

  Json doc;
  doc["one_step"] = Json::parse(metric_report_to_json(result.one_step));
  doc["reference_one_step_mse"] = result.reference_mse;
  Json multistep = Json::array();
  for (const MultistepReport& entry : result.multistep) {
    Json j = Json::parse(metric_report_to_json(entry.report));
    j["input_mode"] = entry.mode == ForecastInputs::Known ? "known" : "unknown";
    multistep.push_back(std::move(j));
  }
  doc["multistep"] = std::move(multistep);

  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "metrics.json", doc.dump(2) + "\n");
  write_resolved_config(resolved, out_dir);
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_predict(const std::string& config_path, const std::string& checkpoint_path,
                const std::string& out_dir, const Overrides& ov) {
  const KeyValueConfig cfg = load_config(config_path, ov);
  KeyValueConfig resolved;
  const TrainConfig train_cfg = read_train_config(cfg, resolved);
  const DataConfig data_cfg = read_data_config(cfg, resolved);
  resolved.set("checkpoint", checkpoint_path);

  const LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
  const Trajectory test = test_partition(data_cfg, loaded.norm);

  EvalOptions options;
  options.taus = {};
  options.level = 0.90;
  options.samples = train_cfg.test_samples;
  options.seed = train_cfg.seed;
  const EvalResult result = evaluate_model(loaded.model, test, options);

  const std::size_t O = loaded.model.obs_dim;
  std::string csv = "t";
  auto col = [&](const std::string& base, std::size_t j) {
    return O == 1 ? base : base + "_" + std::to_string(j + 1);
  };
  for (std::size_t j = 0; j < O; ++j) {
    csv += "," + col("mean", j) + "," + col("sigma", j) + "," + col("lo90", j) + "," +
           col("hi90", j);
  }
  csv += "\n";
  for (std::size_t t = 0; t < test.length; ++t) {
    csv += std::to_string(t);
    for (std::size_t j = 0; j < O; ++j) {
      csv += "," + format_double(result.predictions[t].mean[j]);
      csv += "," + format_double(result.predictions[t].sigma[j]);
      csv += "," + format_double(result.intervals.lo[t * O + j]);
      csv += "," + format_double(result.intervals.hi[t * O + j]);
    }
    csv += "\n";
  }

  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "predictions.csv", csv);
  write_resolved_config(resolved, out_dir);
  std::cout << "wrote predictions for " << test.length << " steps\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, const Overrides& ov) {
  const KeyValueConfig cfg = load_config(config_path, ov);
  KeyValueConfig resolved;
  const LgssmSpec spec = read_lgssm(cfg, resolved);
  const std::size_t length = cfg.get_size("sim.length", 1000);
  const std::uint64_t seed = cfg.get_u64("sim.seed", 1);
  resolved.set("sim.length", std::to_string(length));
  resolved.set("sim.seed", std::to_string(seed));

  std::string input_mode = "both";
  if (ov.input_mode) input_mode = *ov.input_mode;
  resolved.set("eval.input_mode", input_mode);

  Rng rng(seed);
  const LgssmSample sample = simulate_lgssm(spec, length, rng);

  fs::create_directories(out_dir);
  write_trajectory_csv(sample.trajectory, fs::path(out_dir) / "trajectory.csv");

  const bool want_known = input_mode != "unknown";
  const bool want_marg = input_mode != "known";
  std::optional<KalmanResult> known, marg;
  if (want_known) known = kalman_oracle(spec, sample.trajectory, InputMode::Known);
  if (want_marg) marg = kalman_oracle(spec, sample.trajectory, InputMode::Marginalised);

  std::string csv = "t";
  for (std::size_t j = 0; j < spec.obs_dim; ++j) {
    const std::string suffix = spec.obs_dim == 1 ? "" : "_" + std::to_string(j + 1);
    if (want_known) csv += ",known_mean" + suffix + ",known_sigma" + suffix;
    if (want_marg) csv += ",marginalised_mean" + suffix + ",marginalised_sigma" + suffix;
  }
  csv += "\n";
  for (std::size_t t = 0; t < length; ++t) {
    csv += std::to_string(t);
    for (std::size_t j = 0; j < spec.obs_dim; ++j) {
      if (want_known) {
        csv += "," + format_double(known->pred_mean(t, j)) + "," + format_double(known->pred_sigma(t, j));
      }
      if (want_marg) {
        csv += "," + format_double(marg->pred_mean(t, j)) + "," + format_double(marg->pred_sigma(t, j));
      }
    }
    csv += "\n";
  }
  write_text(fs::path(out_dir) / "oracle.csv", csv);
  write_resolved_config(resolved, out_dir);
  std::cout << "simulated " << length << " steps (J=" << spec.state_dim << ", I=" << spec.input_dim
            << ", O=" << spec.obs_dim << ")\n";
  return 0;
}

int cmd_search(const std::string& config_path, const std::string& out_dir, const Overrides& ov) {
  const KeyValueConfig cfg = load_config(config_path, ov);
  KeyValueConfig resolved;
  const TrainConfig base = read_train_config(cfg, resolved);
  const DataConfig data_cfg = read_data_config(cfg, resolved);
  const std::size_t iterations = cfg.get_size("search.iterations", 10);
  resolved.set("search.iterations", std::to_string(iterations));

  const Trajectory raw = load_data(data_cfg);
  const Split split = chronological_split(raw, data_cfg.split);
  Trajectory train_part = split.train;
  Trajectory val_part = split.validation;
  if (data_cfg.normalize != NormMethod::None) {
    auto [normed, stats] = normalize(split.train, data_cfg.normalize, split.train);
    train_part = std::move(normed);
    val_part = apply_normalization(split.validation, stats);
  }

  const SearchGrid grid;
  const std::vector<SearchCandidate> leaderboard =
      random_search(grid, iterations, base, {train_part}, {val_part});

  std::string csv =
      "rank,draw,val_nll,dropout,state_size,minibatch,learning_rate,max_grad_norm,missing_rate,"
      "seed,status\n";
  for (std::size_t i = 0; i < leaderboard.size(); ++i) {
    const SearchCandidate& c = leaderboard[i];
    csv += std::to_string(i + 1) + "," + std::to_string(c.index) + "," + format_double(c.val_nll) +
           "," + format_double(c.config.dropout) + "," + std::to_string(c.config.state_size) + "," +
           std::to_string(c.config.minibatch) + "," + format_double(c.config.learning_rate) + "," +
           format_double(c.config.max_grad_norm) + "," + format_double(c.config.missing_rate) +
           "," + std::to_string(c.config.seed) + "," + (c.failed ? "failed" : "ok") + "\n";
  }

  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "leaderboard.csv", csv);
  write_resolved_config(resolved, out_dir);
  std::cout << "searched " << leaderboard.size() << " candidates; best validation NLL "
            << (leaderboard.empty() ? 0.0 : leaderboard.front().val_nll) << "\n";
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data());
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Recurrent neural filter: sequential forecasting with staged belief updates"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string checkpoint_path;
  std::uint64_t seed = 0;
  std::string variant;
  std::vector<std::size_t> taus;
  std::string input_mode;

  auto add_common = [&](CLI::App* sub, bool with_checkpoint) {
    sub->add_option("--config", config_path, "key=value configuration file");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--variant", variant, "model variant: rnf, vrnf-kf, vrnf-nn")
        ->check(CLI::IsMember({"rnf", "vrnf-kf", "vrnf-nn"}));
    sub->add_option("--tau", taus, "forecast horizons")->delimiter(',');
    sub->add_option("--input-mode", input_mode, "multistep input mode: known, unknown, both")
        ->check(CLI::IsMember({"known", "unknown", "both"}));
    if (with_checkpoint) {
      sub->add_option("--checkpoint", checkpoint_path, "model checkpoint file")->required();
    }
  };

  CLI::App* train = app.add_subcommand("train", "fit a model and write a checkpoint");
  add_common(train, false);
  CLI::App* evaluate = app.add_subcommand("evaluate", "compute metrics for a checkpoint");
  add_common(evaluate, true);
  CLI::App* predict = app.add_subcommand("predict", "write per-step predictions and intervals");
  add_common(predict, true);
  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic trajectory and its exact filter");
  add_common(simulate, false);
  CLI::App* search = app.add_subcommand("search", "random hyperparameter search");
  add_common(search, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  Overrides ov;
  if (sub->count("--seed")) ov.seed = seed;
  if (sub->count("--variant")) ov.variant = variant;
  if (sub->count("--tau")) ov.taus = taus;
  if (sub->count("--input-mode")) ov.input_mode = input_mode;

  try {
    if (sub == train) return cmd_train(config_path, out_dir, ov);
    if (sub == evaluate) return cmd_evaluate(config_path, checkpoint_path, out_dir, ov);
    if (sub == predict) return cmd_predict(config_path, checkpoint_path, out_dir, ov);
    if (sub == simulate) return cmd_simulate(config_path, out_dir, ov);
    if (sub == search) return cmd_search(config_path, out_dir, ov);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace rnf::cli
