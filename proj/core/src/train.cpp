#include "rnf/train.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "rnf/inference.hpp"
#include "rnf/optimizer.hpp"

namespace rnf {

void TrainConfig::validate() const {
  if (alpha_x < 0.0 || alpha_y < 0.0) throw std::invalid_argument("TrainConfig: alphas must be >= 0");
  if (missing_rate < 0.0 || missing_rate > 1.0) {
    throw std::invalid_argument("TrainConfig: missing rate must be in [0,1]");
  }
  if (dropout < 0.0 || dropout > 1.0) {
    throw std::invalid_argument("TrainConfig: dropout must be in [0,1]");
  }
  if (state_size == 0) throw std::invalid_argument("TrainConfig: state size must be >= 1");
  if (segment_length < 2) throw std::invalid_argument("TrainConfig: segment length must be >= 2");
  if (minibatch == 0) throw std::invalid_argument("TrainConfig: minibatch must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be > 0");
  if (!(max_grad_norm > 0.0)) throw std::invalid_argument("TrainConfig: max grad norm must be > 0");
  if (train_samples == 0 || val_samples == 0 || test_samples == 0) {
    throw std::invalid_argument("TrainConfig: sample counts must be >= 1");
  }
}

namespace {

struct SegmentRef {
  std::size_t traj = 0;
  std::size_t offset = 0;
  std::size_t length = 0;
};

std::vector<SegmentRef> cut_segments(const std::vector<Trajectory>& data, std::size_t segment_length) {
  std::vector<SegmentRef> segments;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t T = data[i].length;
    for (std::size_t offset = 0; offset < T; offset += segment_length) {
      const std::size_t len = std::min(segment_length, T - offset);
      if (len >= 2) segments.push_back({i, offset, len});
    }
  }
  return segments;
}

struct SegmentResult {
  double loss = 0.0;
  std::size_t scored = 0;
  Gradients grads;
  bool failed = false;
  std::string error;
};

SegmentResult run_segment(const RnfModel& model, const Trajectory& traj, const SegmentRef& ref,
                          const TrainConfig& config, std::uint64_t segment_seed) {
  SegmentResult result;
  try {
    Rng rng(segment_seed);
    const MissingnessMask mask = apply_missingness(ref.length, config.missing_rate, rng);
    const SegmentDropout dropout = make_segment_dropout(config.state_size, config.dropout, rng);
    SegmentNoise noise;
    const bool variational = is_variational(config.variant);
    if (variational) {
      noise = SegmentNoise::draw(ref.length, model.state_size,
                                 std::max<std::size_t>(1, config.train_samples), rng);
    }
    Tape tape;
    TrajectoryView view{&traj, ref.offset, ref.length};
    const SegmentLossGraph graph = build_segment_loss(tape, model, view, mask, config,
                                                      dropout.active ? &dropout : nullptr,
                                                      variational ? &noise : nullptr);
    result.loss = tape.value(graph.total)[0];
    result.scored = graph.scored_steps;
    result.grads = tape.backward(graph.total, model.params);
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
  }
  return result;
}

/// Runs segments in waves of `threads` so gradient accumulation happens in
/// segment order no matter how many workers exist.
template <typename Fn>
void parallel_waves(std::size_t count, std::size_t threads, Fn&& fn) {
  for (std::size_t base = 0; base < count; base += threads) {
    const std::size_t wave = std::min(threads, count - base);
    std::vector<std::thread> workers;
    workers.reserve(wave);
    for (std::size_t w = 0; w < wave; ++w) {
      workers.emplace_back([&fn, base, w] { fn(base + w, w); });
    }
    for (auto& t : workers) t.join();
  }
}

}  // namespace

double validation_nll(const RnfModel& model, const std::vector<Trajectory>& data,
                      std::size_t samples, std::uint64_t seed) {
  double acc = 0.0;
  std::size_t n = 0;
  Rng rng(seed);
  for (const Trajectory& traj : data) {
    BeliefState belief = initial_belief(model.state_size);
    for (std::size_t t = 0; t < traj.length; ++t) {
      StepAvailability avail{traj.input_present[t] != 0, traj.obs_present[t] != 0};
      SampleOptions opts;
      if (is_variational(model.variant)) {
        opts.count = samples;
        opts.rng = &rng;
      }
      FilterOutput out = filter_step(model, belief, avail,
                                     avail.has_input ? traj.input(t) : std::span<const double>{},
                                     avail.has_observation ? traj.obs(t) : std::span<const double>{},
                                     opts);
      if (avail.has_observation) {
        acc += gaussian_nll(traj.obs(t), out.prediction.mean, out.prediction.sigma);
        ++n;
      }
      belief = std::move(out.belief);
    }
  }
  if (n == 0) throw std::invalid_argument("validation_nll: no observed targets");
  return acc / static_cast<double>(n);
}

FitResult fit(RnfModel& model, const std::vector<Trajectory>& train,
              const std::vector<Trajectory>& validation, const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw std::invalid_argument("fit: empty training set");
  for (const Trajectory& t : train) {
    if (t.input_dim != model.input_dim || t.obs_dim != model.obs_dim) {
      throw std::invalid_argument("fit: trajectory dimensions do not match the model");
    }
  }

  FitResult result;
  if (config.max_epochs == 0) return result;

  const std::vector<SegmentRef> segments = cut_segments(train, config.segment_length);
  if (segments.empty()) throw std::invalid_argument("fit: no usable training segments");

  const std::size_t threads = std::max<std::size_t>(
      1, config.threads > 0 ? config.threads : std::thread::hardware_concurrency());

  AdamState adam = AdamState::init(model.params);
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::vector<Tensor> best_values;
  std::size_t since_best = 0;

  const auto t_start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<std::size_t> order(segments.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(mix_seed(config.seed, 0x5f5fULL, epoch));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    std::size_t epoch_scored = 0;

    for (std::size_t batch_begin = 0; batch_begin < order.size(); batch_begin += config.minibatch) {
      const std::size_t batch_size = std::min(config.minibatch, order.size() - batch_begin);
      std::vector<SegmentResult> results(batch_size);
      parallel_waves(batch_size, threads, [&](std::size_t i, std::size_t) {
        const std::size_t seg_id = order[batch_begin + i];
        const SegmentRef& ref = segments[seg_id];
        results[i] = run_segment(model, train[ref.traj], ref, config,
                                 mix_seed(config.seed, epoch, seg_id));
      });

      Gradients total = Gradients::zeros_for(model.params);
      double batch_loss = 0.0;
      std::size_t batch_scored = 0;
      for (std::size_t i = 0; i < batch_size; ++i) {
        if (results[i].failed) {
          throw std::runtime_error("fit: epoch " + std::to_string(epoch) + ", segment " +
                                   std::to_string(order[batch_begin + i]) + ": " + results[i].error);
        }
        total.accumulate(results[i].grads);
        batch_loss += results[i].loss;
        batch_scored += results[i].scored;
      }
      if (batch_scored == 0) continue;

      total.scale(1.0 / static_cast<double>(batch_scored));
      optimize_step(model.params, std::move(total), adam, config.learning_rate,
                    config.max_grad_norm);
      epoch_loss += batch_loss;
      epoch_scored += batch_scored;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_scored > 0 ? epoch_loss / static_cast<double>(epoch_scored)
                                      : std::numeric_limits<double>::quiet_NaN();
    rec.val_loss = validation.empty()
                       ? rec.train_loss
                       : validation_nll(model, validation, config.val_samples,
                                        mix_seed(config.seed, 0x7a11ULL));
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    result.log.push_back(rec);

    if (rec.val_loss < best_val) {
      best_val = rec.val_loss;
      best_epoch = epoch;
      since_best = 0;
      best_values.clear();
      best_values.reserve(model.params.count());
      for (ParamId id = 0; id < model.params.count(); ++id) {
        best_values.push_back(model.params.value(id));
      }
    } else {
      ++since_best;
      if (since_best >= config.patience) break;
    }
  }

  if (!best_values.empty()) {
    for (ParamId id = 0; id < model.params.count(); ++id) {
      model.params.value(id) = best_values[id];
    }
  }
  result.best_val = best_val;
  result.best_epoch = best_epoch;
  return result;
}

std::size_t SearchGrid::combinations() const {
  return dropout.size() * state_size.size() * minibatch.size() * learning_rate.size() *
         max_grad_norm.size() * missing_rate.size();
}

std::vector<SearchCandidate> random_search(const SearchGrid& grid, std::size_t iterations,
                                           const TrainConfig& base,
                                           const std::vector<Trajectory>& train,
                                           const std::vector<Trajectory>& validation) {
  if (iterations == 0) throw std::invalid_argument("random_search: iterations must be >= 1");
  if (train.empty()) throw std::invalid_argument("random_search: empty training set");

  const std::size_t total = grid.combinations();
  const std::size_t draws = std::min(iterations, total);

  // Partial Fisher-Yates over the flattened grid gives sampling without
  // replacement.
  std::vector<std::size_t> combo(total);
  std::iota(combo.begin(), combo.end(), 0);
  Rng rng(mix_seed(base.seed, 0x5ea2c4ULL));
  for (std::size_t i = 0; i < draws; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
    std::swap(combo[i], combo[j]);
  }

  std::vector<SearchCandidate> leaderboard;
  leaderboard.reserve(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    std::size_t idx = combo[i];
    TrainConfig cfg = base;
    cfg.dropout = grid.dropout[idx % grid.dropout.size()];
    idx /= grid.dropout.size();
    cfg.state_size = grid.state_size[idx % grid.state_size.size()];
    idx /= grid.state_size.size();
    cfg.minibatch = grid.minibatch[idx % grid.minibatch.size()];
    idx /= grid.minibatch.size();
    cfg.learning_rate = grid.learning_rate[idx % grid.learning_rate.size()];
    idx /= grid.learning_rate.size();
    cfg.max_grad_norm = grid.max_grad_norm[idx % grid.max_grad_norm.size()];
    idx /= grid.max_grad_norm.size();
    cfg.missing_rate = grid.missing_rate[idx % grid.missing_rate.size()];
    cfg.seed = mix_seed(base.seed, 0xca4dULL, i);

    SearchCandidate cand;
    cand.index = i;
    cand.config = cfg;
    try {
      RnfModel model = make_model(cfg.variant, cfg.state_size, train[0].input_dim,
                                  train[0].obs_dim, cfg.seed);
      if (!validation.empty()) {
        fit(model, train, validation, cfg);
        cand.val_nll =
            validation_nll(model, validation, cfg.val_samples, mix_seed(cfg.seed, 0x7a11ULL));
      } else {
        FitResult r = fit(model, train, {}, cfg);
        cand.val_nll = r.best_val;
      }
    } catch (const std::exception& e) {
      cand.failed = true;
      cand.error = e.what();
      cand.val_nll = std::numeric_limits<double>::infinity();
    }
    leaderboard.push_back(std::move(cand));
  }

  std::stable_sort(leaderboard.begin(), leaderboard.end(),
                   [](const SearchCandidate& a, const SearchCandidate& b) {
                     return a.val_nll < b.val_nll;
                   });
  return leaderboard;
}

}  // namespace rnf
