#include "rnf/evaluate.hpp"

#include <algorithm>
#include <stdexcept>

namespace rnf {

namespace {

struct OneStepPass {
  std::vector<GaussianPrediction> predictions;
  Interval intervals;
  std::vector<BeliefState> beliefs;  // belief after each step, for multistep origins
  bool degenerate = false;
};

OneStepPass one_step_pass(const RnfModel& model, const Trajectory& traj, const EvalOptions& opt) {
  OneStepPass pass;
  pass.predictions.reserve(traj.length);
  pass.beliefs.reserve(traj.length);

  const bool variational = is_variational(model.variant);
  Rng rng(mix_seed(opt.seed, 0xea17ULL));
  BeliefState belief = initial_belief(model.state_size);

  for (std::size_t t = 0; t < traj.length; ++t) {
    StepAvailability avail{traj.input_present[t] != 0, traj.obs_present[t] != 0};
    SampleOptions samples;
    std::vector<double> draws;
    if (variational) {
      samples.count = opt.samples;
      samples.rng = &rng;
    }
    FilterOutput out = filter_step(model, belief, avail,
                                   avail.has_input ? traj.input(t) : std::span<const double>{},
                                   avail.has_observation ? traj.obs(t) : std::span<const double>{},
                                   samples, variational ? &draws : nullptr);

    if (variational) {
      // Empirical central interval per output dimension from the simulated
      // observation draws.
      for (std::size_t j = 0; j < model.obs_dim; ++j) {
        std::vector<double> dim_draws(opt.samples);
        for (std::size_t l = 0; l < opt.samples; ++l) dim_draws[l] = draws[l * model.obs_dim + j];
        const auto [lo, hi] = empirical_interval(dim_draws, opt.level);
        pass.intervals.lo.push_back(lo);
        pass.intervals.hi.push_back(hi);
        if (lo >= hi) pass.degenerate = true;
      }
    } else {
      const Interval iv = predictive_interval(out.prediction, opt.level);
      for (std::size_t j = 0; j < model.obs_dim; ++j) {
        pass.intervals.lo.push_back(iv.lo[j]);
        pass.intervals.hi.push_back(iv.hi[j]);
        if (iv.lo[j] >= iv.hi[j]) pass.degenerate = true;
      }
    }

    pass.predictions.push_back(out.prediction);
    pass.beliefs.push_back(out.belief);
    belief = pass.beliefs.back();
  }
  return pass;
}

}  // namespace

EvalResult evaluate_model(const RnfModel& model, const Trajectory& test, const EvalOptions& opt) {
  test.validate();
  if (test.input_dim != model.input_dim || test.obs_dim != model.obs_dim) {
    throw std::invalid_argument("evaluate_model: trajectory dimensions do not match the model");
  }

  EvalResult result;
  OneStepPass pass = one_step_pass(model, test, opt);

  // One-step metrics over observed targets.
  std::vector<double> pred_flat, target_flat;
  Interval observed_intervals;
  for (std::size_t t = 0; t < test.length; ++t) {
    if (!test.obs_present[t]) continue;
    for (std::size_t j = 0; j < test.obs_dim; ++j) {
      pred_flat.push_back(pass.predictions[t].mean[j]);
      target_flat.push_back(test.observations[t * test.obs_dim + j]);
      observed_intervals.lo.push_back(pass.intervals.lo[t * test.obs_dim + j]);
      observed_intervals.hi.push_back(pass.intervals.hi[t * test.obs_dim + j]);
    }
  }

  result.reference_mse =
      persistence_reference_mse(test.observations, test.obs_dim, test.obs_present);

  result.one_step.mse = mse(pred_flat, target_flat);
  result.one_step.picp = picp(target_flat, observed_intervals);
  result.one_step.picp_degenerate = pass.degenerate;
  result.one_step.tau = 1;
  result.one_step.n = target_flat.size();
  if (result.reference_mse > 0.0) {
    result.one_step.normalized_mse = normalized_mse(result.one_step.mse, result.reference_mse);
    result.one_step.has_normalized = true;
  }

  // Multistep forecasts from every origin that has tau steps of trailing
  // data. The origin belief is the filtered state after step t0.
  const bool variational = is_variational(model.variant);
  Rng ms_rng(mix_seed(opt.seed, 0xf02eca57ULL));
  for (const std::size_t tau : opt.taus) {
    if (tau < 1) throw std::invalid_argument("evaluate_model: tau must be >= 1");
    std::vector<ForecastInputs> modes;
    if (opt.mode_unknown) modes.push_back(ForecastInputs::Unknown);
    if (opt.mode_known) modes.push_back(ForecastInputs::Known);
    for (const ForecastInputs mode : modes) {
      std::vector<double> sq_errors;
      std::vector<std::size_t> horizons;
      for (std::size_t origin = 0; origin + tau < test.length; ++origin) {
        std::span<const double> future;
        if (mode == ForecastInputs::Known) {
          bool all_inputs = true;
          for (std::size_t k = 1; k <= tau; ++k) {
            if (!test.input_present[origin + k]) all_inputs = false;
          }
          if (!all_inputs) continue;
          future = std::span<const double>(test.inputs.data() + (origin + 1) * test.input_dim,
                                           tau * test.input_dim);
        }
        SampleOptions samples;
        if (variational) {
          samples.count = opt.samples;
          samples.rng = &ms_rng;
        }
        const std::vector<GaussianPrediction> preds =
            multistep_forecast(model, pass.beliefs[origin], tau, mode, future, samples);
        for (std::size_t k = 1; k <= tau; ++k) {
          if (!test.obs_present[origin + k]) continue;
          for (std::size_t j = 0; j < test.obs_dim; ++j) {
            const double d =
                preds[k - 1].mean[j] - test.observations[(origin + k) * test.obs_dim + j];
            sq_errors.push_back(d * d);
            horizons.push_back(k);
          }
        }
      }
      MultistepReport entry;
      entry.tau = tau;
      entry.mode = mode;
      entry.report.tau = tau;
      entry.report.mse = multistep_mse(sq_errors, horizons, tau, opt.horizon_only);
      entry.report.n = sq_errors.size();
      entry.report.picp = 0.0;
      if (result.reference_mse > 0.0) {
        entry.report.normalized_mse = normalized_mse(entry.report.mse, result.reference_mse);
        entry.report.has_normalized = true;
      }
      result.multistep.push_back(std::move(entry));
    }
  }

  result.predictions = std::move(pass.predictions);
  result.intervals = std::move(pass.intervals);
  return result;
}

}  // namespace rnf
