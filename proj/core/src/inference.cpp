#include "rnf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rnf {

namespace {

GaussianPrediction decode_prediction(const RnfModel& model, std::span<const double> encoder_output,
                                     SampleOptions samples, std::vector<double>* draws) {
  if (!is_variational(model.variant)) {
    return emit_gaussian(model.params, model.decoder, encoder_output);
  }
  if (samples.count == 0 || samples.rng == nullptr) {
    throw std::invalid_argument("filter_step: variational prediction needs sample count and rng");
  }
  const std::size_t O = model.obs_dim;
  const std::size_t J = model.state_size;
  const LatentStats stats = latent_stats(model.params, *model.head, encoder_output);

  std::vector<double> noise(J);
  std::vector<double> mean_acc(O, 0.0), raw_acc(O, 0.0);
  for (std::size_t l = 0; l < samples.count; ++l) {
    for (double& v : noise) v = samples.rng->normal();
    const std::vector<double> x = draw_latent(stats, noise);
    const GaussianPrediction p = emit_gaussian(model.params, model.decoder, x);
    for (std::size_t j = 0; j < O; ++j) {
      mean_acc[j] += p.mean[j];
      raw_acc[j] += p.sigma[j] * p.sigma[j] + p.mean[j] * p.mean[j];
    }
    if (draws != nullptr) {
      for (std::size_t j = 0; j < O; ++j) {
        draws->push_back(p.mean[j] + p.sigma[j] * samples.rng->normal());
      }
    }
  }

  GaussianPrediction out;
  out.mean.resize(O);
  out.sigma.resize(O);
  const double inv = 1.0 / static_cast<double>(samples.count);
  for (std::size_t j = 0; j < O; ++j) {
    out.mean[j] = mean_acc[j] * inv;
    const double var = std::max(raw_acc[j] * inv - out.mean[j] * out.mean[j], 1e-300);
    out.sigma[j] = std::sqrt(var);
  }
  return out;
}

}  // namespace

FilterOutput filter_step(const RnfModel& model, const BeliefState& belief, StepAvailability avail,
                         std::span<const double> input, std::span<const double> observation,
                         SampleOptions samples, std::vector<double>* draws) {
  if (avail.has_input && input.size() != model.input_dim) {
    throw std::invalid_argument("filter_step: availability claims an input of length " +
                                std::to_string(model.input_dim) + " but " +
                                std::to_string(input.size()) + " values were supplied");
  }
  if (avail.has_observation && observation.size() != model.obs_dim) {
    throw std::invalid_argument("filter_step: availability claims an observation of length " +
                                std::to_string(model.obs_dim) + " but " +
                                std::to_string(observation.size()) + " values were supplied");
  }

  FilterOutput out;
  out.belief.propagation = propagate(model.params, model.encoders, belief);

  const LstmState* latest = &out.belief.propagation;
  if (avail.has_input) {
    out.belief.input_dynamics = apply_input(model.params, model.encoders, *latest, input);
    out.belief.has_input_stage = true;
    latest = &out.belief.input_dynamics;
  }

  const std::vector<double>& source =
      avail.has_input ? out.belief.input_dynamics.s : out.belief.propagation.s;
  out.prediction = decode_prediction(model, source, samples, draws);

  if (avail.has_observation) {
    out.belief.error_correction = correct(model.params, model.encoders, *latest, observation);
    out.belief.has_correction_stage = true;
  }
  return out;
}

std::vector<GaussianPrediction> multistep_forecast(const RnfModel& model, const BeliefState& belief,
                                                   std::size_t horizon, ForecastInputs mode,
                                                   std::span<const double> future_inputs,
                                                   SampleOptions samples,
                                                   std::vector<double>* draws) {
  if (horizon < 1) throw std::invalid_argument("multistep_forecast: horizon must be >= 1");
  if (mode == ForecastInputs::Known && future_inputs.size() != horizon * model.input_dim) {
    throw std::invalid_argument("multistep_forecast: known-inputs mode needs horizon x I values");
  }

  std::vector<GaussianPrediction> predictions;
  predictions.reserve(horizon);
  BeliefState current = belief;
  for (std::size_t k = 0; k < horizon; ++k) {
    StepAvailability avail;
    avail.has_input = mode == ForecastInputs::Known;
    std::span<const double> u =
        avail.has_input ? future_inputs.subspan(k * model.input_dim, model.input_dim)
                        : std::span<const double>{};
    FilterOutput step = filter_step(model, current, avail, u, {}, samples, draws);
    predictions.push_back(std::move(step.prediction));
    current = std::move(step.belief);
  }
  return predictions;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must lie in (0,1)");
  }
  if (p == 0.95) return kZ95;
  if (p == 0.05) return -kZ95;

  // Acklam's rational approximation.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement against erfc.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

Interval predictive_interval(const GaussianPrediction& prediction, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("predictive_interval: level must lie in (0,1)");
  }
  const double z = normal_quantile(0.5 + level / 2.0);
  Interval out;
  out.lo.resize(prediction.mean.size());
  out.hi.resize(prediction.mean.size());
  for (std::size_t j = 0; j < prediction.mean.size(); ++j) {
    out.lo[j] = prediction.mean[j] - z * prediction.sigma[j];
    out.hi[j] = prediction.mean[j] + z * prediction.sigma[j];
  }
  return out;
}

std::pair<double, double> empirical_interval(std::span<const double> samples, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("empirical_interval: level must lie in (0,1)");
  }
  if (samples.size() < 2) {
    throw std::invalid_argument("empirical_interval: need at least two samples");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  };
  const double tail = (1.0 - level) / 2.0;
  return {quantile(tail), quantile(1.0 - tail)};
}

}  // namespace rnf
