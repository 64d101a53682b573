#pragma once

#include <span>
#include <vector>

#include "rnf/model.hpp"
#include "rnf/rng.hpp"

namespace rnf {

struct StepAvailability {
  bool has_input = false;
  bool has_observation = false;
};

/// Sampling controls for variational variants: how many latent draws per
/// prediction and the noise source. The standard variant ignores both.
struct SampleOptions {
  std::size_t count = 0;
  Rng* rng = nullptr;
};

struct FilterOutput {
  BeliefState belief;
  GaussianPrediction prediction;
};

/// One filtering step. Propagation always runs; input dynamics and error
/// correction run only when their data is available. The returned
/// prediction decodes the input-dynamics output when an input was present
/// and the propagation output otherwise, so it never peeks at y_t.
///
/// For variational variants the prediction is the sample mixture over
/// `samples.count` latent draws; when `draws` is non-null, one simulated
/// observation per latent draw is appended to it (count x O values) for
/// empirical interval construction.
FilterOutput filter_step(const RnfModel& model, const BeliefState& belief, StepAvailability avail,
                         std::span<const double> input = {}, std::span<const double> observation = {},
                         SampleOptions samples = {}, std::vector<double>* draws = nullptr);

enum class ForecastInputs { Unknown, Known };

/// Recursive forecasts for horizons 1..horizon with observations withheld
/// throughout. Unknown mode runs the propagation encoder alone; Known mode
/// additionally applies the input-dynamics encoder to the supplied future
/// inputs (row-major horizon x I). Model outputs are never fed back.
std::vector<GaussianPrediction> multistep_forecast(const RnfModel& model, const BeliefState& belief,
                                                   std::size_t horizon, ForecastInputs mode,
                                                   std::span<const double> future_inputs = {},
                                                   SampleOptions samples = {},
                                                   std::vector<double>* draws = nullptr);

inline constexpr double kZ95 = 1.6448536269514722;

/// Inverse standard normal CDF (Acklam's rational approximation, refined
/// with one Halley step); p = 0.95 and p = 0.05 return the pinned constant.
double normal_quantile(double p);

struct Interval {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Central analytic Gaussian interval mean +- z * sigma at the given
/// coverage level.
Interval predictive_interval(const GaussianPrediction& prediction, double level = 0.90);

/// Central empirical interval from samples of a scalar predictive
/// distribution (linear-interpolation quantiles).
std::pair<double, double> empirical_interval(std::span<const double> samples, double level = 0.90);

}  // namespace rnf
