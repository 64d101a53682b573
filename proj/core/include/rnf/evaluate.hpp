#pragma once

#include <vector>

#include "rnf/dataset.hpp"
#include "rnf/inference.hpp"
#include "rnf/metrics.hpp"
#include "rnf/model.hpp"

namespace rnf {

struct EvalOptions {
  std::vector<std::size_t> taus;       // multistep horizons to evaluate
  bool mode_known = true;
  bool mode_unknown = true;
  double level = 0.90;                 // interval coverage level
  bool horizon_only = false;           // report horizon-tau error instead of the 1..tau average
  std::size_t samples = 100;           // latent draws per prediction (variational variants)
  std::uint64_t seed = 1;
};

struct MultistepReport {
  std::size_t tau = 0;
  ForecastInputs mode = ForecastInputs::Unknown;
  MetricReport report;
};

struct EvalResult {
  MetricReport one_step;
  double reference_mse = 0.0;  // persistence one-step MSE on the same data
  std::vector<MultistepReport> multistep;
  // Per-step one-step predictions and intervals, aligned with the
  // trajectory (entries exist for every step; metrics use observed ones).
  std::vector<GaussianPrediction> predictions;
  Interval intervals;
};

/// Filters through the trajectory once for one-step metrics, then replays
/// multistep forecasts from every origin for each requested horizon and
/// input mode. Predictions respect the trajectory's availability masks.
EvalResult evaluate_model(const RnfModel& model, const Trajectory& test, const EvalOptions& options);

}  // namespace rnf
