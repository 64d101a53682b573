#pragma once

#include <span>
#include <string>
#include <vector>

#include "rnf/inference.hpp"

namespace rnf {

struct MetricReport {
  double mse = 0.0;
  double normalized_mse = 0.0;
  bool has_normalized = false;  // false when the reference MSE is zero
  double picp = 0.0;
  std::size_t tau = 1;
  std::size_t n = 0;
  bool picp_degenerate = false;  // any interval had zero width
};

/// JSON document with keys mse, normalized_mse, picp, tau, n (and
/// picp_degenerate when collapsed intervals were seen). normalized_mse is
/// null when no reference was available.
std::string metric_report_to_json(const MetricReport& report);

double mse(std::span<const double> predictions, std::span<const double> targets);

/// Model MSE divided by the reference model's one-step-ahead MSE.
double normalized_mse(double model_mse, double reference_one_step_mse);

/// One-step MSE of the persistence forecast y_hat_t = y_{t-1}, the
/// normalisation reference. Pairs with a masked side are skipped.
double persistence_reference_mse(std::span<const double> observations, std::size_t obs_dim,
                                 std::span<const std::uint8_t> present);

/// Average squared error over horizons 1..tau and all origins with enough
/// trailing data. `entries` holds (squared error, horizon) pairs produced
/// by a forecasting loop; horizon_only keeps only horizon == tau.
double multistep_mse(std::span<const double> squared_errors, std::span<const std::size_t> horizons,
                     std::size_t tau, bool horizon_only = false);

/// Fraction of targets strictly inside their interval.
double picp(std::span<const double> targets, const Interval& intervals);

}  // namespace rnf
