#include "rnf/metrics.hpp"

#include <json.hpp>

#include <stdexcept>

namespace rnf {

std::string metric_report_to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["mse"] = report.mse;
  if (report.has_normalized) {
    j["normalized_mse"] = report.normalized_mse;
  } else {
    j["normalized_mse"] = nullptr;
  }
  j["picp"] = report.picp;
  j["tau"] = report.tau;
  j["n"] = report.n;
  if (report.picp_degenerate) j["picp_degenerate"] = true;
  return j.dump();
}

double mse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) {
    throw std::invalid_argument("mse: length mismatch");
  }
  if (predictions.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    acc += d * d;
  }
  return acc / static_cast<double>(predictions.size());
}

double normalized_mse(double model_mse, double reference_one_step_mse) {
  if (!(reference_one_step_mse > 0.0)) {
    throw std::invalid_argument("normalized_mse: reference MSE must be positive");
  }
  return model_mse / reference_one_step_mse;
}

double persistence_reference_mse(std::span<const double> observations, std::size_t obs_dim,
                                 std::span<const std::uint8_t> present) {
  const std::size_t T = present.size();
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 1; t < T; ++t) {
    if (!present[t] || !present[t - 1]) continue;
    for (std::size_t j = 0; j < obs_dim; ++j) {
      const double d = observations[t * obs_dim + j] - observations[(t - 1) * obs_dim + j];
      acc += d * d;
      ++n;
    }
  }
  return n > 0 ? acc / static_cast<double>(n) : 0.0;
}

double multistep_mse(std::span<const double> squared_errors, std::span<const std::size_t> horizons,
                     std::size_t tau, bool horizon_only) {
  if (tau < 1) throw std::invalid_argument("multistep_mse: tau must be >= 1");
  if (squared_errors.size() != horizons.size()) {
    throw std::invalid_argument("multistep_mse: length mismatch");
  }
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < squared_errors.size(); ++i) {
    if (horizons[i] > tau) continue;
    if (horizon_only && horizons[i] != tau) continue;
    acc += squared_errors[i];
    ++n;
  }
  return n > 0 ? acc / static_cast<double>(n) : 0.0;
}

double picp(std::span<const double> targets, const Interval& intervals) {
  const std::size_t n = targets.size();
  if (intervals.lo.size() != n || intervals.hi.size() != n) {
    throw std::invalid_argument("picp: interval count does not match target count");
  }
  if (n == 0) return 0.0;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (intervals.lo[i] > intervals.hi[i]) {
      throw std::invalid_argument("picp: interval " + std::to_string(i) + " is not ordered");
    }
    if (intervals.lo[i] < targets[i] && targets[i] < intervals.hi[i]) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(n);
}

}  // namespace rnf
