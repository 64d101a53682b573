#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rnf/rng.hpp"

namespace rnf {

/// A time-indexed record of exogenous inputs u (T x I) and observations
/// y (T x O) with per-step availability flags. Masked steps keep their row
/// (T never changes); their stored values are placeholders.
struct Trajectory {
  std::size_t length = 0;
  std::size_t input_dim = 0;
  std::size_t obs_dim = 0;
  std::vector<double> inputs;        // row-major T x I
  std::vector<double> observations;  // row-major T x O
  std::vector<std::uint8_t> input_present;
  std::vector<std::uint8_t> obs_present;
  std::string source;

  std::span<const double> input(std::size_t t) const {
    return {inputs.data() + t * input_dim, input_dim};
  }
  std::span<const double> obs(std::size_t t) const {
    return {observations.data() + t * obs_dim, obs_dim};
  }
  bool fully_observed() const;
  void validate() const;
};

Trajectory make_trajectory(std::size_t length, std::size_t input_dim, std::size_t obs_dim);

/// Comma-delimited trajectory file. Header names the columns u_1..u_I and
/// y_1..y_O plus optional u_mask / y_mask columns holding 0/1 flags.
Trajectory load_trajectory_csv(const std::filesystem::path& path);
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

/// UCI household power file: semicolon-delimited with a header row,
/// day-first Date and Time columns, and "?" marking missing values.
/// Observation: global active power (O=1). Inputs, in order: reactive
/// power, intensity, voltage, sub-meterings 1-3 (I=6). Rows containing
/// "?" are masked in both streams. Date/Time are validated and the covered
/// range is recorded in the source tag; they are not model features.
Trajectory load_electricity(const std::filesystem::path& path);

struct SplitFractions {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

struct Split {
  Trajectory train;
  Trajectory validation;
  Trajectory test;
};

/// Contiguous chronological partition: [0, floor(a*T)), [floor(a*T),
/// floor((a+b)*T)), remainder. No shuffling.
Split chronological_split(const Trajectory& traj, SplitFractions fractions = {});

enum class NormMethod { None, Zscore, Minmax, Ewm };

std::string norm_method_name(NormMethod m);
NormMethod norm_method_from_name(const std::string& name);

/// Normalisation constants. For zscore/minmax these are per-feature
/// offset/scale pairs fitted on the training partition only (inputs first,
/// then observations). The ewm method is parameter-free apart from the
/// half-life: each observation is divided by the trailing exponentially
/// weighted standard deviation of its own past, so it never sees the
/// future and needs no fitted constants.
struct NormStats {
  NormMethod method = NormMethod::None;
  std::vector<double> offset;  // size I+O
  std::vector<double> scale;   // size I+O
  double ewm_halflife = 10000.0;
};

std::pair<Trajectory, NormStats> normalize(const Trajectory& traj, NormMethod method,
                                           const Trajectory& fitted_on);
Trajectory apply_normalization(const Trajectory& traj, const NormStats& stats);
Trajectory invert_normalization(const Trajectory& traj, const NormStats& stats);

struct SpikeRule {
  bool enabled = true;
  double multiple = 10.0;
  std::size_t window = 200;
};

/// Rolling sum of squared one-step log returns over `window` returns,
/// indexed so element k corresponds to price index k + window. The spike
/// rule then replaces values greater than `multiple` times the trailing
/// rolling standard deviation with their predecessor.
std::vector<double> realized_variance_series(std::span<const double> log_prices,
                                             std::size_t window = 30, SpikeRule rule = {});

struct QuoteFeatures {
  double microprice = 0.0;
  double imbalance = 0.0;
};

/// Volume-weighted microprice (V_a p_b + V_b p_a)/(V_a + V_b) and book
/// imbalance (V_b - V_a)/(V_b + V_a) in [-1, 1].
QuoteFeatures microstructure_features(double bid_price, double ask_price, double bid_volume,
                                      double ask_volume);

/// Quote series -> trajectory with y = simple microprice returns and
/// u = volume imbalance, aligned from the second quote onward.
Trajectory microstructure_trajectory(std::span<const double> bid_price,
                                     std::span<const double> ask_price,
                                     std::span<const double> bid_volume,
                                     std::span<const double> ask_volume);

/// Indices of steps whose time of day falls inside [08:30, 16:00].
std::vector<std::size_t> session_filter(std::span<const double> seconds_of_day);

}  // namespace rnf
