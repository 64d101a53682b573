#pragma once

#include <cstddef>
#include <vector>

#include "rnf/dataset.hpp"
#include "rnf/rng.hpp"

namespace rnf {

/// Small row-major matrix for model specification.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  Mat(std::size_t r, std::size_t c, std::vector<double> values);
  static Mat diag(const std::vector<double>& d);
  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

/// Linear Gaussian state space model
///   x_t = A x_{t-1} + B u_t + eps,  eps ~ N(0, Q)
///   y_t = H x_t + e,                e   ~ N(0, R)
///   u_t ~ N(c, D)
struct LgssmSpec {
  std::size_t state_dim = 0;
  std::size_t input_dim = 0;
  std::size_t obs_dim = 0;
  Mat A, B, H, Q, R;
  std::vector<double> c;
  Mat D;

  /// Checks shapes, symmetry/PSD of Q, R, D; warns on stderr when the
  /// spectral radius of A is >= 1.
  void validate() const;
};

struct LgssmSample {
  Trajectory trajectory;
  std::vector<double> latents;  // T x J, the simulated hidden states
};

LgssmSample simulate_lgssm(const LgssmSpec& spec, std::size_t length, Rng& rng);

enum class InputMode { Known, Marginalised };

/// Exact full-covariance Kalman filter output. pred_* quantities describe
/// y_t given data up to t-1 (and u_t in Known mode); filt_* describe the
/// posterior state after the step-t update. Steps with a masked
/// observation skip the update.
struct KalmanResult {
  std::size_t length = 0;
  std::size_t state_dim = 0;
  std::size_t obs_dim = 0;
  std::vector<double> pred_obs_mean;   // T x O
  std::vector<double> pred_obs_cov;    // T x O x O  (innovation covariance)
  std::vector<double> pred_state_cov;  // T x J x J  (P_{t|t-1})
  std::vector<double> filt_mean;       // T x J
  std::vector<double> filt_cov;        // T x J x J

  double pred_mean(std::size_t t, std::size_t j) const { return pred_obs_mean[t * obs_dim + j]; }
  double pred_sigma(std::size_t t, std::size_t j) const;
  double pred_state_var(std::size_t t, std::size_t j) const {
    return pred_state_cov[t * state_dim * state_dim + j * state_dim + j];
  }
};

/// In Known mode the filter consumes the trajectory's inputs; in
/// Marginalised mode u is never observed and its model N(c, D) is folded
/// into the prediction step (drift B c, noise B D B^T + Q).
KalmanResult kalman_oracle(const LgssmSpec& spec, const Trajectory& traj, InputMode mode);

}  // namespace rnf
