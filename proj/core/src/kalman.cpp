#include "rnf/kalman.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace rnf {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> as_eigen(const Mat& m) {
  return Eigen::Map<const RowMat>(m.v.data(), static_cast<Eigen::Index>(m.rows),
                                  static_cast<Eigen::Index>(m.cols));
}

void require_shape(const Mat& m, std::size_t rows, std::size_t cols, const char* name) {
  if (m.rows != rows || m.cols != cols) {
    throw std::invalid_argument(std::string("LgssmSpec: ") + name + " must be " +
                                std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                                std::to_string(m.rows) + "x" + std::to_string(m.cols));
  }
}

void require_psd(const Mat& m, const char* name) {
  auto M = as_eigen(m);
  if (!M.isApprox(M.transpose(), 1e-10)) {
    throw std::invalid_argument(std::string("LgssmSpec: ") + name + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw std::invalid_argument(std::string("LgssmSpec: ") + name +
                                " must be positive semi-definite");
  }
}

/// Sampler for N(0, C) that tolerates semi-definite C (noiseless limits).
class MvnSampler {
 public:
  explicit MvnSampler(const Mat& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(as_eigen(cov));
    Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    factor_ = es.eigenvectors() * lambda.asDiagonal();
    dim_ = cov.rows;
  }

  void sample(Rng& rng, std::span<double> out) const {
    Eigen::VectorXd z(static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < dim_; ++i) z[static_cast<Eigen::Index>(i)] = rng.normal();
    Eigen::VectorXd x = factor_ * z;
    for (std::size_t i = 0; i < dim_; ++i) out[i] = x[static_cast<Eigen::Index>(i)];
  }

 private:
  Eigen::MatrixXd factor_;
  std::size_t dim_ = 0;
};

}  // namespace

Mat::Mat(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), v(std::move(values)) {
  if (v.size() != r * c) {
    throw std::invalid_argument("Mat: " + std::to_string(r) + "x" + std::to_string(c) +
                                " needs " + std::to_string(r * c) + " values, got " +
                                std::to_string(v.size()));
  }
}

Mat Mat::diag(const std::vector<double>& d) {
  Mat m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.at(i, i) = d[i];
  return m;
}

void LgssmSpec::validate() const {
  if (state_dim == 0 || input_dim == 0 || obs_dim == 0) {
    throw std::invalid_argument("LgssmSpec: dimensions must be >= 1");
  }
  require_shape(A, state_dim, state_dim, "A");
  require_shape(B, state_dim, input_dim, "B");
  require_shape(H, obs_dim, state_dim, "H");
  require_shape(Q, state_dim, state_dim, "Q");
  require_shape(R, obs_dim, obs_dim, "R");
  require_shape(D, input_dim, input_dim, "D");
  if (c.size() != input_dim) {
    throw std::invalid_argument("LgssmSpec: c must have length I");
  }
  require_psd(Q, "Q");
  require_psd(R, "R");
  require_psd(D, "D");

  const double rho = as_eigen(A).eigenvalues().cwiseAbs().maxCoeff();
  if (rho >= 1.0) {
    std::cerr << "warning: LGSSM transition has spectral radius " << rho
              << " >= 1; trajectories may diverge\n";
  }
}

LgssmSample simulate_lgssm(const LgssmSpec& spec, std::size_t length, Rng& rng) {
  if (length == 0) throw std::invalid_argument("simulate_lgssm: length must be >= 1");
  spec.validate();

  const std::size_t J = spec.state_dim;
  const auto A = as_eigen(spec.A);
  const auto B = as_eigen(spec.B);
  const auto H = as_eigen(spec.H);
  const MvnSampler state_noise(spec.Q);
  const MvnSampler obs_noise(spec.R);
  const MvnSampler input_noise(spec.D);

  LgssmSample out;
  out.trajectory = make_trajectory(length, spec.input_dim, spec.obs_dim);
  out.trajectory.source = "lgssm";
  out.latents.assign(length * J, 0.0);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(J));
  std::vector<double> noise(std::max({J, spec.input_dim, spec.obs_dim}));

  for (std::size_t t = 0; t < length; ++t) {
    double* u = out.trajectory.inputs.data() + t * spec.input_dim;
    input_noise.sample(rng, {noise.data(), spec.input_dim});
    for (std::size_t i = 0; i < spec.input_dim; ++i) u[i] = spec.c[i] + noise[i];

    state_noise.sample(rng, {noise.data(), J});
    Eigen::VectorXd next = A * x + B * Eigen::Map<const Eigen::VectorXd>(u, static_cast<Eigen::Index>(spec.input_dim));
    for (std::size_t j = 0; j < J; ++j) next[static_cast<Eigen::Index>(j)] += noise[j];
    x = next;
    for (std::size_t j = 0; j < J; ++j) out.latents[t * J + j] = x[static_cast<Eigen::Index>(j)];

    obs_noise.sample(rng, {noise.data(), spec.obs_dim});
    Eigen::VectorXd y = H * x;
    double* yrow = out.trajectory.observations.data() + t * spec.obs_dim;
    for (std::size_t j = 0; j < spec.obs_dim; ++j) {
      yrow[j] = y[static_cast<Eigen::Index>(j)] + noise[j];
    }
  }
  return out;
}

KalmanResult kalman_oracle(const LgssmSpec& spec, const Trajectory& traj, InputMode mode) {
  spec.validate();
  if (traj.input_dim != spec.input_dim || traj.obs_dim != spec.obs_dim) {
    throw std::invalid_argument("kalman_oracle: trajectory dimensions do not match the spec");
  }

  const std::size_t J = spec.state_dim;
  const std::size_t O = spec.obs_dim;
  const std::size_t T = traj.length;
  const auto A = as_eigen(spec.A);
  const auto B = as_eigen(spec.B);
  const auto H = as_eigen(spec.H);
  const auto Q = as_eigen(spec.Q);
  const auto R = as_eigen(spec.R);
  const auto D = as_eigen(spec.D);
  const Eigen::Map<const Eigen::VectorXd> c(spec.c.data(), static_cast<Eigen::Index>(spec.input_dim));

  // Marginalising u ~ N(c, D) turns the prediction step into a constant
  // drift B c with inflated process noise B D B^T + Q.
  const Eigen::VectorXd drift = B * c;
  const Eigen::MatrixXd q_marg = B * D * B.transpose() + Q;

  KalmanResult res;
  res.length = T;
  res.state_dim = J;
  res.obs_dim = O;
  res.pred_obs_mean.assign(T * O, 0.0);
  res.pred_obs_cov.assign(T * O * O, 0.0);
  res.pred_state_cov.assign(T * J * J, 0.0);
  res.filt_mean.assign(T * J, 0.0);
  res.filt_cov.assign(T * J * J, 0.0);

  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(J));
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(J),
                                                static_cast<Eigen::Index>(J));

  for (std::size_t t = 0; t < T; ++t) {
    // Predict.
    Eigen::VectorXd m_pred;
    Eigen::MatrixXd P_pred;
    const bool use_input = mode == InputMode::Known && traj.input_present[t];
    if (use_input) {
      const Eigen::Map<const Eigen::VectorXd> u(traj.inputs.data() + t * spec.input_dim,
                                                static_cast<Eigen::Index>(spec.input_dim));
      m_pred = A * m + B * u;
      P_pred = A * P * A.transpose() + Q;
    } else {
      m_pred = A * m + drift;
      P_pred = A * P * A.transpose() + q_marg;
    }

    const Eigen::VectorXd y_pred = H * m_pred;
    const Eigen::MatrixXd S = H * P_pred * H.transpose() + R;

    for (std::size_t j = 0; j < O; ++j) res.pred_obs_mean[t * O + j] = y_pred[static_cast<Eigen::Index>(j)];
    Eigen::Map<RowMat>(res.pred_obs_cov.data() + t * O * O, static_cast<Eigen::Index>(O),
                       static_cast<Eigen::Index>(O)) = S;
    Eigen::Map<RowMat>(res.pred_state_cov.data() + t * J * J, static_cast<Eigen::Index>(J),
                       static_cast<Eigen::Index>(J)) = P_pred;

    // Update.
    if (traj.obs_present[t]) {
      const Eigen::Map<const Eigen::VectorXd> y(traj.observations.data() + t * O,
                                                static_cast<Eigen::Index>(O));
      const Eigen::VectorXd innovation = y - y_pred;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
      if (lu.isInvertible()) {
        const Eigen::MatrixXd K = P_pred * H.transpose() * lu.inverse();
        m = m_pred + K * innovation;
        P = P_pred - K * H * P_pred;
      } else if (innovation.lpNorm<Eigen::Infinity>() <=
                 1e-12 * (1.0 + y.lpNorm<Eigen::Infinity>())) {
        // Degenerate noiseless limit: the prediction already matches the
        // observation, so the update is a no-op.
        m = m_pred;
        P = P_pred;
      } else {
        throw std::runtime_error("kalman_oracle: singular innovation covariance at step " +
                                 std::to_string(t));
      }
    } else {
      m = m_pred;
      P = P_pred;
    }

    for (std::size_t j = 0; j < J; ++j) res.filt_mean[t * J + j] = m[static_cast<Eigen::Index>(j)];
    Eigen::Map<RowMat>(res.filt_cov.data() + t * J * J, static_cast<Eigen::Index>(J),
                       static_cast<Eigen::Index>(J)) = P;
  }
  return res;
}

double KalmanResult::pred_sigma(std::size_t t, std::size_t j) const {
  return std::sqrt(pred_obs_cov[t * obs_dim * obs_dim + j * obs_dim + j]);
}

}  // namespace rnf
