#pragma once

#include <span>
#include <vector>

#include "rnf/model.hpp"
#include "rnf/params.hpp"
#include "rnf/tape.hpp"

namespace rnf {

enum class PriorStage { Propagation, InputDynamics, ErrorCorrection };

/// Stage prior over the latent state: mean and diagonal variance
/// (deviation gamma = sqrt(variance)).
struct PriorStats {
  std::vector<double> mean;
  std::vector<double> variance;
};

/// Steady-state Kalman prior in vector form. Conditioning statistics are
/// the previous step's posterior mean/variance for the propagation and
/// input-dynamics stages, and the current input-dynamics posterior for the
/// error-correction stage:
///   propagation:      mean = a.*m + c',          var = a.*V.*a + q'
///   input dynamics:   mean = a.*m + B u,         var = a.*V.*a + q
///   error correction: mean = k'.*m - H' y,       var = k'.*V
/// a, q', q, k' are softplus-positive; c', B, H' are free.
PriorStats kf_prior_step(const ParamStore& store, const KfPriorIds& ids, PriorStage stage,
                         std::span<const double> prev_mean, std::span<const double> prev_var,
                         std::span<const double> input = {}, std::span<const double> observation = {});

/// MLP prior: one ELU hidden layer of width J per network. Mean networks
/// have linear outputs; deviation networks end in softplus (variance is
/// the squared deviation). Stage conditioning matches kf_prior_step, with
/// u_t / y_t concatenated for the input-dynamics / error-correction stages.
PriorStats nn_prior_step(const ParamStore& store, const NnPriorIds& ids, PriorStage stage,
                         std::span<const double> prev_mean, std::span<const double> prev_var,
                         std::span<const double> input = {}, std::span<const double> observation = {});

/// Analytic KL divergence between diagonal Gaussians q = N(m, diag(sigma^2))
/// and p = N(beta, diag(gamma^2)), summed over dimensions:
///   sum_j log(gamma_j/sigma_j) + (sigma_j^2 + (m_j-beta_j)^2) / (2 gamma_j^2) - 1/2
double kl_diag(std::span<const double> q_mean, std::span<const double> q_sigma,
               std::span<const double> p_mean, std::span<const double> p_gamma);

// --- taped counterparts (variance-parameterised; used by the ELBO) ---

struct TapedPrior {
  VarId mean = 0;
  VarId variance = 0;
};

struct BoundKfPrior {
  VarId a = 0, drift = 0, q_prop = 0, input_matrix = 0, q_input = 0, gain_keep = 0, obs_matrix = 0;
};

struct BoundNnPrior {
  struct Mlp { VarId W1 = 0, b1 = 0, W2 = 0, b2 = 0; };
  Mlp prop_mean, prop_var, input_mean, input_var, corr_mean, corr_var;
};

BoundKfPrior bind_kf_prior(Tape& tape, const ParamStore& store, const KfPriorIds& ids);
BoundNnPrior bind_nn_prior(Tape& tape, const ParamStore& store, const NnPriorIds& ids);

TapedPrior taped_kf_prior(Tape& tape, const BoundKfPrior& prior, PriorStage stage, VarId prev_mean,
                          VarId prev_var, VarId input_or_obs);
TapedPrior taped_nn_prior(Tape& tape, const BoundNnPrior& prior, PriorStage stage, VarId prev_mean,
                          VarId prev_var, VarId input_or_obs);

/// KL with the prior given as (mean, variance):
///   sum_j 0.5 log(var_j) - log(sigma_j) + (sigma_j^2 + (m_j-beta_j)^2) / (2 var_j) - 1/2
VarId taped_kl(Tape& tape, VarId q_mean, VarId q_sigma, VarId p_mean, VarId p_variance);

}  // namespace rnf
