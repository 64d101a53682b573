#include "rnf/priors.hpp"

#include <cmath>
#include <stdexcept>

#include "rnf/activations.hpp"

namespace rnf {

namespace {

std::vector<double> softplus_vec(const Tensor& raw) {
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = act::softplus(raw[i]);
  return out;
}

std::vector<double> matvec(const Tensor& W, std::span<const double> x) {
  std::vector<double> out(W.rows());
  for (std::size_t i = 0; i < W.rows(); ++i) {
    double acc = 0.0;
    const double* row = W.data() + i * W.cols();
    for (std::size_t k = 0; k < W.cols(); ++k) acc += row[k] * x[k];
    out[i] = acc;
  }
  return out;
}

void require_arg(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::vector<double> mlp_forward(const ParamStore& store, const MlpIds& ids,
                                std::span<const double> in, bool softplus_out) {
  const Tensor& W1 = store.value(ids.W1);
  const Tensor& b1 = store.value(ids.b1);
  const Tensor& W2 = store.value(ids.W2);
  const Tensor& b2 = store.value(ids.b2);
  if (in.size() != W1.cols()) {
    throw std::invalid_argument("nn_prior_step: conditioning size " + std::to_string(in.size()) +
                                " does not match " + shape_str(W1.shape()));
  }
  std::vector<double> hidden = matvec(W1, in);
  for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i] = act::elu(hidden[i] + b1[i]);
  std::vector<double> out = matvec(W2, hidden);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += b2[i];
    if (softplus_out) out[i] = act::softplus(out[i]);
  }
  return out;
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

PriorStats kf_prior_step(const ParamStore& store, const KfPriorIds& ids, PriorStage stage,
                         std::span<const double> prev_mean, std::span<const double> prev_var,
                         std::span<const double> input, std::span<const double> observation) {
  const std::size_t J = store.value(ids.raw_transition).size();
  require_arg(prev_mean.size() == J && prev_var.size() == J,
              "kf_prior_step: conditioning stats must have length J");

  PriorStats out;
  out.mean.resize(J);
  out.variance.resize(J);

  switch (stage) {
    case PriorStage::Propagation: {
      const auto a = softplus_vec(store.value(ids.raw_transition));
      const auto q = softplus_vec(store.value(ids.raw_noise_prop));
      const Tensor& c = store.value(ids.drift);
      for (std::size_t j = 0; j < J; ++j) {
        out.mean[j] = a[j] * prev_mean[j] + c[j];
        out.variance[j] = a[j] * prev_var[j] * a[j] + q[j];
      }
      break;
    }
    case PriorStage::InputDynamics: {
      require_arg(!input.empty(), "kf_prior_step: input-dynamics stage requires u_t");
      const auto a = softplus_vec(store.value(ids.raw_transition));
      const auto q = softplus_vec(store.value(ids.raw_noise_input));
      const auto bu = matvec(store.value(ids.input_matrix), input);
      for (std::size_t j = 0; j < J; ++j) {
        out.mean[j] = a[j] * prev_mean[j] + bu[j];
        out.variance[j] = a[j] * prev_var[j] * a[j] + q[j];
      }
      break;
    }
    case PriorStage::ErrorCorrection: {
      require_arg(!observation.empty(), "kf_prior_step: error-correction stage requires y_t");
      const auto k = softplus_vec(store.value(ids.raw_gain_keep));
      const auto hy = matvec(store.value(ids.obs_matrix), observation);
      for (std::size_t j = 0; j < J; ++j) {
        out.mean[j] = k[j] * prev_mean[j] - hy[j];
        out.variance[j] = k[j] * prev_var[j];
      }
      break;
    }
  }
  return out;
}

PriorStats nn_prior_step(const ParamStore& store, const NnPriorIds& ids, PriorStage stage,
                         std::span<const double> prev_mean, std::span<const double> prev_var,
                         std::span<const double> input, std::span<const double> observation) {
  PriorStats out;
  switch (stage) {
    case PriorStage::Propagation:
      out.mean = mlp_forward(store, ids.prop_mean, prev_mean, false);
      out.variance = mlp_forward(store, ids.prop_var, prev_var, true);
      break;
    case PriorStage::InputDynamics:
      require_arg(!input.empty(), "nn_prior_step: input-dynamics stage requires u_t");
      out.mean = mlp_forward(store, ids.input_mean, concat(prev_mean, input), false);
      out.variance = mlp_forward(store, ids.input_var, concat(prev_var, input), true);
      break;
    case PriorStage::ErrorCorrection:
      require_arg(!observation.empty(), "nn_prior_step: error-correction stage requires y_t");
      out.mean = mlp_forward(store, ids.corr_mean, concat(prev_mean, observation), false);
      out.variance = mlp_forward(store, ids.corr_var, concat(prev_var, observation), true);
      break;
  }
  // Deviation networks emit gamma; the prior carries the variance gamma^2.
  if (!out.variance.empty()) {
    for (double& v : out.variance) v = v * v;
  }
  return out;
}

double kl_diag(std::span<const double> q_mean, std::span<const double> q_sigma,
               std::span<const double> p_mean, std::span<const double> p_gamma) {
  const std::size_t n = q_mean.size();
  require_arg(q_sigma.size() == n && p_mean.size() == n && p_gamma.size() == n,
              "kl_diag: all arguments must have the same length");
  double kl = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(q_sigma[j] > 0.0) || !(p_gamma[j] > 0.0)) {
      throw std::invalid_argument("kl_diag: deviations must be strictly positive");
    }
    const double d = q_mean[j] - p_mean[j];
    kl += std::log(p_gamma[j] / q_sigma[j]) +
          (q_sigma[j] * q_sigma[j] + d * d) / (2.0 * p_gamma[j] * p_gamma[j]) - 0.5;
  }
  return kl;
}

BoundKfPrior bind_kf_prior(Tape& tape, const ParamStore& store, const KfPriorIds& ids) {
  BoundKfPrior b;
  b.a = tape.softplus(tape.param(store, ids.raw_transition));
  b.drift = tape.param(store, ids.drift);
  b.q_prop = tape.softplus(tape.param(store, ids.raw_noise_prop));
  b.input_matrix = tape.param(store, ids.input_matrix);
  b.q_input = tape.softplus(tape.param(store, ids.raw_noise_input));
  b.gain_keep = tape.softplus(tape.param(store, ids.raw_gain_keep));
  b.obs_matrix = tape.param(store, ids.obs_matrix);
  return b;
}

BoundNnPrior bind_nn_prior(Tape& tape, const ParamStore& store, const NnPriorIds& ids) {
  auto bind_mlp = [&](const MlpIds& m) {
    return BoundNnPrior::Mlp{tape.param(store, m.W1), tape.param(store, m.b1),
                             tape.param(store, m.W2), tape.param(store, m.b2)};
  };
  BoundNnPrior b;
  b.prop_mean = bind_mlp(ids.prop_mean);
  b.prop_var = bind_mlp(ids.prop_var);
  b.input_mean = bind_mlp(ids.input_mean);
  b.input_var = bind_mlp(ids.input_var);
  b.corr_mean = bind_mlp(ids.corr_mean);
  b.corr_var = bind_mlp(ids.corr_var);
  return b;
}

TapedPrior taped_kf_prior(Tape& tape, const BoundKfPrior& prior, PriorStage stage, VarId prev_mean,
                          VarId prev_var, VarId input_or_obs) {
  TapedPrior out;
  switch (stage) {
    case PriorStage::Propagation:
      out.mean = tape.add(tape.hadamard(prior.a, prev_mean), prior.drift);
      out.variance =
          tape.add(tape.hadamard(prior.a, tape.hadamard(prev_var, prior.a)), prior.q_prop);
      break;
    case PriorStage::InputDynamics:
      out.mean = tape.add(tape.hadamard(prior.a, prev_mean),
                          tape.matmul(prior.input_matrix, input_or_obs));
      out.variance =
          tape.add(tape.hadamard(prior.a, tape.hadamard(prev_var, prior.a)), prior.q_input);
      break;
    case PriorStage::ErrorCorrection:
      out.mean = tape.sub(tape.hadamard(prior.gain_keep, prev_mean),
                          tape.matmul(prior.obs_matrix, input_or_obs));
      out.variance = tape.hadamard(prior.gain_keep, prev_var);
      break;
  }
  return out;
}

TapedPrior taped_nn_prior(Tape& tape, const BoundNnPrior& prior, PriorStage stage, VarId prev_mean,
                          VarId prev_var, VarId input_or_obs) {
  auto mlp = [&](const BoundNnPrior::Mlp& m, VarId in, bool softplus_out) {
    const VarId hidden = tape.elu(tape.add(tape.matmul(m.W1, in), m.b1));
    const VarId raw = tape.add(tape.matmul(m.W2, hidden), m.b2);
    return softplus_out ? tape.softplus(raw) : raw;
  };
  TapedPrior out;
  switch (stage) {
    case PriorStage::Propagation:
      out.mean = mlp(prior.prop_mean, prev_mean, false);
      out.variance = tape.square(mlp(prior.prop_var, prev_var, true));
      break;
    case PriorStage::InputDynamics:
      out.mean = mlp(prior.input_mean, tape.concat(prev_mean, input_or_obs), false);
      out.variance = tape.square(mlp(prior.input_var, tape.concat(prev_var, input_or_obs), true));
      break;
    case PriorStage::ErrorCorrection:
      out.mean = mlp(prior.corr_mean, tape.concat(prev_mean, input_or_obs), false);
      out.variance = tape.square(mlp(prior.corr_var, tape.concat(prev_var, input_or_obs), true));
      break;
  }
  return out;
}

VarId taped_kl(Tape& tape, VarId q_mean, VarId q_sigma, VarId p_mean, VarId p_variance) {
  const std::size_t n = tape.value(q_mean).size();
  const VarId half_log_var = tape.scale(tape.sum(tape.log(p_variance)), 0.5);
  const VarId log_sigma = tape.sum(tape.log(q_sigma));
  const VarId diff_sq = tape.square(tape.sub(q_mean, p_mean));
  const VarId numer = tape.add(tape.square(q_sigma), diff_sq);
  const VarId ratio = tape.sum(tape.div(numer, tape.scale(p_variance, 2.0)));
  const VarId constant = tape.constant_scalar(0.5 * static_cast<double>(n));
  return tape.sub(tape.add(tape.sub(half_log_var, log_sigma), ratio), constant);
}

}  // namespace rnf
