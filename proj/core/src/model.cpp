#include "rnf/model.hpp"

#include <cmath>
#include <stdexcept>

#include "rnf/activations.hpp"

namespace rnf {

namespace {

Tensor uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Tensor t({rows, cols});
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

// out = (W x) + b with the same accumulation order as the taped graph.
std::vector<double> affine(const Tensor& W, const Tensor& b, std::span<const double> x) {
  const std::size_t rows = W.rows();
  const std::size_t cols = W.cols();
  if (x.size() != cols) {
    throw std::invalid_argument("affine: input size " + std::to_string(x.size()) +
                                " does not match weight shape " + shape_str(W.shape()));
  }
  std::vector<double> out(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    const double* row = W.data() + i * cols;
    for (std::size_t k = 0; k < cols; ++k) acc += row[k] * x[k];
    out[i] = acc + b[i];
  }
  return out;
}

MlpIds make_mlp(ParamStore& store, const std::string& prefix, std::size_t in_dim,
                std::size_t hidden, std::size_t out_dim, Rng& rng) {
  MlpIds ids;
  ids.W1 = store.add(prefix + ".W1", uniform_matrix(hidden, in_dim, rng));
  ids.b1 = store.add(prefix + ".b1", Tensor({hidden}));
  ids.W2 = store.add(prefix + ".W2", uniform_matrix(out_dim, hidden, rng));
  ids.b2 = store.add(prefix + ".b2", Tensor({out_dim}));
  return ids;
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Rnf: return "rnf";
    case Variant::VrnfKf: return "vrnf-kf";
    case Variant::VrnfNn: return "vrnf-nn";
  }
  return "rnf";
}

Variant variant_from_name(const std::string& name) {
  if (name == "rnf") return Variant::Rnf;
  if (name == "vrnf-kf") return Variant::VrnfKf;
  if (name == "vrnf-nn") return Variant::VrnfNn;
  throw std::invalid_argument("unknown variant '" + name + "' (expected rnf, vrnf-kf or vrnf-nn)");
}

bool is_variational(Variant v) { return v != Variant::Rnf; }

RnfModel make_model(Variant variant, std::size_t state_size, std::size_t input_dim,
                    std::size_t obs_dim, std::uint64_t seed, ObservationFamily family) {
  if (state_size == 0 || input_dim == 0 || obs_dim == 0) {
    throw std::invalid_argument("make_model: dimensions must be >= 1");
  }
  RnfModel m;
  m.variant = variant;
  m.family = family;
  m.state_size = state_size;
  m.input_dim = input_dim;
  m.obs_dim = obs_dim;

  Rng rng(mix_seed(seed, 0x6d6f64656cULL));
  const std::size_t J = state_size;

  m.encoders.state_size = J;
  m.encoders.input_dim = input_dim;
  m.encoders.obs_dim = obs_dim;
  m.encoders.propagation = make_lstm(m.params, "enc.prop", 1, J, rng);
  m.encoders.input_dynamics = make_lstm(m.params, "enc.input", input_dim, J, rng);
  m.encoders.error_correction = make_lstm(m.params, "enc.corr", obs_dim, J, rng);

  m.decoder.family = family;
  m.decoder.W_hidden = m.params.add("dec.W_hidden", uniform_matrix(J, J, rng));
  m.decoder.b_hidden = m.params.add("dec.b_hidden", Tensor({J}));
  if (family == ObservationFamily::Gaussian) {
    m.decoder.W_mean = m.params.add("dec.W_mean", uniform_matrix(obs_dim, J, rng));
    m.decoder.b_mean = m.params.add("dec.b_mean", Tensor({obs_dim}));
    m.decoder.W_sigma = m.params.add("dec.W_sigma", uniform_matrix(obs_dim, J, rng));
    m.decoder.b_sigma = m.params.add("dec.b_sigma", Tensor({obs_dim}));
  } else {
    m.decoder.W_logit = m.params.add("dec.W_logit", uniform_matrix(obs_dim, J, rng));
    m.decoder.b_logit = m.params.add("dec.b_logit", Tensor({obs_dim}));
  }

  if (is_variational(variant)) {
    VariationalHeadIds head;
    head.W_mean = m.params.add("head.W_mean", uniform_matrix(J, J, rng));
    head.b_mean = m.params.add("head.b_mean", Tensor({J}));
    head.W_sigma = m.params.add("head.W_sigma", uniform_matrix(J, J, rng));
    head.b_sigma = m.params.add("head.b_sigma", Tensor({J}));
    m.head = head;
  }

  if (variant == Variant::VrnfKf) {
    // Positivity-constrained coefficients initialised so softplus(raw) = 1;
    // free linear terms start at zero.
    const double raw_one = act::softplus_inv(1.0);
    KfPriorIds kf;
    kf.raw_transition = m.params.add("prior.raw_a", Tensor::full({J}, raw_one));
    kf.drift = m.params.add("prior.c", Tensor({J}));
    kf.raw_noise_prop = m.params.add("prior.raw_q_prop", Tensor::full({J}, raw_one));
    kf.input_matrix = m.params.add("prior.B", uniform_matrix(J, input_dim, rng));
    kf.raw_noise_input = m.params.add("prior.raw_q_input", Tensor::full({J}, raw_one));
    kf.raw_gain_keep = m.params.add("prior.raw_k", Tensor::full({J}, raw_one));
    kf.obs_matrix = m.params.add("prior.H", uniform_matrix(J, obs_dim, rng));
    m.kf_prior = kf;
  } else if (variant == Variant::VrnfNn) {
    NnPriorIds nn;
    nn.prop_mean = make_mlp(m.params, "prior.prop_mean", J, J, J, rng);
    nn.prop_var = make_mlp(m.params, "prior.prop_var", J, J, J, rng);
    nn.input_mean = make_mlp(m.params, "prior.input_mean", J + input_dim, J, J, rng);
    nn.input_var = make_mlp(m.params, "prior.input_var", J + input_dim, J, J, rng);
    nn.corr_mean = make_mlp(m.params, "prior.corr_mean", J + obs_dim, J, J, rng);
    nn.corr_var = make_mlp(m.params, "prior.corr_var", J + obs_dim, J, J, rng);
    m.nn_prior = nn;
  }

  return m;
}

BeliefState initial_belief(std::size_t state_size) {
  BeliefState b;
  b.propagation = lstm_init_state(state_size);
  b.input_dynamics = lstm_init_state(state_size);
  b.error_correction = lstm_init_state(state_size);
  return b;
}

LstmState propagate(const ParamStore& store, const EncoderStack& enc, const BeliefState& prev) {
  static constexpr double kConstInput[1] = {1.0};
  return lstm_step(store, enc.propagation, prev.terminal(), kConstInput);
}

LstmState apply_input(const ParamStore& store, const EncoderStack& enc, const LstmState& prop_state,
                      std::span<const double> input) {
  return lstm_step(store, enc.input_dynamics, prop_state, input);
}

LstmState correct(const ParamStore& store, const EncoderStack& enc, const LstmState& latest_state,
                  std::span<const double> observation) {
  return lstm_step(store, enc.error_correction, latest_state, observation);
}

LatentStats latent_stats(const ParamStore& store, const VariationalHeadIds& head,
                         std::span<const double> encoder_output) {
  LatentStats stats;
  stats.mean = affine(store.value(head.W_mean), store.value(head.b_mean), encoder_output);
  stats.sigma = affine(store.value(head.W_sigma), store.value(head.b_sigma), encoder_output);
  for (double& v : stats.sigma) v = act::softplus(v);
  return stats;
}

std::vector<double> draw_latent(const LatentStats& stats, std::span<const double> noise) {
  if (noise.size() != stats.mean.size()) {
    throw std::invalid_argument("draw_latent: noise size mismatch");
  }
  std::vector<double> x(stats.mean.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = stats.mean[j] + stats.sigma[j] * noise[j];
  return x;
}

std::span<const double> select_z(Variant variant, std::span<const double> encoder_output,
                                 const std::vector<double>* latent_sample) {
  if (!is_variational(variant)) return encoder_output;
  if (latent_sample == nullptr) {
    throw std::invalid_argument("select_z: variational variant requires a latent sample");
  }
  return *latent_sample;
}

GaussianPrediction emit_gaussian(const ParamStore& store, const DecoderIds& dec,
                                 std::span<const double> z) {
  if (dec.family != ObservationFamily::Gaussian) {
    throw std::invalid_argument("emit_gaussian: decoder has a Bernoulli head");
  }
  std::vector<double> hidden = affine(store.value(dec.W_hidden), store.value(dec.b_hidden), z);
  for (double& v : hidden) v = act::elu(v);
  GaussianPrediction out;
  out.mean = affine(store.value(dec.W_mean), store.value(dec.b_mean), hidden);
  out.sigma = affine(store.value(dec.W_sigma), store.value(dec.b_sigma), hidden);
  for (double& v : out.sigma) v = act::softplus(v);
  return out;
}

std::vector<double> emit_bernoulli(const ParamStore& store, const DecoderIds& dec,
                                   std::span<const double> z) {
  if (dec.family != ObservationFamily::Bernoulli) {
    throw std::invalid_argument("emit_bernoulli: decoder has a Gaussian head");
  }
  std::vector<double> hidden = affine(store.value(dec.W_hidden), store.value(dec.b_hidden), z);
  for (double& v : hidden) v = act::elu(v);
  std::vector<double> p = affine(store.value(dec.W_logit), store.value(dec.b_logit), hidden);
  for (double& v : p) v = act::sigmoid(v);
  return p;
}

BoundDecoder bind_decoder(Tape& tape, const ParamStore& store, const DecoderIds& dec) {
  if (dec.family != ObservationFamily::Gaussian) {
    throw std::invalid_argument("bind_decoder: training losses support the Gaussian head");
  }
  BoundDecoder b;
  b.W_hidden = tape.param(store, dec.W_hidden);
  b.b_hidden = tape.param(store, dec.b_hidden);
  b.W_mean = tape.param(store, dec.W_mean);
  b.b_mean = tape.param(store, dec.b_mean);
  b.W_sigma = tape.param(store, dec.W_sigma);
  b.b_sigma = tape.param(store, dec.b_sigma);
  return b;
}

BoundHead bind_head(Tape& tape, const ParamStore& store, const VariationalHeadIds& head) {
  BoundHead b;
  b.W_mean = tape.param(store, head.W_mean);
  b.b_mean = tape.param(store, head.b_mean);
  b.W_sigma = tape.param(store, head.W_sigma);
  b.b_sigma = tape.param(store, head.b_sigma);
  return b;
}

TapedGaussian taped_emit_gaussian(Tape& tape, const BoundDecoder& dec, VarId z) {
  const VarId hidden = tape.elu(tape.add(tape.matmul(dec.W_hidden, z), dec.b_hidden));
  TapedGaussian out;
  out.mean = tape.add(tape.matmul(dec.W_mean, hidden), dec.b_mean);
  out.sigma = tape.softplus(tape.add(tape.matmul(dec.W_sigma, hidden), dec.b_sigma));
  return out;
}

TapedGaussian taped_latent_stats(Tape& tape, const BoundHead& head, VarId encoder_output) {
  TapedGaussian out;
  out.mean = tape.add(tape.matmul(head.W_mean, encoder_output), head.b_mean);
  out.sigma = tape.softplus(tape.add(tape.matmul(head.W_sigma, encoder_output), head.b_sigma));
  return out;
}

VarId taped_draw_latent(Tape& tape, const TapedGaussian& stats, VarId noise) {
  return tape.add(stats.mean, tape.hadamard(stats.sigma, noise));
}

}  // namespace rnf
