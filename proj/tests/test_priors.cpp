#include <doctest.h>

#include <cmath>

#include "rnf/activations.hpp"
#include "rnf/model.hpp"
#include "rnf/priors.hpp"
#include "test_util.hpp"

using namespace rnf;

namespace {

constexpr double kGolden = 1.6180339887498949;  // (1+sqrt(5))/2

/// Monte-Carlo KL oracle: mean of log q(z) - log p(z) over draws from q.
double mc_kl(const std::vector<double>& qm, const std::vector<double>& qs,
             const std::vector<double>& pm, const std::vector<double>& pg, std::size_t n,
             std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = qm.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double log_q = 0.0, log_p = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double z = qm[j] + qs[j] * rng.normal();
      const double dq = (z - qm[j]) / qs[j];
      const double dp = (z - pm[j]) / pg[j];
      log_q += -std::log(qs[j]) - 0.5 * dq * dq;
      log_p += -std::log(pg[j]) - 0.5 * dp * dp;
    }
    acc += log_q - log_p;
  }
  return acc / static_cast<double>(n);
}

void set_raw_softplus(ParamStore& store, ParamId id, double target) {
  // softplus(-1000) underflows to exactly zero, which encodes target 0.
  const double raw = target == 0.0 ? -1000.0 : act::softplus_inv(target);
  for (double& v : store.value(id).values()) v = raw;
}

}  // namespace

TEST_SUITE("priors") {

TEST_CASE("kf prior identity parameters pass conditioning through") {
  RnfModel model = make_model(Variant::VrnfKf, 3, 2, 1, 5);
  KfPriorIds& ids = *model.kf_prior;
  set_raw_softplus(model.params, ids.raw_transition, 1.0);
  set_raw_softplus(model.params, ids.raw_noise_prop, 0.0);
  for (double& v : model.params.value(ids.drift).values()) v = 0.0;

  const std::vector<double> m{0.3, -0.8, 1.2};
  const std::vector<double> V{0.5, 1.5, 2.0};
  const PriorStats out = kf_prior_step(model.params, ids, PriorStage::Propagation, m, V);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(out.mean[j] == doctest::Approx(m[j]).epsilon(1e-12));
    CHECK(out.variance[j] == doctest::Approx(V[j]).epsilon(1e-12));
  }
}

TEST_CASE("kf prior correction identity") {
  RnfModel model = make_model(Variant::VrnfKf, 3, 2, 1, 7);
  KfPriorIds& ids = *model.kf_prior;
  set_raw_softplus(model.params, ids.raw_gain_keep, 1.0);
  for (double& v : model.params.value(ids.obs_matrix).values()) v = 0.0;

  const std::vector<double> m{0.3, -0.8, 1.2};
  const std::vector<double> V{0.5, 1.5, 2.0};
  const std::vector<double> y{4.0};
  const PriorStats out = kf_prior_step(model.params, ids, PriorStage::ErrorCorrection, m, V, {}, y);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(out.mean[j] == doctest::Approx(m[j]).epsilon(1e-12));
    CHECK(out.variance[j] == doctest::Approx(V[j]).epsilon(1e-12));
  }
}

TEST_CASE("kf prior requires the stage argument") {
  const RnfModel model = make_model(Variant::VrnfKf, 2, 1, 1, 9);
  const std::vector<double> m{0.0, 0.0}, V{1.0, 1.0};
  CHECK_THROWS_AS(kf_prior_step(model.params, *model.kf_prior, PriorStage::InputDynamics, m, V),
                  std::invalid_argument);
  CHECK_THROWS_AS(kf_prior_step(model.params, *model.kf_prior, PriorStage::ErrorCorrection, m, V),
                  std::invalid_argument);
}

TEST_CASE("riccati fixed point and fitted constant gain") {
  // Oracle: iterate the exact predicted-variance recursion for A=H=Q=R=1
  // until convergence; the fixed point is the golden ratio.
  double P = 1.0;
  for (int i = 0; i < 200; ++i) P = P - P * P / (P + 1.0) + 1.0;
  CHECK(std::abs(P - kGolden) < 1e-9);

  // Constant-gain form: K = P/(P+R), corrected variance (1-K)P, then one
  // propagation. The prior recursion fitted at the fixed point must
  // reproduce it.
  RnfModel model = make_model(Variant::VrnfKf, 1, 1, 1, 11);
  KfPriorIds& ids = *model.kf_prior;
  set_raw_softplus(model.params, ids.raw_transition, 1.0);
  set_raw_softplus(model.params, ids.raw_noise_prop, 1.0);
  const double keep = 1.0 - P / (P + 1.0);
  set_raw_softplus(model.params, ids.raw_gain_keep, keep);
  for (double& v : model.params.value(ids.drift).values()) v = 0.0;
  for (double& v : model.params.value(ids.obs_matrix).values()) v = 0.0;

  std::vector<double> m{0.0}, V{1.0};
  double predicted = 0.0;
  for (int i = 0; i < 200; ++i) {
    const PriorStats prop = kf_prior_step(model.params, ids, PriorStage::Propagation, m, V);
    predicted = prop.variance[0];
    const PriorStats corr = kf_prior_step(model.params, ids, PriorStage::ErrorCorrection,
                                          prop.mean, prop.variance, {}, std::array{0.0});
    V = corr.variance;
    m = corr.mean;
  }
  CHECK(std::abs(predicted - kGolden) < 1e-9);
}

TEST_CASE("nn prior zero weights") {
  RnfModel model = make_model(Variant::VrnfNn, 3, 2, 1, 13);
  for (ParamId id = 0; id < model.params.count(); ++id) {
    const std::string& name = model.params.name(id);
    if (name.rfind("prior.", 0) == 0) {
      for (double& v : model.params.value(id).values()) v = 0.0;
    }
  }
  const std::vector<double> m{0.5, 0.5, 0.5}, V{1.0, 1.0, 1.0};
  const PriorStats out = nn_prior_step(model.params, *model.nn_prior, PriorStage::Propagation, m, V);
  const double ln2 = std::log(2.0);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(out.mean[j] == 0.0);
    // deviation softplus(0) = ln 2, variance its square
    CHECK(out.variance[j] == doctest::Approx(ln2 * ln2).epsilon(1e-15));
  }
}

TEST_CASE("nn prior variance strictly positive under random parameters") {
  Rng rng(17);
  for (int draw = 0; draw < 300; ++draw) {
    RnfModel model = make_model(Variant::VrnfNn, 2, 1, 1, 1000 + draw);
    rnf::test::randomize_params(model.params, 3.0, 2000 + draw);
    const std::vector<double> m{rng.normal(), rng.normal()};
    const std::vector<double> V{std::abs(rng.normal()) + 0.01, std::abs(rng.normal()) + 0.01};
    const std::vector<double> u{rng.normal()};
    const std::vector<double> y{rng.normal()};
    for (const PriorStage stage :
         {PriorStage::Propagation, PriorStage::InputDynamics, PriorStage::ErrorCorrection}) {
      const PriorStats out = nn_prior_step(model.params, *model.nn_prior, stage, m, V, u, y);
      for (double v : out.variance) CHECK(v > 0.0);
    }
  }
}

TEST_CASE("kl_diag analytic fixtures") {
  SUBCASE("identical distributions") {
    const std::vector<double> m{0.4, -1.0}, s{0.8, 1.7};
    CHECK(std::abs(kl_diag(m, s, m, s)) < 1e-12);
  }
  SUBCASE("unit gaussians one apart") {
    CHECK(kl_diag(std::array{0.0}, std::array{1.0}, std::array{1.0}, std::array{1.0}) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("variance four") {
    const double expected = std::log(2.0) + 0.125 - 0.5;
    CHECK(kl_diag(std::array{0.0}, std::array{1.0}, std::array{0.0}, std::array{2.0}) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.318147).epsilon(1e-5));
  }
  SUBCASE("non-positive deviation throws") {
    CHECK_THROWS_AS(kl_diag(std::array{0.0}, std::array{0.0}, std::array{0.0}, std::array{1.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("kl_diag against the Monte-Carlo oracle") {
  const std::vector<double> qm{0.0}, qs{1.0};
  SUBCASE("mean shift") {
    const double analytic = kl_diag(qm, qs, std::array{1.0}, std::array{1.0});
    const double mc = mc_kl(qm, qs, {1.0}, {1.0}, 1000000, 19);
    CHECK(std::abs(analytic - mc) / analytic < 0.01);
  }
  SUBCASE("variance widening") {
    const double analytic = kl_diag(qm, qs, std::array{0.0}, std::array{2.0});
    const double mc = mc_kl(qm, qs, {0.0}, {2.0}, 1000000, 23);
    CHECK(std::abs(analytic - mc) / analytic < 0.01);
  }
}

TEST_CASE("kl_diag properties") {
  Rng rng(29);
  SUBCASE("non-negative and additive over dimensions") {
    for (int trial = 0; trial < 200; ++trial) {
      const std::vector<double> qm{rng.normal(), rng.normal()};
      const std::vector<double> qs{rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)};
      const std::vector<double> pm{rng.normal(), rng.normal()};
      const std::vector<double> pg{rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)};
      const double full = kl_diag(qm, qs, pm, pg);
      CHECK(full >= 0.0);
      const double parts =
          kl_diag(std::span(qm).first(1), std::span(qs).first(1), std::span(pm).first(1),
                  std::span(pg).first(1)) +
          kl_diag(std::span(qm).subspan(1), std::span(qs).subspan(1), std::span(pm).subspan(1),
                  std::span(pg).subspan(1));
      CHECK(full == doctest::Approx(parts).epsilon(1e-12));
    }
  }
  SUBCASE("taped variance form matches the deviation form") {
    for (int trial = 0; trial < 50; ++trial) {
      const std::vector<double> qm{rng.normal(), rng.normal()};
      const std::vector<double> qs{rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)};
      const std::vector<double> pm{rng.normal(), rng.normal()};
      const std::vector<double> pg{rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)};
      Tape tape;
      const VarId kl = taped_kl(
          tape, tape.constant(Tensor::vec(std::vector<double>(qm))),
          tape.constant(Tensor::vec(std::vector<double>(qs))),
          tape.constant(Tensor::vec(std::vector<double>(pm))),
          tape.constant(Tensor::vec({pg[0] * pg[0], pg[1] * pg[1]})));
      CHECK(tape.value(kl)[0] == doctest::Approx(kl_diag(qm, qs, pm, pg)).epsilon(1e-12));
    }
  }
}

}  // TEST_SUITE
