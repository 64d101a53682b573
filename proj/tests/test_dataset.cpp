#include <doctest.h>

#include <cmath>
#include <fstream>

#include "rnf/dataset.hpp"
#include "test_util.hpp"

using namespace rnf;
using rnf::test::TempDir;

namespace {

const char* kUciHeader =
    "Date;Time;Global_active_power;Global_reactive_power;Voltage;Global_intensity;"
    "Sub_metering_1;Sub_metering_2;Sub_metering_3\n";

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("trajectory csv round trip") {
  TempDir dir("traj");
  Trajectory t = rnf::test::random_trajectory(17, 2, 1, 401);
  t.input_present[3] = 0;
  t.obs_present[9] = 0;
  const auto path = dir.path() / "t.csv";
  write_trajectory_csv(t, path);
  const Trajectory back = load_trajectory_csv(path);
  REQUIRE(back.length == t.length);
  REQUIRE(back.input_dim == 2);
  REQUIRE(back.obs_dim == 1);
  for (std::size_t i = 0; i < t.inputs.size(); ++i) CHECK(back.inputs[i] == t.inputs[i]);
  for (std::size_t i = 0; i < t.observations.size(); ++i) {
    CHECK(back.observations[i] == t.observations[i]);
  }
  CHECK(back.input_present[3] == 0);
  CHECK(back.obs_present[9] == 0);
  CHECK(back.obs_present[8] == 1);
}

TEST_CASE("trajectory csv error reporting") {
  TempDir dir("badtraj");
  const auto path = dir.path() / "bad.csv";
  write_file(path, "u_1,y_1\n1.0,2.0\n1.0\n");
  try {
    load_trajectory_csv(path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }

  const auto odd = dir.path() / "odd.csv";
  write_file(odd, "u_1,weird\n1.0,2.0\n");
  CHECK_THROWS_AS(load_trajectory_csv(odd), std::runtime_error);
}

TEST_CASE("electricity loader parses the documented layout") {
  TempDir dir("uci");
  const auto path = dir.path() / "power.txt";
  write_file(path, std::string(kUciHeader) +
                       "16/12/2006;17:24:00;4.216;0.418;234.840;18.400;0.000;1.000;17.000\n"
                       "16/12/2006;17:25:00;5.360;0.436;233.630;23.000;0.000;1.000;16.000\n"
                       "16/12/2006;17:26:00;5.374;0.498;233.290;23.000;0.000;2.000;17.000\n"
                       "28/4/2007;00:21:00;?;0.000;235.000;0.000;0.000;0.000;0.000\n");
  const Trajectory t = load_electricity(path);
  REQUIRE(t.length == 4);
  REQUIRE(t.input_dim == 6);
  REQUIRE(t.obs_dim == 1);

  CHECK(t.observations[0] == doctest::Approx(4.216));
  // inputs ordered: reactive, intensity, voltage, sub1, sub2, sub3
  CHECK(t.inputs[0] == doctest::Approx(0.418));
  CHECK(t.inputs[1] == doctest::Approx(18.400));
  CHECK(t.inputs[2] == doctest::Approx(234.840));
  CHECK(t.inputs[3] == doctest::Approx(0.0));
  CHECK(t.inputs[4] == doctest::Approx(1.0));
  CHECK(t.inputs[5] == doctest::Approx(17.0));

  // the "?" row keeps its slot but is masked in both streams
  CHECK(t.obs_present[3] == 0);
  CHECK(t.input_present[3] == 0);
  CHECK(t.obs_present[2] == 1);
}

TEST_CASE("electricity loader rejects malformed rows with line numbers") {
  TempDir dir("ucibad");
  const auto path = dir.path() / "power.txt";
  write_file(path, std::string(kUciHeader) +
                       "16/12/2006;17:24:00;4.216;0.418;234.840;18.400;0.000;1.000;17.000\n"
                       "16/12/2006;17:25:00;5.360;0.436\n");
  try {
    load_electricity(path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }

  const auto empty = dir.path() / "empty.txt";
  write_file(empty, "");
  CHECK_THROWS_AS(load_electricity(empty), std::runtime_error);
}

TEST_CASE("chronological split arithmetic and ordering") {
  Trajectory t = rnf::test::random_trajectory(10, 1, 1, 403);
  for (std::size_t i = 0; i < 10; ++i) t.observations[i] = static_cast<double>(i);
  const Split s = chronological_split(t);
  CHECK(s.train.length == 6);
  CHECK(s.validation.length == 2);
  CHECK(s.test.length == 2);

  // concatenation reproduces the original and order is preserved
  std::vector<double> joined;
  for (const Trajectory* part : {&s.train, &s.validation, &s.test}) {
    joined.insert(joined.end(), part->observations.begin(), part->observations.end());
  }
  for (std::size_t i = 0; i < 10; ++i) CHECK(joined[i] == t.observations[i]);
  CHECK(s.train.observations.back() < s.test.observations.front());

  CHECK_THROWS_AS(chronological_split(rnf::test::random_trajectory(2, 1, 1, 404)),
                  std::invalid_argument);
  CHECK_THROWS_AS(chronological_split(t, SplitFractions{0.5, 0.2, 0.2}), std::invalid_argument);
}

TEST_CASE("zscore normalisation") {
  const Trajectory t = rnf::test::random_trajectory(500, 2, 1, 405);
  const Split s = chronological_split(t);
  auto [normed, stats] = normalize(s.train, NormMethod::Zscore, s.train);

  for (std::size_t f = 0; f < 3; ++f) {
    double mean = 0.0;
    const std::size_t T = normed.length;
    auto value = [&](std::size_t step) {
      return f < 2 ? normed.inputs[step * 2 + f] : normed.observations[step];
    };
    for (std::size_t i = 0; i < T; ++i) mean += value(i);
    mean /= static_cast<double>(T);
    double sd = 0.0;
    for (std::size_t i = 0; i < T; ++i) sd += (value(i) - mean) * (value(i) - mean);
    sd = std::sqrt(sd / static_cast<double>(T - 1));
    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(sd - 1.0) < 1e-10);
  }

  SUBCASE("inverse recovers the original") {
    const Trajectory back = invert_normalization(normed, stats);
    for (std::size_t i = 0; i < s.train.inputs.size(); ++i) {
      CHECK(back.inputs[i] == doctest::Approx(s.train.inputs[i]).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < s.train.observations.size(); ++i) {
      CHECK(back.observations[i] == doctest::Approx(s.train.observations[i]).epsilon(1e-12));
    }
  }

  SUBCASE("constants depend only on the training partition") {
    auto [normed2, stats2] = normalize(s.test, NormMethod::Zscore, s.train);
    for (std::size_t f = 0; f < stats.offset.size(); ++f) {
      CHECK(stats2.offset[f] == stats.offset[f]);
      CHECK(stats2.scale[f] == stats.scale[f]);
    }
  }
}

TEST_CASE("minmax normalisation maps the training extremes to the unit interval") {
  const Trajectory t = rnf::test::random_trajectory(200, 1, 1, 407);
  auto [normed, stats] = normalize(t, NormMethod::Minmax, t);
  double lo = 1e300, hi = -1e300;
  for (const double v : normed.observations) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(hi == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero-variance feature is left unscaled") {
  Trajectory t = rnf::test::random_trajectory(50, 1, 1, 409);
  for (std::size_t i = 0; i < 50; ++i) t.inputs[i] = 3.0;
  auto [normed, stats] = normalize(t, NormMethod::Zscore, t);
  CHECK(stats.scale[0] == 1.0);
  for (const double v : normed.inputs) CHECK(v == 0.0);  // centred but not scaled
}

TEST_CASE("ewm normalisation is causal and invertible") {
  Trajectory t = rnf::test::random_trajectory(300, 1, 1, 411);
  auto [normed, stats] = normalize(t, NormMethod::Ewm, t);

  SUBCASE("inverse recovers the original") {
    const Trajectory back = invert_normalization(normed, stats);
    for (std::size_t i = 0; i < t.observations.size(); ++i) {
      CHECK(back.observations[i] == doctest::Approx(t.observations[i]).epsilon(1e-12));
    }
  }

  SUBCASE("future values cannot affect past scaling") {
    Trajectory later = t;
    later.observations[200] += 100.0;
    const Trajectory normed2 = apply_normalization(later, stats);
    for (std::size_t i = 0; i < 200; ++i) {
      CHECK(normed2.observations[i] == normed.observations[i]);
    }
  }

  SUBCASE("inputs pass through untouched") {
    for (std::size_t i = 0; i < t.inputs.size(); ++i) CHECK(normed.inputs[i] == t.inputs[i]);
  }
}

TEST_CASE("realized variance series") {
  SUBCASE("constant price gives zeros") {
    std::vector<double> logp(40, std::log(101.5));
    const auto rv = realized_variance_series(logp, 30);
    REQUIRE(rv.size() == 40 - 30);
    for (const double v : rv) CHECK(v == 0.0);
  }
  SUBCASE("two returns of one percent with window two") {
    const std::vector<double> logp{0.0, 0.01, 0.02};
    const auto rv = realized_variance_series(logp, 2);
    REQUIRE(rv.size() == 1);
    CHECK(rv[0] == doctest::Approx(2e-4).epsilon(1e-12));
  }
  SUBCASE("a spike beyond ten rolling deviations is replaced by its predecessor") {
    // Mild noise establishes the rolling scale, then one huge burst.
    Rng rng(413);
    std::vector<double> logp{0.0};
    for (int i = 0; i < 300; ++i) logp.push_back(logp.back() + 0.001 * rng.normal());
    const std::size_t spike_at = logp.size();
    logp.push_back(logp.back() + 0.5);  // 500x the typical move
    for (int i = 0; i < 5; ++i) logp.push_back(logp.back());

    SpikeRule off;
    off.enabled = false;
    const auto raw = realized_variance_series(logp, 30, off);
    const auto filtered = realized_variance_series(logp, 30);
    const std::size_t idx = spike_at - 30;  // rv index hit by the burst return
    CHECK(raw[idx] > filtered[idx]);
    CHECK(filtered[idx] == filtered[idx - 1]);
  }
  SUBCASE("non-positive prices are rejected upstream of the log") {
    CHECK_THROWS_AS(realized_variance_series(std::array{0.0, std::nan("")}, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("microstructure features") {
  SUBCASE("balanced book gives the midprice") {
    const QuoteFeatures f = microstructure_features(99.0, 101.0, 250.0, 250.0);
    CHECK(f.microprice == doctest::Approx(100.0));
    CHECK(f.imbalance == 0.0);
  }
  SUBCASE("worked example") {
    const QuoteFeatures f = microstructure_features(99.0, 101.0, 300.0, 100.0);
    CHECK(f.microprice == doctest::Approx(100.5));
    CHECK(f.imbalance == doctest::Approx(0.5));
  }
  SUBCASE("imbalance bounds hold for random positive volumes") {
    Rng rng(415);
    for (int i = 0; i < 1000000; ++i) {
      const double vb = rng.uniform(1e-9, 1e6);
      const double va = rng.uniform(1e-9, 1e6);
      const double imb = (vb - va) / (vb + va);
      CHECK(imb >= -1.0);
      CHECK(imb <= 1.0);
    }
  }
  SUBCASE("zero total volume throws") {
    CHECK_THROWS_AS(microstructure_features(99.0, 101.0, 0.0, 0.0), std::invalid_argument);
  }
  SUBCASE("series transform wires returns and imbalance") {
    const std::vector<double> pb{99.0, 99.0, 100.0};
    const std::vector<double> pa{101.0, 101.0, 102.0};
    const std::vector<double> vb{100.0, 300.0, 100.0};
    const std::vector<double> va{100.0, 100.0, 100.0};
    const Trajectory t = microstructure_trajectory(pb, pa, vb, va);
    REQUIRE(t.length == 2);
    CHECK(t.observations[0] == doctest::Approx((100.5 - 100.0) / 100.0));
    CHECK(t.inputs[0] == doctest::Approx(0.5));
  }
}

TEST_CASE("session filter keeps the trading window") {
  const std::vector<double> seconds{8 * 3600.0, 8.5 * 3600.0, 12 * 3600.0, 16 * 3600.0,
                                    16 * 3600.0 + 1};
  const auto kept = session_filter(seconds);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0] == 1);
  CHECK(kept[1] == 2);
  CHECK(kept[2] == 3);
}

}  // TEST_SUITE
