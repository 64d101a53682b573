#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

#include "rnf/dataset.hpp"
#include "rnf/kalman.hpp"
#include "rnf/model.hpp"
#include "rnf/rng.hpp"

namespace rnf::test {

/// Unique scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("rnf-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Fills every parameter with uniform values in [-bound, bound].
inline void randomize_params(ParamStore& store, double bound, std::uint64_t seed) {
  Rng rng(seed);
  for (ParamId id = 0; id < store.count(); ++id) {
    for (double& v : store.value(id).values()) v = rng.uniform(-bound, bound);
  }
}

/// 1-D driven LGSSM used across tests: x' = 0.9 x + 0.5 u + eps.
inline LgssmSpec smoke_spec() {
  LgssmSpec spec;
  spec.state_dim = 1;
  spec.input_dim = 1;
  spec.obs_dim = 1;
  spec.A = Mat(1, 1, {0.9});
  spec.B = Mat(1, 1, {0.5});
  spec.H = Mat(1, 1, {1.0});
  spec.Q = Mat(1, 1, {0.1});
  spec.R = Mat(1, 1, {0.1});
  spec.c = {0.0};
  spec.D = Mat(1, 1, {1.0});
  return spec;
}

inline Trajectory random_trajectory(std::size_t length, std::size_t input_dim, std::size_t obs_dim,
                                    std::uint64_t seed) {
  Trajectory t = make_trajectory(length, input_dim, obs_dim);
  Rng rng(seed);
  for (double& v : t.inputs) v = rng.normal();
  for (double& v : t.observations) v = rng.normal();
  t.source = "random";
  return t;
}

}  // namespace rnf::test
