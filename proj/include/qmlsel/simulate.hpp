#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "qmlsel/model.hpp"

namespace qmlsel {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for stream (a, b) under a master seed. Depends on nothing else.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(mix64(master) ^ a) ^ (b * 0xd1342543de82ef95ULL));
}

/// Standard Gaussian draws with a fully specified algorithm: mt19937_64 words
/// turned into 53-bit uniforms, then the Box–Muller transform (both outputs
/// used). Unlike std::normal_distribution the sequence is identical across
/// standard libraries.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double operator()();
  Eigen::VectorXd draw(Eigen::Index count);

 private:
  double uniform();  // in (0, 1)

  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// X_t = M_θ(past)·ξ_t + f_θ(past) driven by `noise`, pre-sample values zero.
/// The first `burn_in` values are discarded, so noise.size() must be
/// burn_in + n. Throws NonStationaryParams / NumericOverflow.
Trajectory simulate_with_noise(const ParamVector& theta, const Eigen::Ref<const Eigen::VectorXd>& noise,
                               std::size_t burn_in);

/// Simulation with i.i.d. N(0,1) innovations from GaussianStream(seed).
Trajectory simulate(const ParamVector& theta, std::size_t n, std::uint64_t seed,
                    std::size_t burn_in = limits::kDefaultBurnIn);

}  // namespace qmlsel
