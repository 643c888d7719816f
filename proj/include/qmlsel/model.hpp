#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace qmlsel {

/// Numerical constants shared by the model recursions and the optimizer.
namespace limits {
inline constexpr double kConstraintMargin = 0.02;     // ε_c in the stationarity budgets
inline constexpr double kScaleVarianceFloor = 1e-6;   // σ_min², ω_min, α0_min
inline constexpr double kScaleVarianceCeil = 1e6;     // σ_max², ω_max, α0_max
inline constexpr double kVarianceFloor = 1e-8;        // clamp inside Ĥ recursions
inline constexpr double kOverflowThreshold = 1e10;    // |X_t| during simulation
inline constexpr std::size_t kDefaultBurnIn = 1000;
}  // namespace limits

enum class Family { WhiteNoise, ARMA, GARCH, APARCH, ARARCH };

/// A model family plus its orders. Construct through the named factories,
/// which normalize degenerate orders (arma(0,0), garch(0,0), aparch(δ;0,0))
/// to WhiteNoise so that equality means "same parameter space".
struct ModelSpec {
  Family family = Family::WhiteNoise;
  int p = 0;
  int q = 0;
  double delta = 0.0;  // APARCH power, zero for every other family

  static ModelSpec white_noise();
  static ModelSpec arma(int p, int q);
  static ModelSpec ar(int p) { return arma(p, 0); }
  static ModelSpec garch(int p, int q);
  static ModelSpec arch(int p) { return garch(p, 0); }
  static ModelSpec aparch(double delta, int p, int q);
  static ModelSpec ararch(int p);

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// |m|: number of free parameters.
Eigen::Index dim(const ModelSpec& spec);

/// Canonical text form: "wn", "arma(p,q)", "garch(p,q)", "aparch(delta;p,q)", "ararch(p)".
std::string to_string(const ModelSpec& spec);

/// Parses one canonical model string. Also accepts "ar(p)" and "arch(p)".
ModelSpec parse_model(std::string_view text);

/// Parses a family expression such as "arma(0..2,0..2)+garch(1,1)".
/// Terms are joined by '+', any order argument may be a range "lo..hi".
/// Duplicates (including the shared white-noise model) are dropped,
/// first occurrence wins.
std::vector<ModelSpec> parse_family(std::string_view text);

/// Formats a family as a '+'-joined list of canonical names.
std::string family_to_string(const std::vector<ModelSpec>& family);

std::vector<std::string> parameter_names(const ModelSpec& spec);

/// True when Θ_inner embeds in Θ_outer by zeroing coordinates.
bool is_nested(const ModelSpec& inner, const ModelSpec& outer);

/// Parameters of one model in canonical order:
///   wn: σ
///   arma: a_1..a_p, b_1..b_q, σ
///   garch: ω, a_1..a_p, b_1..b_q
///   aparch: ω, a_1..a_p, γ_1..γ_p, b_1..b_q
///   ararch: φ, α_0..α_p
struct ParamVector {
  ModelSpec spec;
  Eigen::VectorXd values;

  ParamVector(ModelSpec spec, Eigen::VectorXd values);
  Eigen::Index size() const { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }
};

struct SimulationOrigin {
  std::uint64_t seed = 0;
  ModelSpec spec;
  Eigen::VectorXd theta;
  std::size_t burn_in = 0;
};

/// An observed or simulated series X_1..X_n. Always non-empty and finite.
class Trajectory {
 public:
  explicit Trajectory(Eigen::VectorXd data, std::optional<SimulationOrigin> origin = std::nullopt);

  const Eigen::VectorXd& data() const { return data_; }
  Eigen::Index size() const { return data_.size(); }
  double operator[](Eigen::Index t) const { return data_[t]; }
  const std::optional<SimulationOrigin>& origin() const { return origin_; }

 private:
  Eigen::VectorXd data_;
  std::optional<SimulationOrigin> origin_;
};

/// Truncated conditional mean f̂_t and variance Ĥ_t (0-based index t ↔ time t+1).
struct CondMoments {
  Eigen::VectorXd f_hat;
  Eigen::VectorXd h_hat;
};

/// Zero-initialized recursions: every pre-sample X and latent variance is 0,
/// and Ĥ_t is clamped below at limits::kVarianceFloor.
CondMoments cond_moments(const ParamVector& theta, const Eigen::Ref<const Eigen::VectorXd>& x);
inline CondMoments cond_moments(const ParamVector& theta, const Trajectory& x) {
  return cond_moments(theta, x.data());
}

}  // namespace qmlsel
