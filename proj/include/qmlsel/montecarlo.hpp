#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qmlsel/criteria.hpp"
#include "qmlsel/estimator.hpp"
#include "qmlsel/model.hpp"

namespace qmlsel {

struct ExperimentConfig {
  std::string label;
  ParamVector dgp;
  std::vector<ModelSpec> family;
  std::vector<Eigen::Index> n_values;
  int n_reps = 1;
  std::vector<Criterion> criteria;
  std::uint64_t master_seed = 0;
  Eigen::Index oracle_n = 100000;
  std::size_t burn_in = limits::kDefaultBurnIn;
  FitOptions fit;
};

/// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& config);

/// Seed of replication r at length n. Depends on nothing else.
std::uint64_t replication_seed(std::uint64_t master_seed, Eigen::Index n, int rep);

/// Seed of the shared oracle trajectory for length n; disjoint from the
/// replication streams.
std::uint64_t oracle_seed(std::uint64_t master_seed, Eigen::Index n);

struct ConsistencyCell {
  Eigen::Index n = 0;
  std::string criterion;
  int count_true = 0;
  int count_overfit = 0;
  int count_misspec = 0;
  int count_failed = 0;
  int n_reps = 0;

  double pct(int count) const { return 100.0 * count / n_reps; }
  double pct_true() const { return pct(count_true); }
  double pct_overfit() const { return pct(count_overfit); }
  double pct_misspec() const { return pct(count_misspec); }
  double pct_failed() const { return pct(count_failed); }
};

struct ConsistencyTable {
  std::string label;
  std::vector<ConsistencyCell> cells;  // n-major, criteria in config order
  const ConsistencyCell& at(Eigen::Index n, const std::string& criterion) const;
};

struct EfficiencyCell {
  Eigen::Index n = 0;
  std::string criterion;
  double me = 0.0;                  // n·(mean ℓ̃(θ̂_m̂) − mean ℓ̃(θ̂_m*))
  double mean_loss_selected = 0.0;  // mean ℓ̃(θ̂_m̂, θ*)
  double mean_loss_true = 0.0;      // mean ℓ̃(θ̂_m*, θ*)
  double me_std_error = 0.0;        // standard error of `me` across replications
  int n_used = 0;                   // replications where both fits were available
};

struct EfficiencyTable {
  std::string label;
  std::vector<EfficiencyCell> cells;
  const EfficiencyCell& at(Eigen::Index n, const std::string& criterion) const;
};

struct OracleRisk {
  double risk = 0.0;       // R̃(θ) = γ̂_N(θ) on the oracle trajectory
  double std_error = 0.0;  // sd of the per-t contrast / √N
};

/// Simulates one oracle trajectory of length oracle_n from the dgp and
/// evaluates γ̂_N at every point with that point's own recursions.
std::vector<OracleRisk> oracle_risk(const ParamVector& dgp, const std::vector<ParamVector>& points,
                                    Eigen::Index oracle_n, std::uint64_t seed,
                                    std::size_t burn_in = limits::kDefaultBurnIn);

/// Percentages of true / overfit / misspecified / failed selections.
/// Identical output for every `threads` value.
ConsistencyTable run_consistency(const ExperimentConfig& config, unsigned threads = 1);

/// M̂E per (n, criterion) with one shared oracle trajectory per n.
EfficiencyTable run_efficiency(const ExperimentConfig& config, unsigned threads = 1);

}  // namespace qmlsel
