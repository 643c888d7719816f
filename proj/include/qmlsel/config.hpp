#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qmlsel/estimator.hpp"
#include "qmlsel/model.hpp"
#include "qmlsel/montecarlo.hpp"

namespace qmlsel {

inline constexpr int kConfigSchema = 1;

/// Experiment configuration file, flat `key = value` lines under section
/// headers; `#` starts a comment.
///
///   schema = 1
///   [experiment]
///   label = dgp2
///   dgp = arma(1,1)
///   theta = 0.5,0.6,1
///   family = arma(0..2,0..2)+garch(1,1)
///   n_values = 200,1000
///   n_reps = 100
///   criteria = aic,bic,kcprime
///   master_seed = 20240607
///   oracle_n = 100000          (optional)
///   burn_in = 1000             (optional)
///   [fit]                      (optional section)
///   max_iter = 500
///   grad_tol = 1e-06
///   n_restarts = 3
///   restart_jitter = 0.1
///   [output]
///   dir = results
struct RunConfig {
  int schema = kConfigSchema;
  std::string label;
  ModelSpec dgp;
  std::vector<double> theta;
  std::string family;  // family expression, kept verbatim
  std::vector<Eigen::Index> n_values;
  int n_reps = 0;
  std::vector<std::string> criteria;
  std::uint64_t master_seed = 0;
  Eigen::Index oracle_n = 100000;
  std::size_t burn_in = limits::kDefaultBurnIn;
  FitOptions fit;
  std::string output_dir = ".";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ConfigError (naming the key) on unknown sections or keys, missing
/// required keys, malformed values or a schema other than 1.
RunConfig parse_run_config(std::string_view text);

std::string serialize_run_config(const RunConfig& config);

/// Resolves model strings and criteria, then validates. Throws ConfigError.
ExperimentConfig to_experiment(const RunConfig& config);

/// FNV-1a of the serialized configuration, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace qmlsel
