#include "qmlsel/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "qmlsel/constraints.hpp"
#include "qmlsel/errors.hpp"
#include "qmlsel/qlik.hpp"
#include "qmlsel/simulate.hpp"

namespace qmlsel {

using Eigen::Index;
using Eigen::VectorXd;

namespace {

constexpr std::uint64_t kOracleSalt = 0x6f7261636c65ULL;  // "oracle"

[[noreturn]] void config_fail(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ConfigError, field + ": " + why);
}

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index
// writes only its own slot, so results never depend on scheduling.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

bool needs_info(const std::vector<Criterion>& criteria) {
  return std::any_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.needs_info(); });
}

bool needs_mu4(const std::vector<Criterion>& criteria) {
  return std::any_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.needs_mu4(); });
}

struct ReplicationOutcome {
  std::vector<std::optional<Classification>> classes;  // per criterion, nullopt = failed
};

}  // namespace

void validate(const ExperimentConfig& c) {
  if (c.n_reps < 1) config_fail("n_reps", "must be >= 1");
  if (c.family.empty()) config_fail("family", "must not be empty");
  if (c.n_values.empty()) config_fail("n_values", "must not be empty");
  for (Index n : c.n_values) {
    if (n < 1) config_fail("n_values", "lengths must be positive");
  }
  if (c.criteria.empty()) config_fail("criteria", "must not be empty");
  if (!is_feasible(c.dgp)) config_fail("theta", "violates the constraint set of " + to_string(c.dgp.spec));
  if (std::find(c.family.begin(), c.family.end(), c.dgp.spec) == c.family.end()) {
    config_fail("family", "must contain the dgp model " + to_string(c.dgp.spec));
  }
  if (c.oracle_n < 10000) config_fail("oracle_n", "must be >= 10000");
  if (c.fit.max_iter < 1) config_fail("max_iter", "must be positive");
  if (!(c.fit.grad_tol > 0)) config_fail("grad_tol", "must be positive");
  if (c.fit.n_restarts < 0) config_fail("n_restarts", "must be non-negative");
  if (!(c.fit.restart_jitter > 0)) config_fail("restart_jitter", "must be positive");
}

std::uint64_t replication_seed(std::uint64_t master_seed, Index n, int rep) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep));
}

std::uint64_t oracle_seed(std::uint64_t master_seed, Index n) {
  return derive_seed(mix64(master_seed ^ kOracleSalt), static_cast<std::uint64_t>(n), 0);
}

const ConsistencyCell& ConsistencyTable::at(Index n, const std::string& criterion) const {
  for (const auto& c : cells) {
    if (c.n == n && c.criterion == criterion) return c;
  }
  throw Error(ErrorCode::InvalidArgument, "no consistency cell for n=" + std::to_string(n) + ", " + criterion);
}

const EfficiencyCell& EfficiencyTable::at(Index n, const std::string& criterion) const {
  for (const auto& c : cells) {
    if (c.n == n && c.criterion == criterion) return c;
  }
  throw Error(ErrorCode::InvalidArgument, "no efficiency cell for n=" + std::to_string(n) + ", " + criterion);
}

std::vector<OracleRisk> oracle_risk(const ParamVector& dgp, const std::vector<ParamVector>& points, Index oracle_n,
                                    std::uint64_t seed, std::size_t burn_in) {
  if (oracle_n < 10000) throw Error(ErrorCode::InvalidArgument, "oracle_n must be >= 10000");
  const Trajectory oracle = simulate(dgp, static_cast<std::size_t>(oracle_n), seed, burn_in);
  std::vector<OracleRisk> out;
  out.reserve(points.size());
  for (const auto& theta : points) {
    const ContrastEval ev = contrast(theta, oracle);
    const double var = (ev.per_t.array() - ev.gamma_bar).square().sum() / static_cast<double>(oracle_n - 1);
    out.push_back({ev.gamma_bar, std::sqrt(var / static_cast<double>(oracle_n))});
  }
  return out;
}

ConsistencyTable run_consistency(const ExperimentConfig& config, unsigned threads) {
  validate(config);
  const bool with_info = needs_info(config.criteria);
  const bool with_mu4 = needs_mu4(config.criteria);
  const std::size_t n_crit = config.criteria.size();
  ConsistencyTable table{config.label, {}};

  for (Index n : config.n_values) {
    std::vector<ReplicationOutcome> outcomes(static_cast<std::size_t>(config.n_reps));
    parallel_for(outcomes.size(), threads, [&](std::size_t r) {
      auto& out = outcomes[r];
      out.classes.assign(n_crit, std::nullopt);
      std::optional<Trajectory> x;
      try {
        x = simulate(config.dgp, static_cast<std::size_t>(n), replication_seed(config.master_seed, n, static_cast<int>(r)),
                     config.burn_in);
      } catch (const Error&) {
        return;
      }
      const auto evidence = gather_evidence(config.family, *x, config.fit, with_info, with_mu4);
      for (std::size_t k = 0; k < n_crit; ++k) {
        try {
          out.classes[k] = select_from_evidence(evidence, config.criteria[k], config.dgp.spec).classification;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::AllModelsFailed) throw;
        }
      }
    });

    for (std::size_t k = 0; k < n_crit; ++k) {
      ConsistencyCell cell{n, config.criteria[k].name(), 0, 0, 0, 0, config.n_reps};
      for (const auto& o : outcomes) {
        if (!o.classes[k]) {
          ++cell.count_failed;
          continue;
        }
        switch (*o.classes[k]) {
          case Classification::TrueModel: ++cell.count_true; break;
          case Classification::Overfit: ++cell.count_overfit; break;
          case Classification::Misspecified: ++cell.count_misspec; break;
        }
      }
      table.cells.push_back(cell);
    }
  }
  return table;
}

EfficiencyTable run_efficiency(const ExperimentConfig& config, unsigned threads) {
  validate(config);
  const bool with_info = needs_info(config.criteria);
  const bool with_mu4 = needs_mu4(config.criteria);
  const std::size_t n_crit = config.criteria.size();
  EfficiencyTable table{config.label, {}};

  for (Index n : config.n_values) {
    const Trajectory oracle =
        simulate(config.dgp, static_cast<std::size_t>(config.oracle_n), oracle_seed(config.master_seed, n), config.burn_in);
    const double risk_star = gamma_bar(config.dgp, oracle.data());

    struct Losses {
      std::optional<double> true_fit;
      std::vector<std::optional<double>> selected;
    };
    std::vector<Losses> losses(static_cast<std::size_t>(config.n_reps));

    parallel_for(losses.size(), threads, [&](std::size_t r) {
      auto& out = losses[r];
      out.selected.assign(n_crit, std::nullopt);
      std::optional<Trajectory> x;
      try {
        x = simulate(config.dgp, static_cast<std::size_t>(n), replication_seed(config.master_seed, n, static_cast<int>(r)),
                     config.burn_in);
      } catch (const Error&) {
        return;
      }
      const auto evidence = gather_evidence(config.family, *x, config.fit, with_info, with_mu4);
      auto loss_of = [&](const ModelSpec& spec) -> std::optional<double> {
        for (const auto& ev : evidence) {
          if (ev.fit.spec == spec && ev.fit.failure.empty()) {
            return gamma_bar(ev.fit.theta_hat, oracle.data()) - risk_star;
          }
        }
        return std::nullopt;
      };
      out.true_fit = loss_of(config.dgp.spec);
      for (std::size_t k = 0; k < n_crit; ++k) {
        try {
          const auto sel = select_from_evidence(evidence, config.criteria[k]);
          out.selected[k] = sel.chosen == config.dgp.spec ? out.true_fit : loss_of(sel.chosen);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::AllModelsFailed) throw;
        }
      }
    });

    const double dn = static_cast<double>(n);
    for (std::size_t k = 0; k < n_crit; ++k) {
      EfficiencyCell cell{n, config.criteria[k].name(), 0.0, 0.0, 0.0, 0.0, 0};
      std::vector<double> diffs;
      double sum_sel = 0.0, sum_true = 0.0;
      for (const auto& l : losses) {
        if (!l.true_fit || !l.selected[k]) continue;
        sum_sel += *l.selected[k];
        sum_true += *l.true_fit;
        diffs.push_back(*l.selected[k] - *l.true_fit);
      }
      cell.n_used = static_cast<int>(diffs.size());
      if (cell.n_used > 0) {
        cell.mean_loss_selected = sum_sel / cell.n_used;
        cell.mean_loss_true = sum_true / cell.n_used;
        cell.me = dn * (cell.mean_loss_selected - cell.mean_loss_true);
        if (cell.n_used > 1) {
          double mean_d = 0.0;
          for (double d : diffs) mean_d += d;
          mean_d /= cell.n_used;
          double ss = 0.0;
          for (double d : diffs) ss += (d - mean_d) * (d - mean_d);
          cell.me_std_error = dn * std::sqrt(ss / (cell.n_used - 1) / cell.n_used);
        }
      } else {
        cell.me = std::numeric_limits<double>::quiet_NaN();
      }
      table.cells.push_back(cell);
    }
  }
  return table;
}

}  // namespace qmlsel
