#include "qmlsel/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "qmlsel/config.hpp"
#include "qmlsel/criteria.hpp"
#include "qmlsel/errors.hpp"
#include "qmlsel/estimator.hpp"
#include "qmlsel/info.hpp"
#include "qmlsel/io.hpp"
#include "qmlsel/montecarlo.hpp"
#include "qmlsel/simulate.hpp"

#ifndef QMLSEL_VERSION
#define QMLSEL_VERSION "0.0.0"
#endif

namespace qmlsel {

namespace fs = std::filesystem;

namespace {

int exit_code_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidArgument: return exit_code::kParse;
    case ErrorCode::NonStationaryParams: return exit_code::kConstraint;
    case ErrorCode::AllModelsFailed: return exit_code::kAllModelsFailed;
    case ErrorCode::ConfigError: return exit_code::kConfig;
    default: return exit_code::kFailure;
  }
}

// Re-raises with the offending option named in front of the message.
template <typename F>
auto naming(const std::string& field, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), field + ": " + e.what());
  }
}

Eigen::VectorXd parse_reals(const std::string& text, const std::string& field) {
  std::vector<double> values;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      values.push_back(parse_real(std::string_view(text).substr(start, i - start), field));
      start = i + 1;
    }
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string display_name(const std::string& criterion) {
  if (criterion == "aic") return "AIC";
  if (criterion == "bic") return "BIC";
  if (criterion == "hq") return "HQ";
  if (criterion == "kc") return "KC";
  if (criterion == "kcprime") return "KC'";
  return criterion;
}

std::vector<std::string> criterion_names(const ExperimentConfig& config) {
  std::vector<std::string> names;
  for (const auto& c : config.criteria) names.push_back(c.name());
  return names;
}

// Column groups per n, one sub-column per criterion.
void print_grid(std::ostream& out, const ExperimentConfig& config, const std::vector<std::string>& row_labels,
                const std::function<double(std::size_t row, Eigen::Index n, const std::string& crit)>& value,
                int digits) {
  constexpr std::size_t kLabel = 10, kCol = 9;
  const auto crits = criterion_names(config);
  std::string line = std::string(kLabel, ' ');
  for (Eigen::Index n : config.n_values) {
    std::string head = "n=" + std::to_string(n);
    line += " |" + pad(head, kCol * crits.size());
  }
  out << line << '\n';
  line = std::string(kLabel, ' ');
  for (std::size_t g = 0; g < config.n_values.size(); ++g) {
    line += " |";
    for (const auto& c : crits) line += pad(display_name(c), kCol);
  }
  out << line << '\n' << std::string(line.size(), '-') << '\n';
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    line = row_labels[r] + std::string(kLabel - std::min(kLabel, row_labels[r].size()), ' ');
    for (Eigen::Index n : config.n_values) {
      line += " |";
      for (const auto& c : crits) line += pad(fixed(value(r, n, c), digits), kCol);
    }
    out << line << '\n';
  }
}

std::string metadata(const RunConfig& rc, const std::string& kind) {
  std::ostringstream m;
  m << "kind = " << kind << '\n'
    << "software = qmlsel " << version() << '\n'
    << "schema = " << kConfigSchema << '\n'
    << "master_seed = " << rc.master_seed << '\n'
    << "config_hash = " << config_hash(rc) << '\n'
    << "dgp = " << to_string(rc.dgp) << '\n'
    << "family = " << family_to_string(parse_family(rc.family)) << '\n'
    << "n_reps = " << rc.n_reps << '\n'
    << "replication_seed = derive_seed(master_seed, n, r)\n"
    << "rng = mt19937_64 + box-muller\n"
    << "burn_in = " << rc.burn_in << '\n';
  if (kind == "efficiency") {
    m << "oracle_n = " << rc.oracle_n << '\n'
      << "oracle_burn_in = " << rc.burn_in << '\n'
      << "oracle_policy = one trajectory per n, shared across replications and criteria\n";
  }
  return m.str();
}

struct McOptions {
  std::string config_path;
  std::string out_dir;
  unsigned threads = 1;
};

std::pair<RunConfig, ExperimentConfig> load_experiment(const McOptions& o) {
  std::string text;
  try {
    text = read_text(o.config_path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("--config: ") + e.what());
  }
  RunConfig rc = parse_run_config(text);
  if (!o.out_dir.empty()) rc.output_dir = o.out_dir;
  ExperimentConfig exp = to_experiment(rc);
  return {std::move(rc), std::move(exp)};
}

int cmd_mc_consistency(const McOptions& o, std::ostream& out) {
  auto [rc, exp] = load_experiment(o);
  const ConsistencyTable table = run_consistency(exp, o.threads);
  const fs::path base = fs::path(rc.output_dir) / (rc.label + "_consistency");
  write_text(base.string() + ".csv", consistency_csv(table));
  write_text(base.string() + ".meta", metadata(rc, "consistency"));

  out << rc.label << " (" << to_string(rc.dgp) << "): percentage of selections, " << rc.n_reps
      << " replications, " << exp.family.size() << " models\n";
  print_grid(
      out, exp, {"True", "Overfit", "Misspec", "Failed"},
      [&](std::size_t row, Eigen::Index n, const std::string& crit) {
        const auto& c = table.at(n, crit);
        const double v[] = {c.pct_true(), c.pct_overfit(), c.pct_misspec(), c.pct_failed()};
        return v[row];
      },
      1);
  out << "wrote " << base.string() << ".csv and .meta\n";
  return exit_code::kOk;
}

int cmd_mc_efficiency(const McOptions& o, std::ostream& out) {
  auto [rc, exp] = load_experiment(o);
  const EfficiencyTable table = run_efficiency(exp, o.threads);
  const fs::path base = fs::path(rc.output_dir) / (rc.label + "_efficiency");
  write_text(base.string() + ".csv", efficiency_csv(table));
  write_text(base.string() + ".meta", metadata(rc, "efficiency"));

  out << rc.label << " (" << to_string(rc.dgp) << "): ME = n*(mean loss selected - mean loss true), " << rc.n_reps
      << " replications, oracle_n = " << rc.oracle_n << '\n';
  print_grid(
      out, exp, {"ME", "std.err"},
      [&](std::size_t row, Eigen::Index n, const std::string& crit) {
        const auto& c = table.at(n, crit);
        return row == 0 ? c.me : c.me_std_error;
      },
      3);
  out << "wrote " << base.string() << ".csv and .meta\n";
  return exit_code::kOk;
}

struct SimulateOptions {
  std::string model, theta, out;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t burn_in = limits::kDefaultBurnIn;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  const ModelSpec spec = naming("--model", [&] { return parse_model(o.model); });
  const ParamVector theta = naming("--theta", [&] { return ParamVector(spec, parse_reals(o.theta, "--theta")); });
  if (o.n == 0) throw Error(ErrorCode::InvalidArgument, "--n: must be positive");
  const Trajectory x = naming("--theta", [&] { return simulate(theta, o.n, o.seed, o.burn_in); });
  write_trajectory_csv(x, o.out);

  const auto& d = x.data();
  const double mean = d.mean();
  const double var = d.size() > 1 ? (d.array() - mean).square().sum() / static_cast<double>(d.size() - 1) : 0.0;
  out << "model " << to_string(spec) << ", n = " << d.size() << ", seed = " << o.seed << '\n'
      << "mean " << format_real(mean) << "\nvariance " << format_real(var) << "\nmin " << format_real(d.minCoeff())
      << "\nmax " << format_real(d.maxCoeff()) << '\n';
  return exit_code::kOk;
}

struct FitCliOptions {
  std::string in, model;
  bool info = false;
  FitOptions fit;
};

int cmd_fit(const FitCliOptions& o, std::ostream& out) {
  const ModelSpec spec = naming("--model", [&] { return parse_model(o.model); });
  const Trajectory x = naming("--in", [&] { return read_trajectory_csv(o.in); });
  const FitResult r = fit(spec, x, o.fit);
  const auto names = parameter_names(spec);
  out << "model " << to_string(spec) << ", n = " << r.n_used << (r.converged ? ", converged" : ", NOT converged")
      << " after " << r.iterations << " iterations\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << "  " << names[i] << " = " << format_real(r.theta_hat[static_cast<Eigen::Index>(i)]) << '\n';
  }
  out << "gamma_bar " << format_real(r.gamma_bar_min) << "\nloglik " << format_real(r.loglik) << "\ngrad_norm "
      << format_real(r.grad_norm) << '\n';
  if (o.info) {
    const InfoMatrices info = info_matrices(r, x);
    out << "logdet_negF " << format_real(info.logdet_negF) << "\nn_trace_pen "
        << format_real(static_cast<double>(r.n_used) * info.trace_pen) << '\n';
  }
  return exit_code::kOk;
}

struct SelectOptions {
  std::string in, family, criterion = "bic", out, truth;
  FitOptions fit;
};

int cmd_select(const SelectOptions& o, std::ostream& out) {
  const auto family = naming("--family", [&] { return parse_family(o.family); });
  const Criterion criterion = naming("--criterion", [&] { return parse_criterion(o.criterion); });
  std::optional<ModelSpec> truth;
  if (!o.truth.empty()) truth = naming("--truth", [&] { return parse_model(o.truth); });
  const Trajectory x = naming("--in", [&] { return read_trajectory_csv(o.in); });
  const SelectionResult res = select(family, x, criterion, o.fit, truth);
  if (!o.out.empty()) write_text(o.out, selection_csv(res));

  const auto& row = res.chosen_row();
  const auto& c = row.report->components;
  out << "chosen " << to_string(res.chosen) << " by " << res.criterion << " (n = " << res.n << ", "
      << family.size() << " models)\n"
      << "  n_gamma_bar " << format_real(c.n_gamma_bar) << "\n  penalty " << format_real(c.penalty) << '\n';
  if (c.logdet_term) out << "  logdet_term " << format_real(*c.logdet_term) << '\n';
  out << "  value " << format_real(row.report->value) << '\n';
  if (res.classification) out << "  classification " << to_string(*res.classification) << '\n';
  for (const auto& r : res.rows) {
    if (!r.report) out << "  excluded " << to_string(r.spec) << ": " << r.excluded_reason << '\n';
  }
  return exit_code::kOk;
}

void add_fit_options(CLI::App* cmd, FitOptions& fit) {
  cmd->add_option("--max-iter", fit.max_iter, "Optimizer iteration cap")->capture_default_str();
  cmd->add_option("--grad-tol", fit.grad_tol, "Projected-gradient tolerance")->capture_default_str();
  cmd->add_option("--restarts", fit.n_restarts, "Jittered restarts per fit")->capture_default_str();
}

}  // namespace

std::string version() { return QMLSEL_VERSION; }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quasi-likelihood model selection for causal time series"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print library and config schema versions");

  SimulateOptions sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a trajectory to CSV");
  simulate_cmd->add_option("--model", sim.model, "Model, e.g. \"garch(1,1)\"")->required();
  simulate_cmd->add_option("--theta", sim.theta, "Comma-separated parameters in canonical order")->required();
  simulate_cmd->add_option("--n", sim.n, "Trajectory length")->required();
  simulate_cmd->add_option("--seed", sim.seed, "RNG seed")->required();
  simulate_cmd->add_option("--out", sim.out, "Output CSV path")->required();
  simulate_cmd->add_option("--burn-in", sim.burn_in, "Discarded warm-up draws")->capture_default_str();

  FitCliOptions fit_opts;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one model by QMLE");
  fit_cmd->add_option("--in", fit_opts.in, "Trajectory CSV (column x)")->required();
  fit_cmd->add_option("--model", fit_opts.model, "Model to fit")->required();
  fit_cmd->add_flag("--info", fit_opts.info, "Also print log det(-F) and the trace penalty");
  add_fit_options(fit_cmd, fit_opts.fit);

  SelectOptions sel;
  auto* select_cmd = app.add_subcommand("select", "Select a model from a family");
  select_cmd->add_option("--in", sel.in, "Trajectory CSV (column x)")->required();
  select_cmd->add_option("--family", sel.family, "Family, e.g. \"arma(0..2,0..2)+garch(1,1)\"")->required();
  select_cmd->add_option("--criterion", sel.criterion, "aic, bic, hq, tracepen, tracepen-cf, kc, kcprime")
      ->capture_default_str();
  select_cmd->add_option("--out", sel.out, "Selection CSV path");
  select_cmd->add_option("--truth", sel.truth, "True model, to classify the choice");
  add_fit_options(select_cmd, sel.fit);

  McOptions mc;
  mc.threads = std::max(1u, std::thread::hardware_concurrency());
  auto* consistency_cmd = app.add_subcommand("mc-consistency", "Monte-Carlo consistency experiment");
  auto* efficiency_cmd = app.add_subcommand("mc-efficiency", "Monte-Carlo efficiency experiment");
  for (auto* cmd : {consistency_cmd, efficiency_cmd}) {
    cmd->add_option("--config", mc.config_path, "Experiment config file")->required();
    cmd->add_option("--out-dir", mc.out_dir, "Override the config's output directory");
    cmd->add_option("--threads", mc.threads, "Worker threads (default: logical cores)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  std::vector<const char*> argv{"qmlsel"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_code::kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kParse;
  }

  try {
    if (show_version) {
      out << "qmlsel " << version() << " (config schema " << kConfigSchema << ")\n";
      return exit_code::kOk;
    }
    if (simulate_cmd->parsed()) return cmd_simulate(sim, out);
    if (fit_cmd->parsed()) return cmd_fit(fit_opts, out);
    if (select_cmd->parsed()) return cmd_select(sel, out);
    if (consistency_cmd->parsed()) return cmd_mc_consistency(mc, out);
    if (efficiency_cmd->parsed()) return cmd_mc_efficiency(mc, out);
    out << app.help();
    return exit_code::kOk;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_of(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kFailure;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace qmlsel
