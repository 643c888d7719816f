#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmlsel/criteria.hpp"
#include "qmlsel/model.hpp"
#include "qmlsel/montecarlo.hpp"

namespace qmlsel {

/// Shortest decimal form that parses back to the same double.
std::string format_real(double v);
double parse_real(std::string_view text, std::string_view field);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view content);

/// Single-column CSV with header `x`.
std::string trajectory_csv(const Trajectory& x);
Trajectory parse_trajectory_csv(std::string_view text);
Trajectory read_trajectory_csv(const std::filesystem::path& path);
void write_trajectory_csv(const Trajectory& x, const std::filesystem::path& path);

/// model,converged,n_gamma_bar,penalty,logdet_term,value,chosen
/// Absent numbers are written as NA.
std::string selection_csv(const SelectionResult& result);

struct SelectionCsvRow {
  std::string model;
  bool converged = false;
  std::optional<double> n_gamma_bar;
  std::optional<double> penalty;
  std::optional<double> logdet_term;
  std::optional<double> value;
  bool chosen = false;
};
std::vector<SelectionCsvRow> parse_selection_csv(std::string_view text);

/// dgp,n,criterion,pct_true,pct_overfit,pct_misspec,pct_failed
std::string consistency_csv(const ConsistencyTable& table);

struct ConsistencyCsvRow {
  std::string dgp;
  Eigen::Index n = 0;
  std::string criterion;
  double pct_true = 0, pct_overfit = 0, pct_misspec = 0, pct_failed = 0;
};
std::vector<ConsistencyCsvRow> parse_consistency_csv(std::string_view text);

/// dgp,n,criterion,me,mean_loss_selected,mean_loss_true
std::string efficiency_csv(const EfficiencyTable& table);

struct EfficiencyCsvRow {
  std::string dgp;
  Eigen::Index n = 0;
  std::string criterion;
  double me = 0, mean_loss_selected = 0, mean_loss_true = 0;
};
std::vector<EfficiencyCsvRow> parse_efficiency_csv(std::string_view text);

/// Splits CSV text into rows of fields; checks the header matches.
std::vector<std::vector<std::string>> parse_csv(std::string_view text, std::string_view expected_header);

}  // namespace qmlsel
