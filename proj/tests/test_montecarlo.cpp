#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "qmlsel/constraints.hpp"
#include "qmlsel/errors.hpp"
#include "qmlsel/montecarlo.hpp"
#include "qmlsel/simulate.hpp"

using namespace qmlsel;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ExperimentConfig small_config() {
  return ExperimentConfig{"dgp2",
                          ParamVector(ModelSpec::arma(1, 1), vec({0.5, 0.6, 1})),
                          parse_family("arma(0..1,0..1)"),
                          {200},
                          12,
                          {Criterion::of(CriterionKind::AIC), Criterion::of(CriterionKind::BIC),
                           Criterion::of(CriterionKind::KCprime)},
                          77,
                          10000,
                          1000,
                          {}};
}

void expect_config_error(const ExperimentConfig& c, const std::string& field) {
  try {
    validate(c);
    FAIL("expected ConfigError for " << field);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(std::string(e.what()).rfind(field, 0) == 0);
  }
}

}  // namespace

TEST_CASE("config validation names the field") {
  auto c = small_config();
  CHECK_NOTHROW(validate(c));
  c.n_reps = 0;
  expect_config_error(c, "n_reps");
  c = small_config();
  c.family = parse_family("garch(1,1)");
  expect_config_error(c, "family");
  c = small_config();
  c.n_values.clear();
  expect_config_error(c, "n_values");
  c = small_config();
  c.criteria.clear();
  expect_config_error(c, "criteria");
  c = small_config();
  c.oracle_n = 10;
  expect_config_error(c, "oracle_n");
}

TEST_CASE("seed discipline") {
  CHECK(replication_seed(1, 200, 3) == replication_seed(1, 200, 3));
  std::set<std::uint64_t> seen;
  for (Eigen::Index n : {200, 500, 1000, 2000}) {
    for (int r = 0; r < 500; ++r) seen.insert(replication_seed(1, n, r));
    seen.insert(oracle_seed(1, n));
  }
  CHECK(seen.size() == 4 * 500 + 4);
}

TEST_CASE("degenerate family selects the truth every time") {
  auto c = small_config();
  c.family = {c.dgp.spec};
  const auto table = run_consistency(c);
  for (const auto& cell : table.cells) CHECK(cell.pct_true() == 100.0);

  c.n_reps = 4;
  const auto eff = run_efficiency(c);
  for (const auto& cell : eff.cells) {
    CHECK(cell.me == 0.0);
    CHECK(cell.n_used == 4);
  }
}

TEST_CASE("consistency table accounting") {
  const auto c = small_config();
  const auto one = run_consistency(c, 1);
  const auto three = run_consistency(c, 3);
  REQUIRE(one.cells.size() == c.criteria.size());
  for (std::size_t k = 0; k < one.cells.size(); ++k) {
    const auto& a = one.cells[k];
    const auto& b = three.cells[k];
    CHECK(a.count_true + a.count_overfit + a.count_misspec + a.count_failed == c.n_reps);
    CHECK(std::abs(a.pct_true() + a.pct_overfit() + a.pct_misspec() + a.pct_failed() - 100.0) <= 1e-9);
    CHECK(a.count_true == b.count_true);
    CHECK(a.count_overfit == b.count_overfit);
    CHECK(a.count_misspec == b.count_misspec);
    CHECK(a.count_failed == b.count_failed);
  }
  CHECK(one.at(200, "bic").pct_true() >= one.at(200, "aic").pct_true());
}

TEST_CASE("efficiency is thread-invariant and non-negative up to noise") {
  auto c = small_config();
  c.n_values = {500};
  const auto one = run_efficiency(c, 1);
  const auto two = run_efficiency(c, 2);
  for (std::size_t k = 0; k < one.cells.size(); ++k) {
    CHECK(one.cells[k].me == two.cells[k].me);
    CHECK(one.cells[k].mean_loss_true == two.cells[k].mean_loss_true);
    CHECK(std::isfinite(one.cells[k].me));
    CHECK(one.cells[k].me >= -2.0 * one.cells[k].me_std_error - 1e-12);
  }
}

TEST_CASE("oracle risk") {
  SUBCASE("DGP I at its own parameter") {
    const ParamVector dgp(ModelSpec::ar(2), vec({0.4, 0.4, 1}));
    const auto r = oracle_risk(dgp, {dgp}, 100000, 5);
    CHECK(std::abs(r[0].risk - 1.0) <= 0.02);
  }
  SUBCASE("white noise evaluated at sigma^2 = e") {
    const ParamVector dgp(ModelSpec::white_noise(), vec({1}));
    const auto r = oracle_risk(dgp, {ParamVector(ModelSpec::white_noise(), vec({std::exp(0.5)}))}, 100000, 6);
    CHECK(r[0].risk == doctest::Approx(1.0 / std::exp(1.0) + 1.0).epsilon(0.02));
  }
  SUBCASE("the true parameter minimizes the risk among sampled points") {
    const ParamVector dgp(ModelSpec::garch(1, 1), vec({1, 0.35, 0.4}));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ParamVector> points{dgp};
    while (points.size() < 11) {
      const ParamVector th(dgp.spec, vec({0.3 + 2 * u(rng), 0.6 * u(rng), 0.6 * u(rng)}));
      if (is_feasible(th)) points.push_back(th);
    }
    const auto r = oracle_risk(dgp, points, 100000, 9);
    for (std::size_t k = 1; k < r.size(); ++k) CHECK(r[0].risk <= r[k].risk + 2 * r[k].std_error);
  }
  CHECK_THROWS_AS(oracle_risk(ParamVector(ModelSpec::white_noise(), vec({1})), {}, 100, 1), Error);
}
