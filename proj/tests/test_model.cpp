#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qmlsel/constraints.hpp"
#include "qmlsel/errors.hpp"
#include "qmlsel/model.hpp"
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

}  // namespace

TEST_CASE("dimensions follow family and orders") {
  CHECK(dim(ModelSpec::white_noise()) == 1);
  CHECK(dim(ModelSpec::arma(2, 1)) == 4);
  CHECK(dim(ModelSpec::ar(2)) == 3);
  CHECK(dim(ModelSpec::garch(1, 1)) == 3);
  CHECK(dim(ModelSpec::arch(2)) == 3);
  CHECK(dim(ModelSpec::aparch(1.5, 2, 1)) == 6);
  CHECK(dim(ModelSpec::ararch(3)) == 5);
}

TEST_CASE("degenerate orders collapse to white noise") {
  CHECK(ModelSpec::arma(0, 0) == ModelSpec::white_noise());
  CHECK(ModelSpec::garch(0, 0) == ModelSpec::white_noise());
  CHECK(ModelSpec::aparch(2.0, 0, 0) == ModelSpec::white_noise());
}

TEST_CASE("canonical strings round-trip") {
  for (const char* s : {"wn", "arma(2,1)", "arma(0,3)", "garch(1,1)", "aparch(1.5;1,1)", "ararch(2)"}) {
    CHECK(to_string(parse_model(s)) == s);
  }
  CHECK(parse_model("ar(2)") == ModelSpec::arma(2, 0));
  CHECK(parse_model(" GARCH(1, 1) ") == ModelSpec::garch(1, 1));
  CHECK_THROWS_AS(parse_model("arma(1)"), Error);
  CHECK_THROWS_AS(parse_model("foo(1,1)"), Error);
  CHECK_THROWS_AS(parse_model("aparch(-1;1,1)"), Error);
}

TEST_CASE("family expressions expand with white noise once") {
  const auto fam = parse_family("arma(0..2,0..2)+garch(1,1)");
  CHECK(fam.size() == 10);
  CHECK(fam.front() == ModelSpec::white_noise());
  CHECK(std::count(fam.begin(), fam.end(), ModelSpec::white_noise()) == 1);

  // Full family: ARMA(p,q) and GARCH(p,q) with 0 <= p,q <= 6.
  const auto full = parse_family("arma(0..6,0..6)+garch(0..6,0..6)");
  CHECK(full.size() == 97);
  CHECK(parse_family(family_to_string(full)) == full);
}

TEST_CASE("parameter names follow the canonical order") {
  CHECK(parameter_names(ModelSpec::arma(1, 1)) == std::vector<std::string>{"a1", "b1", "sigma"});
  CHECK(parameter_names(ModelSpec::garch(1, 1)) == std::vector<std::string>{"omega", "a1", "b1"});
  CHECK(parameter_names(ModelSpec::aparch(1.5, 1, 1)) == std::vector<std::string>{"omega", "a1", "gamma1", "b1"});
  CHECK(parameter_names(ModelSpec::ararch(1)) == std::vector<std::string>{"phi", "alpha0", "alpha1"});
}

TEST_CASE("nesting") {
  CHECK(is_nested(ModelSpec::arma(1, 1), ModelSpec::arma(2, 2)));
  CHECK_FALSE(is_nested(ModelSpec::arma(2, 0), ModelSpec::garch(1, 1)));
  CHECK(is_nested(ModelSpec::white_noise(), ModelSpec::garch(1, 1)));
  CHECK_FALSE(is_nested(ModelSpec::arma(2, 2), ModelSpec::arma(1, 1)));
  CHECK_FALSE(is_nested(ModelSpec::garch(1, 1), ModelSpec::arma(3, 3)));

  const auto fam = parse_family("arma(0..2,0..2)+garch(0..2,0..2)+aparch(2;0..1,0..1)+ararch(0..2)");
  for (const auto& a : fam) {
    CHECK(is_nested(a, a));
    for (const auto& b : fam) {
      for (const auto& c : fam) {
        if (is_nested(a, b) && is_nested(b, c)) CHECK(is_nested(a, c));
      }
    }
  }
}

TEST_CASE("constraint sets") {
  const auto wn = constraint_set(ModelSpec::white_noise());
  CHECK(wn.lower[0] == doctest::Approx(1e-3));
  CHECK(wn.upper[0] == doctest::Approx(1e3));

  const auto g = constraint_set(ModelSpec::garch(1, 1));
  CHECK(g.lower[0] == doctest::Approx(1e-6));
  CHECK(g.contains(vec({1, 0.35, 0.4})));
  CHECK_FALSE(g.contains(vec({1, 0.9, 0.2})));
  CHECK_FALSE(g.contains(vec({1, -0.1, 0.2})));
  CHECK(g.contains(vec({1, 0.49, 0.49})));
  CHECK_FALSE(g.contains(vec({1, 0.5, 0.49})));

  CHECK(is_feasible(ParamVector(ModelSpec::arma(1, 1), vec({0.5, 0.6, 1}))));
  CHECK(is_feasible(ParamVector(ModelSpec::arma(2, 0), vec({0.4, 0.4, 1}))));
  CHECK_FALSE(is_feasible(ParamVector(ModelSpec::arma(2, 0), vec({0.6, 0.4, 1}))));
}

TEST_CASE("projections land in the set and fix interior points") {
  const VectorXd inside = vec({0.2, 0.3});
  CHECK((project_capped_simplex(inside, 0.98) - inside).norm() == doctest::Approx(0.0));
  const VectorXd p = project_capped_simplex(vec({0.9, 0.5, -0.2}), 0.98);
  CHECK(p.minCoeff() >= 0.0);
  CHECK(p.sum() == doctest::Approx(0.98));
  const VectorXd q = project_l1_ball(vec({0.9, -0.5}), 0.98);
  CHECK(q.cwiseAbs().sum() == doctest::Approx(0.98));
  CHECK(q[0] == doctest::Approx(0.69));
  CHECK(q[1] == doctest::Approx(-0.29));

  const auto set = constraint_set(ModelSpec::aparch(1.0, 1, 1));
  const VectorXd proj = set.project(vec({-3, 0.9, 1.5, 0.6}));
  CHECK(set.contains(proj, 1e-12));
}

TEST_CASE("ParamVector rejects wrong sizes and non-finite values") {
  CHECK_THROWS_AS(ParamVector(ModelSpec::garch(1, 1), vec({1, 0.1})), Error);
  CHECK_THROWS_AS(ParamVector(ModelSpec::white_noise(), vec({NAN})), Error);
  CHECK_THROWS_AS(Trajectory{VectorXd{}}, Error);
}

TEST_CASE("conditional moments") {
  SUBCASE("white noise") {
    const auto m = cond_moments(ParamVector(ModelSpec::white_noise(), vec({2})), vec({1, -3, 4}));
    CHECK(m.f_hat.isZero());
    CHECK(m.h_hat.isConstant(4.0));
  }
  SUBCASE("garch(1,1) with zero pre-sample") {
    const auto m = cond_moments(ParamVector(ModelSpec::garch(1, 1), vec({1, 0.35, 0.4})), vec({2, 1}));
    CHECK(m.h_hat[0] == doctest::Approx(1.0));
    CHECK(m.h_hat[1] == doctest::Approx(2.8));
    CHECK(m.f_hat.isZero());
  }
  SUBCASE("arma(1,1)") {
    const auto m = cond_moments(ParamVector(ModelSpec::arma(1, 1), vec({0.5, 0.6, 1})), vec({1, 1}));
    CHECK(m.f_hat[0] == 0.0);
    CHECK(m.f_hat[1] == doctest::Approx(1.1));
    CHECK(m.h_hat.isConstant(1.0));
  }
  SUBCASE("aparch with delta 2 and gamma 0 matches garch") {
    const VectorXd x = vec({0.5, -1.2, 2.0, 0.3, -0.7});
    const auto a = cond_moments(ParamVector(ModelSpec::aparch(2.0, 1, 1), vec({0.5, 0.2, 0.0, 0.5})), x);
    const auto g = cond_moments(ParamVector(ModelSpec::garch(1, 1), vec({0.5, 0.2, 0.5})), x);
    CHECK((a.h_hat - g.h_hat).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("ar(1)-arch(1)") {
    const auto m = cond_moments(ParamVector(ModelSpec::ararch(1), vec({0.5, 1.0, 0.3})), vec({2, 1, -1}));
    CHECK(m.f_hat[0] == 0.0);
    CHECK(m.f_hat[1] == doctest::Approx(1.0));
    CHECK(m.h_hat[0] == doctest::Approx(1.0));
    CHECK(m.h_hat[1] == doctest::Approx(1.0 + 0.3 * 4.0));
  }
  SUBCASE("variance floor") {
    const auto m = cond_moments(ParamVector(ModelSpec::garch(1, 0), vec({1e-6, 0.5})), vec({0, 0, 0}));
    CHECK(m.h_hat.minCoeff() >= limits::kVarianceFloor);
  }
}

TEST_CASE("simulation") {
  SUBCASE("zero noise kills the recursion") {
    const VectorXd noise = VectorXd::Zero(110);
    const auto x = simulate_with_noise(ParamVector(ModelSpec::ar(1), vec({0.5, 1})), noise, 10);
    CHECK(x.size() == 100);
    CHECK(x.data().isZero());
  }
  SUBCASE("garch with a=b=0 scales the noise") {
    GaussianStream g(5);
    const VectorXd noise = g.draw(60);
    const auto x = simulate_with_noise(ParamVector(ModelSpec::garch(1, 1), vec({4, 0, 0})), noise, 10);
    for (Eigen::Index t = 0; t < 50; ++t) CHECK(x[t] == doctest::Approx(2.0 * noise[t + 10]));
  }
  SUBCASE("determinism and origin") {
    const ParamVector th(ModelSpec::white_noise(), vec({1}));
    const auto a = simulate(th, 5, 1);
    const auto b = simulate(th, 5, 1);
    CHECK(a.data() == b.data());
    REQUIRE(a.origin());
    CHECK(a.origin()->seed == 1);
    CHECK_FALSE(simulate(th, 5, 2).data() == a.data());
  }
  SUBCASE("constraint violation") {
    try {
      simulate(ParamVector(ModelSpec::garch(1, 1), vec({1, 0.9, 0.2})), 10, 1);
      FAIL("expected NonStationaryParams");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonStationaryParams);
    }
  }
}

TEST_CASE("DGP I variance matches the Yule-Walker closed form") {
  const double phi1 = 0.4, phi2 = 0.4;
  const double oracle = (1 - phi2) / ((1 + phi2) * ((1 - phi2) * (1 - phi2) - phi1 * phi1));
  CHECK(oracle == doctest::Approx(2.142857).epsilon(1e-6));
  const auto x = simulate(ParamVector(ModelSpec::ar(2), vec({phi1, phi2, 1})), 100000, 2024);
  const double mean = x.data().mean();
  const double var = (x.data().array() - mean).square().mean();
  CHECK(std::abs(var / oracle - 1.0) < 0.03);
}

TEST_CASE("stationarity sanity: sample means of DGP I-III") {
  const std::vector<ParamVector> dgps{ParamVector(ModelSpec::ar(2), vec({0.4, 0.4, 1})),
                                      ParamVector(ModelSpec::arma(1, 1), vec({0.5, 0.6, 1})),
                                      ParamVector(ModelSpec::garch(1, 1), vec({1, 0.35, 0.4}))};
  for (const auto& th : dgps) {
    const auto x = simulate(th, 100000, 99);
    const double mean = x.data().mean();
    const double sd = std::sqrt((x.data().array() - mean).square().mean());
    // Serial correlation inflates the standard error of the mean for the ARMA DGPs.
    CHECK(std::abs(mean) <= 5.0 * sd / std::sqrt(100000.0) * 5.0);
  }
}

TEST_CASE("truncation decay for ARMA(1,1)") {
  // Same data, recursion started from zero vs. from the exact past innovations.
  const double a = 0.5, b = 0.6;
  GaussianStream g(17);
  const VectorXd eps = g.draw(300);
  VectorXd x(300);
  x[0] = eps[0];
  for (Eigen::Index t = 1; t < 300; ++t) x[t] = a * x[t - 1] + b * eps[t - 1] + eps[t];
  const VectorXd tail = x.tail(200);
  const auto m = cond_moments(ParamVector(ModelSpec::arma(1, 1), vec({a, b, 1})), tail);
  for (Eigen::Index t = 0; t < 200; ++t) {
    const double exact = a * x[100 + t - 1] + b * eps[100 + t - 1];
    CHECK(std::abs(m.f_hat[t] - exact) <= 20.0 * std::pow(b, static_cast<double>(t)) + 1e-12);
  }
}

TEST_CASE("GaussianStream moments") {
  GaussianStream g(1);
  const VectorXd z = g.draw(200000);
  CHECK(std::abs(z.mean()) < 0.01);
  CHECK(std::abs(z.array().square().mean() - 1.0) < 0.01);
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}
