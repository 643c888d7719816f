#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qmlsel/criteria.hpp"
#include "qmlsel/errors.hpp"
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

// A converged fit with chosen n and γ̂_n; θ̂ itself is irrelevant to the criteria.
FitResult synthetic_fit(const ModelSpec& spec, Eigen::Index n, double gamma) {
  FitResult r{spec, ParamVector(spec, VectorXd::Constant(dim(spec), 0.1)), gamma, -0.5 * n * gamma, 0.0, true, n, 1, {}};
  return r;
}

InfoMatrices synthetic_info(double logdet, double trace_pen) {
  return InfoMatrices{Eigen::MatrixXd(), Eigen::MatrixXd(), logdet, trace_pen};
}

}  // namespace

TEST_CASE("criterion formulas") {
  const auto bic = criterion_value(synthetic_fit(ModelSpec::garch(1, 0), 100, 1.5), Criterion::of(CriterionKind::BIC));
  CHECK(bic.value == doctest::Approx(159.21034037197618).epsilon(1e-14));
  CHECK(bic.components.n_gamma_bar == 150.0);

  const auto aic = criterion_value(synthetic_fit(ModelSpec::white_noise(), 37, 0.0), Criterion::of(CriterionKind::AIC));
  CHECK(aic.value == 2.0);

  const auto hq = criterion_value(synthetic_fit(ModelSpec::arma(1, 1), 1000, 1.0), Criterion::of(CriterionKind::HQ));
  CHECK(hq.components.penalty == doctest::Approx(3.0 * std::log(std::log(1000.0))));
}

TEST_CASE("randomized identities against an independent recomputation") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> order(0, 3);
  std::uniform_int_distribution<Eigen::Index> len(50, 5000);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    const ModelSpec spec = ModelSpec::arma(order(rng), order(rng));
    const Eigen::Index n = len(rng);
    const double gamma = u(rng), logdet = 5 * u(rng), tp = std::abs(u(rng)) / n;
    const auto fit = synthetic_fit(spec, n, gamma);
    const auto info = synthetic_info(logdet, tp);
    const double m = static_cast<double>(dim(spec));
    const double ln = std::log(static_cast<double>(n));
    const double ng = static_cast<double>(n) * gamma;

    const double aic = criterion_value(fit, Criterion::of(CriterionKind::AIC)).value;
    const double bic = criterion_value(fit, Criterion::of(CriterionKind::BIC)).value;
    const double hq = criterion_value(fit, Criterion::of(CriterionKind::HQ)).value;
    const double kc = criterion_value(fit, Criterion::of(CriterionKind::KC), &info).value;
    const double kcp = criterion_value(fit, Criterion::of(CriterionKind::KCprime), &info).value;
    const double tr = criterion_value(fit, Criterion::of(CriterionKind::TracePen), &info).value;

    const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
    CHECK(close(aic, ng + 2 * m));
    CHECK(close(bic, ng + m * ln));
    CHECK(close(hq, ng + m * std::log(ln)));
    CHECK(close(kc, ng + m * ln + logdet));
    CHECK(close(kcp, ng + (ln - std::log(2 * std::numbers::pi)) * m + logdet + 2 * std::log(m)));
    CHECK(close(tr, ng + static_cast<double>(n) * tp));
    CHECK(close(kcp - bic, -m * std::log(2 * std::numbers::pi) + logdet + 2 * std::log(m)));
  }
}

TEST_CASE("value is the sum of its components") {
  const auto fit = synthetic_fit(ModelSpec::arma(2, 1), 321, 0.731);
  const auto info = synthetic_info(-1.234, 0.01);
  for (auto kind : {CriterionKind::AIC, CriterionKind::BIC, CriterionKind::HQ, CriterionKind::TracePen, CriterionKind::KC,
                    CriterionKind::KCprime}) {
    const auto r = criterion_value(fit, Criterion::of(kind), &info);
    double expected = r.components.n_gamma_bar + r.components.penalty;
    if (r.components.logdet_term) expected += *r.components.logdet_term;
    CHECK(r.value == expected);
  }
  const auto cf = criterion_value(fit, Criterion::of(CriterionKind::TracePenClosedForm), nullptr, 3.0);
  CHECK(cf.components.mu4_used == 3.0);
  CHECK(cf.components.penalty == doctest::Approx(2.0 * 3 + 2.0));
}

TEST_CASE("missing inputs") {
  const auto fit = synthetic_fit(ModelSpec::arma(1, 0), 100, 1.0);
  for (auto kind : {CriterionKind::KC, CriterionKind::KCprime, CriterionKind::TracePen, CriterionKind::TracePenClosedForm}) {
    try {
      criterion_value(fit, Criterion::of(kind));
      FAIL("expected MissingInfo");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingInfo);
    }
  }
}

TEST_CASE("criterion names parse back") {
  for (auto kind : {CriterionKind::AIC, CriterionKind::BIC, CriterionKind::HQ, CriterionKind::TracePen,
                    CriterionKind::TracePenClosedForm, CriterionKind::KC, CriterionKind::KCprime}) {
    CHECK(parse_criterion(Criterion::of(kind).name()).kind == kind);
  }
  CHECK(parse_criterion("BIC").kind == CriterionKind::BIC);
  CHECK_THROWS_AS(parse_criterion("mdl"), Error);
}

TEST_CASE("penalties are monotone along the enumerated family") {
  const auto fam = parse_family("arma(0..6,0..6)+garch(0..6,0..6)");
  for (auto kind : {CriterionKind::AIC, CriterionKind::BIC, CriterionKind::HQ}) {
    for (const auto& a : fam) {
      for (const auto& b : fam) {
        if (dim(a) > dim(b)) continue;
        const double pa = criterion_value(synthetic_fit(a, 1000, 1.0), Criterion::of(kind)).components.penalty;
        const double pb = criterion_value(synthetic_fit(b, 1000, 1.0), Criterion::of(kind)).components.penalty;
        CHECK(pa <= pb);
      }
    }
  }
}

TEST_CASE("classification") {
  const auto truth = ModelSpec::arma(1, 1);
  CHECK(classify(truth, truth) == Classification::TrueModel);
  CHECK(classify(ModelSpec::arma(2, 1), truth) == Classification::Overfit);
  CHECK(classify(ModelSpec::arma(1, 0), truth) == Classification::Misspecified);
  CHECK(classify(ModelSpec::garch(1, 1), truth) == Classification::Misspecified);
}

TEST_CASE("selection") {
  const auto x = simulate(ParamVector(ModelSpec::arma(1, 1), vec({0.5, 0.6, 1})), 1000, 5);

  SUBCASE("single-model family") {
    const auto r = select({ModelSpec::garch(1, 1)}, x, Criterion::of(CriterionKind::BIC));
    CHECK(r.chosen == ModelSpec::garch(1, 1));
  }

  SUBCASE("chosen is the brute-force minimum and KC'-BIC holds per model") {
    const auto fam = parse_family("arma(0..2,0..2)+garch(1,1)");
    const auto evidence = gather_evidence(fam, x, {}, true, false);
    const auto bic = select_from_evidence(evidence, Criterion::of(CriterionKind::BIC), ModelSpec::arma(1, 1));
    const auto kcp = select_from_evidence(evidence, Criterion::of(CriterionKind::KCprime), ModelSpec::arma(1, 1));
    for (const auto* res : {&bic, &kcp}) {
      const auto reports = res->reports();
      REQUIRE_FALSE(reports.empty());
      const CriterionReport* best = &reports.front();
      for (const auto& r : reports) {
        if (r.value < best->value) best = &r;
      }
      CHECK(best->spec == res->chosen);
    }
    CHECK(bic.chosen == ModelSpec::arma(1, 1));
    CHECK(bic.classification == Classification::TrueModel);
    for (std::size_t i = 0; i < fam.size(); ++i) {
      if (!kcp.rows[i].report || !bic.rows[i].report) continue;
      const double m = static_cast<double>(dim(fam[i]));
      const double diff = kcp.rows[i].report->value - bic.rows[i].report->value;
      const double logdet = *kcp.rows[i].report->components.logdet_term;
      CHECK(diff == doctest::Approx(-m * std::log(2 * std::numbers::pi) + logdet + 2 * std::log(m)).epsilon(1e-12));
    }
  }

  SUBCASE("all models failed") {
    const auto tiny = simulate(ParamVector(ModelSpec::white_noise(), vec({1})), 20, 1);
    try {
      select({ModelSpec::arma(2, 2)}, tiny, Criterion::of(CriterionKind::BIC));
      FAIL("expected AllModelsFailed");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::AllModelsFailed);
    }
  }

  SUBCASE("custom penalties must be monotone") {
    const auto fam = parse_family("arma(0..1,0)");
    const auto good = Criterion::custom_penalty("sqrt", [](const ModelSpec& s, Eigen::Index n) {
      return std::sqrt(static_cast<double>(n)) * static_cast<double>(dim(s));
    });
    CHECK_NOTHROW(select(fam, x, good));
    const auto bad = Criterion::custom_penalty("neg", [](const ModelSpec& s, Eigen::Index) {
      return -static_cast<double>(dim(s));
    });
    CHECK_THROWS_AS(select(fam, x, bad), Error);
  }

  SUBCASE("ties go to the smaller model") {
    const auto flat = Criterion::custom_penalty("zero", [](const ModelSpec&, Eigen::Index) { return 0.0; });
    const auto zeros = Trajectory(VectorXd::Zero(200));
    const auto r = select(parse_family("arma(0..1,0)"), zeros, flat);
    CHECK(r.chosen == ModelSpec::white_noise());
  }
}
