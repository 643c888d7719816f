#include "qmlsel/criteria.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <tuple>

#include "qmlsel/errors.hpp"
#include "qmlsel/qlik.hpp"

namespace qmlsel {

using Eigen::Index;

bool Criterion::needs_info() const {
  return kind == CriterionKind::TracePen || kind == CriterionKind::KC || kind == CriterionKind::KCprime;
}

std::string Criterion::name() const {
  switch (kind) {
    case CriterionKind::AIC: return "aic";
    case CriterionKind::BIC: return "bic";
    case CriterionKind::HQ: return "hq";
    case CriterionKind::TracePen: return "tracepen";
    case CriterionKind::TracePenClosedForm: return "tracepen-cf";
    case CriterionKind::KC: return "kc";
    case CriterionKind::KCprime: return "kcprime";
    case CriterionKind::Custom: return custom_name.empty() ? "custom" : custom_name;
  }
  return "unknown";
}

Criterion parse_criterion(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (s == "aic") return Criterion::of(CriterionKind::AIC);
  if (s == "bic") return Criterion::of(CriterionKind::BIC);
  if (s == "hq") return Criterion::of(CriterionKind::HQ);
  if (s == "tracepen") return Criterion::of(CriterionKind::TracePen);
  if (s == "tracepen-cf") return Criterion::of(CriterionKind::TracePenClosedForm);
  if (s == "kc") return Criterion::of(CriterionKind::KC);
  if (s == "kcprime" || s == "kc'") return Criterion::of(CriterionKind::KCprime);
  throw Error(ErrorCode::ParseError, "unknown criterion '" + std::string(text) + "'");
}

CriterionReport criterion_value(const FitResult& fit, const Criterion& criterion, const InfoMatrices* info,
                                std::optional<double> mu4) {
  if (!fit.converged) {
    throw Error(ErrorCode::InvalidArgument, "criterion of an unconverged fit of " + to_string(fit.spec));
  }
  if (criterion.needs_info() && info == nullptr) {
    throw Error(ErrorCode::MissingInfo, criterion.name() + " needs information matrices");
  }
  if (criterion.needs_mu4() && !mu4) {
    throw Error(ErrorCode::MissingInfo, criterion.name() + " needs the fourth moment estimate");
  }
  const double n = static_cast<double>(fit.n_used);
  const double m = fit.dimension();
  CriterionReport rep{fit.spec, criterion.name(), 0.0, {}};
  auto& c = rep.components;
  c.n_gamma_bar = n * fit.gamma_bar_min;

  switch (criterion.kind) {
    case CriterionKind::AIC: c.penalty = 2.0 * m; break;
    case CriterionKind::BIC: c.penalty = m * std::log(n); break;
    case CriterionKind::HQ: c.penalty = m * std::log(std::log(n)); break;
    case CriterionKind::TracePen: c.penalty = n * info->trace_pen; break;
    case CriterionKind::TracePenClosedForm:
      c.penalty = closed_form_trace(fit.spec, *mu4).value;
      c.mu4_used = *mu4;
      break;
    case CriterionKind::KC:
      c.penalty = m * std::log(n);
      c.logdet_term = info->logdet_negF;
      break;
    case CriterionKind::KCprime:
      c.penalty = (std::log(n) - std::log(2.0 * std::numbers::pi)) * m + 2.0 * std::log(m);
      c.logdet_term = info->logdet_negF;
      break;
    case CriterionKind::Custom: c.penalty = criterion.custom(fit.spec, fit.n_used); break;
  }
  rep.value = c.n_gamma_bar + c.penalty;
  if (c.logdet_term) rep.value += *c.logdet_term;
  return rep;
}

std::vector<ModelEvidence> gather_evidence(const std::vector<ModelSpec>& family, const Trajectory& x,
                                           const FitOptions& opts, bool with_info, bool with_mu4) {
  std::vector<ModelEvidence> out;
  for (auto& fit : fit_family(family, x, opts)) {
    ModelEvidence ev{std::move(fit), std::nullopt, {}, std::nullopt};
    if (ev.fit.converged) {
      if (with_info) {
        try {
          ev.info = info_matrices(ev.fit, x);
        } catch (const Error& e) {
          ev.info_error = std::string(to_string(e.code())) + ": " + e.what();
        }
      }
      if (with_mu4) ev.mu4 = mu4_hat(residuals(ev.fit.theta_hat, x));
    }
    out.push_back(std::move(ev));
  }
  return out;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::TrueModel: return "true";
    case Classification::Overfit: return "overfit";
    case Classification::Misspecified: return "misspecified";
  }
  return "unknown";
}

Classification classify(const ModelSpec& chosen, const ModelSpec& truth) {
  if (chosen == truth) return Classification::TrueModel;
  if (is_nested(truth, chosen)) return Classification::Overfit;
  return Classification::Misspecified;
}

std::vector<CriterionReport> SelectionResult::reports() const {
  std::vector<CriterionReport> out;
  for (const auto& row : rows) {
    if (row.report) out.push_back(*row.report);
  }
  return out;
}

const SelectionRow& SelectionResult::chosen_row() const {
  for (const auto& row : rows) {
    if (row.spec == chosen) return row;
  }
  throw Error(ErrorCode::InvalidArgument, "chosen model missing from rows");
}

namespace {

void check_custom_monotone(const std::vector<ModelEvidence>& evidence, const Criterion& criterion) {
  for (const auto& a : evidence) {
    for (const auto& b : evidence) {
      if (a.fit.spec == b.fit.spec || !is_nested(a.fit.spec, b.fit.spec)) continue;
      const Index n = a.fit.n_used;
      if (criterion.custom(a.fit.spec, n) > criterion.custom(b.fit.spec, n)) {
        throw Error(ErrorCode::InvalidArgument, "custom penalty '" + criterion.name() + "' decreases from " +
                                                    to_string(a.fit.spec) + " to " + to_string(b.fit.spec));
      }
    }
  }
}

}  // namespace

SelectionResult select_from_evidence(const std::vector<ModelEvidence>& evidence, const Criterion& criterion,
                                     std::optional<ModelSpec> truth) {
  if (evidence.empty()) throw Error(ErrorCode::InvalidArgument, "empty model family");
  if (criterion.kind == CriterionKind::Custom) check_custom_monotone(evidence, criterion);

  SelectionResult res;
  res.criterion = criterion.name();
  res.n = evidence.front().fit.n_used;
  const CriterionReport* best = nullptr;
  auto key = [](const CriterionReport& r) { return std::make_tuple(r.value, dim(r.spec), to_string(r.spec)); };

  for (const auto& ev : evidence) {
    SelectionRow row{ev.fit.spec, ev.fit.converged, std::nullopt, {}};
    if (!ev.fit.converged) {
      row.excluded_reason = ev.fit.failure.empty() ? "not converged" : ev.fit.failure;
    } else if (criterion.needs_info() && !ev.info) {
      row.excluded_reason = ev.info_error.empty() ? "information matrices unavailable" : ev.info_error;
    } else if (criterion.needs_mu4() && !ev.mu4) {
      row.excluded_reason = "fourth moment unavailable";
    } else {
      row.report = criterion_value(ev.fit, criterion, ev.info ? &*ev.info : nullptr, ev.mu4);
    }
    res.rows.push_back(std::move(row));
  }
  for (const auto& row : res.rows) {
    if (row.report && std::isfinite(row.report->value) && (!best || key(*row.report) < key(*best))) {
      best = &*row.report;
    }
  }
  if (!best) throw Error(ErrorCode::AllModelsFailed, "no model could be scored with " + criterion.name());
  res.chosen = best->spec;
  if (truth) res.classification = classify(res.chosen, *truth);
  return res;
}

SelectionResult select(const std::vector<ModelSpec>& family, const Trajectory& x, const Criterion& criterion,
                       const FitOptions& opts, std::optional<ModelSpec> truth) {
  const auto evidence = gather_evidence(family, x, opts, criterion.needs_info(), criterion.needs_mu4());
  return select_from_evidence(evidence, criterion, truth);
}

}  // namespace qmlsel
