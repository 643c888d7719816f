#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmlsel/estimator.hpp"
#include "qmlsel/info.hpp"
#include "qmlsel/model.hpp"

namespace qmlsel {

enum class CriterionKind { AIC, BIC, HQ, TracePen, TracePenClosedForm, KC, KCprime, Custom };

/// n·pen(m) for a user-supplied penalty; must be monotone under nesting.
using PenaltyFn = std::function<double(const ModelSpec& spec, Eigen::Index n)>;

struct Criterion {
  CriterionKind kind = CriterionKind::BIC;
  PenaltyFn custom;           // Custom only
  std::string custom_name;    // Custom only

  static Criterion of(CriterionKind kind) { return Criterion{kind, {}, {}}; }
  static Criterion custom_penalty(std::string name, PenaltyFn pen) {
    return Criterion{CriterionKind::Custom, std::move(pen), std::move(name)};
  }

  bool needs_info() const;
  bool needs_mu4() const { return kind == CriterionKind::TracePenClosedForm; }
  std::string name() const;
};

/// Accepts aic, bic, hq, tracepen, tracepen-cf, kc, kcprime (case-insensitive).
Criterion parse_criterion(std::string_view text);

struct CriterionComponents {
  double n_gamma_bar = 0.0;  // n·γ̂_n(θ̂) = −2 L̂_n(θ̂)
  double penalty = 0.0;      // n·pen(m)
  std::optional<double> logdet_term;
  std::optional<double> mu4_used;
};

/// value = (n_gamma_bar + penalty) + logdet_term, summed in that order.
struct CriterionReport {
  ModelSpec spec;
  std::string criterion;
  double value = 0.0;
  CriterionComponents components;
};

/// Canonical scale −2L̂_n(θ̂) + n·pen(m):
///   AIC 2|m|, BIC |m| log n, HQ |m| log log n,
///   TracePen −2·Trace(F̂⁻¹Ĝ) (empirical) or closed_form_trace(μ̂₄),
///   KC |m| log n + log det(−F̂),
///   KC′ (log n − log 2π)|m| + log det(−F̂) + 2 log|m|.
/// Throws MissingInfo if `info` (or `mu4` for the closed-form trace) is needed but absent.
CriterionReport criterion_value(const FitResult& fit, const Criterion& criterion, const InfoMatrices* info = nullptr,
                                std::optional<double> mu4 = std::nullopt);

/// Everything criteria need about one fitted model, computed once.
struct ModelEvidence {
  FitResult fit;
  std::optional<InfoMatrices> info;
  std::string info_error;  // why info is absent (SingularF, BoundaryTooClose, ...)
  std::optional<double> mu4;
};

/// Fits every model and, when asked, the information matrices and μ̂₄.
std::vector<ModelEvidence> gather_evidence(const std::vector<ModelSpec>& family, const Trajectory& x,
                                           const FitOptions& opts, bool with_info, bool with_mu4);

enum class Classification { TrueModel, Overfit, Misspecified };
const char* to_string(Classification c);
Classification classify(const ModelSpec& chosen, const ModelSpec& truth);

struct SelectionRow {
  ModelSpec spec;
  bool converged = false;
  std::optional<CriterionReport> report;  // absent when excluded
  std::string excluded_reason;
};

struct SelectionResult {
  std::string criterion;
  Eigen::Index n = 0;
  ModelSpec chosen;
  std::vector<SelectionRow> rows;  // one per family member, family order
  std::optional<Classification> classification;

  std::vector<CriterionReport> reports() const;
  const SelectionRow& chosen_row() const;
};

/// argmin of the criterion over converged fits (and, for info-based
/// criteria, fits whose information matrices exist). Ties go to the
/// smaller |m|, then the canonical name. Throws AllModelsFailed.
SelectionResult select_from_evidence(const std::vector<ModelEvidence>& evidence, const Criterion& criterion,
                                     std::optional<ModelSpec> truth = std::nullopt);

SelectionResult select(const std::vector<ModelSpec>& family, const Trajectory& x, const Criterion& criterion,
                       const FitOptions& opts = {}, std::optional<ModelSpec> truth = std::nullopt);

}  // namespace qmlsel
