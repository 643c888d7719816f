#include "qmlsel/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "qmlsel/errors.hpp"

namespace qmlsel {

namespace {

void require_order(int value, const char* what) {
  if (value < 0) {
    throw Error(ErrorCode::InvalidArgument, std::string("negative model order ") + what);
  }
}

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string strip(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

struct IntRange {
  int lo = 0;
  int hi = 0;
};

[[noreturn]] void parse_fail(std::string_view term, const std::string& why) {
  throw Error(ErrorCode::ParseError, "cannot parse model '" + std::string(term) + "': " + why);
}

int parse_int(std::string_view s, std::string_view term) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    parse_fail(term, "expected integer, got '" + std::string(s) + "'");
  }
  if (v < 0) parse_fail(term, "orders must be non-negative");
  return v;
}

IntRange parse_range(std::string_view s, std::string_view term, bool allow_range) {
  auto dots = s.find("..");
  if (dots == std::string_view::npos) {
    int v = parse_int(s, term);
    return {v, v};
  }
  if (!allow_range) parse_fail(term, "ranges are only allowed in family expressions");
  IntRange r{parse_int(s.substr(0, dots), term), parse_int(s.substr(dots + 2), term)};
  if (r.lo > r.hi) parse_fail(term, "empty range");
  return r;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

// Expands one (already stripped) term into the specs it denotes.
std::vector<ModelSpec> expand_term(std::string_view term, bool allow_range) {
  if (term == "wn") return {ModelSpec::white_noise()};
  auto open = term.find('(');
  if (open == std::string_view::npos || term.back() != ')') {
    parse_fail(term, "expected name(args)");
  }
  std::string_view name = term.substr(0, open);
  std::string_view args = term.substr(open + 1, term.size() - open - 2);

  std::vector<ModelSpec> out;
  if (name == "aparch") {
    auto semi = args.find(';');
    if (semi == std::string_view::npos) parse_fail(term, "aparch needs 'delta;p,q'");
    std::string delta_text(args.substr(0, semi));
    double delta = 0.0;
    auto res = std::from_chars(delta_text.data(), delta_text.data() + delta_text.size(), delta);
    if (res.ec != std::errc() || res.ptr != delta_text.data() + delta_text.size() || !(delta > 0)) {
      parse_fail(term, "delta must be a positive real");
    }
    auto orders = split(args.substr(semi + 1), ',');
    if (orders.size() != 2) parse_fail(term, "aparch needs two orders");
    auto pr = parse_range(orders[0], term, allow_range);
    auto qr = parse_range(orders[1], term, allow_range);
    for (int p = pr.lo; p <= pr.hi; ++p)
      for (int q = qr.lo; q <= qr.hi; ++q) out.push_back(ModelSpec::aparch(delta, p, q));
    return out;
  }

  auto orders = split(args, ',');
  if (name == "arma" || name == "garch") {
    if (orders.size() != 2) parse_fail(term, "expected two orders");
    auto pr = parse_range(orders[0], term, allow_range);
    auto qr = parse_range(orders[1], term, allow_range);
    for (int p = pr.lo; p <= pr.hi; ++p)
      for (int q = qr.lo; q <= qr.hi; ++q)
        out.push_back(name == "arma" ? ModelSpec::arma(p, q) : ModelSpec::garch(p, q));
    return out;
  }
  if (name == "ar" || name == "arch" || name == "ararch") {
    if (orders.size() != 1) parse_fail(term, "expected one order");
    auto pr = parse_range(orders[0], term, allow_range);
    for (int p = pr.lo; p <= pr.hi; ++p) {
      if (name == "ar") out.push_back(ModelSpec::ar(p));
      else if (name == "arch") out.push_back(ModelSpec::arch(p));
      else out.push_back(ModelSpec::ararch(p));
    }
    return out;
  }
  parse_fail(term, "unknown family '" + std::string(name) + "'");
}

}  // namespace

ModelSpec ModelSpec::white_noise() { return ModelSpec{}; }

ModelSpec ModelSpec::arma(int p, int q) {
  require_order(p, "p");
  require_order(q, "q");
  if (p == 0 && q == 0) return white_noise();
  return ModelSpec{Family::ARMA, p, q, 0.0};
}

ModelSpec ModelSpec::garch(int p, int q) {
  require_order(p, "p");
  require_order(q, "q");
  if (p == 0 && q == 0) return white_noise();
  return ModelSpec{Family::GARCH, p, q, 0.0};
}

ModelSpec ModelSpec::aparch(double delta, int p, int q) {
  require_order(p, "p");
  require_order(q, "q");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::InvalidArgument, "aparch delta must be positive");
  }
  if (p == 0 && q == 0) return white_noise();
  return ModelSpec{Family::APARCH, p, q, delta};
}

ModelSpec ModelSpec::ararch(int p) {
  require_order(p, "p");
  return ModelSpec{Family::ARARCH, p, 0, 0.0};
}

Eigen::Index dim(const ModelSpec& spec) {
  switch (spec.family) {
    case Family::WhiteNoise: return 1;
    case Family::ARMA: return spec.p + spec.q + 1;
    case Family::GARCH: return spec.p + spec.q + 1;
    case Family::APARCH: return 2 * spec.p + spec.q + 1;
    case Family::ARARCH: return spec.p + 2;
  }
  return 0;
}

std::string to_string(const ModelSpec& spec) {
  std::ostringstream os;
  switch (spec.family) {
    case Family::WhiteNoise: os << "wn"; break;
    case Family::ARMA: os << "arma(" << spec.p << ',' << spec.q << ')'; break;
    case Family::GARCH: os << "garch(" << spec.p << ',' << spec.q << ')'; break;
    case Family::APARCH:
      os << "aparch(" << format_real(spec.delta) << ';' << spec.p << ',' << spec.q << ')';
      break;
    case Family::ARARCH: os << "ararch(" << spec.p << ')'; break;
  }
  return os.str();
}

ModelSpec parse_model(std::string_view text) {
  auto term = strip(text);
  if (term.empty()) throw Error(ErrorCode::ParseError, "empty model string");
  auto specs = expand_term(term, false);
  return specs.front();
}

std::vector<ModelSpec> parse_family(std::string_view text) {
  auto stripped = strip(text);
  if (stripped.empty()) throw Error(ErrorCode::ParseError, "empty family expression");
  std::vector<ModelSpec> out;
  for (auto term : split(stripped, '+')) {
    if (term.empty()) throw Error(ErrorCode::ParseError, "empty term in family expression");
    for (const auto& spec : expand_term(term, true)) {
      if (std::find(out.begin(), out.end(), spec) == out.end()) out.push_back(spec);
    }
  }
  return out;
}

std::string family_to_string(const std::vector<ModelSpec>& family) {
  std::string out;
  for (const auto& spec : family) {
    if (!out.empty()) out += '+';
    out += to_string(spec);
  }
  return out;
}

std::vector<std::string> parameter_names(const ModelSpec& spec) {
  std::vector<std::string> names;
  auto push_seq = [&](const char* stem, int first, int last) {
    for (int i = first; i <= last; ++i) names.push_back(stem + std::to_string(i));
  };
  switch (spec.family) {
    case Family::WhiteNoise: names.push_back("sigma"); break;
    case Family::ARMA:
      push_seq("a", 1, spec.p);
      push_seq("b", 1, spec.q);
      names.push_back("sigma");
      break;
    case Family::GARCH:
      names.push_back("omega");
      push_seq("a", 1, spec.p);
      push_seq("b", 1, spec.q);
      break;
    case Family::APARCH:
      names.push_back("omega");
      push_seq("a", 1, spec.p);
      push_seq("gamma", 1, spec.p);
      push_seq("b", 1, spec.q);
      break;
    case Family::ARARCH:
      names.push_back("phi");
      push_seq("alpha", 0, spec.p);
      break;
  }
  return names;
}

bool is_nested(const ModelSpec& inner, const ModelSpec& outer) {
  if (inner == outer) return true;
  if (inner.family == Family::WhiteNoise) return true;
  const bool orders_le = inner.p <= outer.p && inner.q <= outer.q;
  switch (outer.family) {
    case Family::WhiteNoise:
      return false;
    case Family::ARMA:
      if (inner.family == Family::ARMA) return orders_le;
      // ararch(0) is an AR(1) with variance α0
      if (inner.family == Family::ARARCH) return inner.p == 0 && outer.p >= 1;
      return false;
    case Family::GARCH:
      return inner.family == Family::GARCH && orders_le;
    case Family::APARCH:
      if (inner.family == Family::APARCH) return inner.delta == outer.delta && orders_le;
      // γ = 0 with δ = 2 is GARCH
      return inner.family == Family::GARCH && outer.delta == 2.0 && orders_le;
    case Family::ARARCH:
      if (inner.family == Family::ARARCH) return inner.p <= outer.p;
      if (inner.family == Family::ARMA) return inner.p <= 1 && inner.q == 0;
      if (inner.family == Family::GARCH) return inner.q == 0 && inner.p <= outer.p;
      return false;
  }
  return false;
}

ParamVector::ParamVector(ModelSpec s, Eigen::VectorXd v) : spec(s), values(std::move(v)) {
  if (values.size() != dim(spec)) {
    throw Error(ErrorCode::InvalidArgument,
                to_string(spec) + " expects " + std::to_string(dim(spec)) + " parameters, got " +
                    std::to_string(values.size()));
  }
  if (!values.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "non-finite parameter for " + to_string(spec));
  }
}

Trajectory::Trajectory(Eigen::VectorXd data, std::optional<SimulationOrigin> origin)
    : data_(std::move(data)), origin_(std::move(origin)) {
  if (data_.size() < 1) throw Error(ErrorCode::InvalidArgument, "trajectory must be non-empty");
  if (!data_.allFinite()) throw Error(ErrorCode::InvalidArgument, "trajectory has non-finite entries");
}

namespace {

using Eigen::Index;
using Eigen::VectorXd;

CondMoments arma_moments(const ModelSpec& spec, const VectorXd& th, const Eigen::Ref<const VectorXd>& x) {
  const Index n = x.size();
  const int p = spec.p, q = spec.q;
  const double sigma = th[p + q];
  CondMoments m{VectorXd(n), VectorXd::Constant(n, std::max(sigma * sigma, limits::kVarianceFloor))};
  VectorXd eps(n);
  for (Index t = 0; t < n; ++t) {
    double f = 0.0;
    for (int i = 1; i <= p && i <= t; ++i) f += th[i - 1] * x[t - i];
    for (int j = 1; j <= q && j <= t; ++j) f += th[p + j - 1] * eps[t - j];
    m.f_hat[t] = f;
    eps[t] = x[t] - f;
  }
  return m;
}

CondMoments garch_moments(const ModelSpec& spec, const VectorXd& th, const Eigen::Ref<const VectorXd>& x) {
  const Index n = x.size();
  const int p = spec.p, q = spec.q;
  CondMoments m{VectorXd::Zero(n), VectorXd(n)};
  for (Index t = 0; t < n; ++t) {
    double h = th[0];
    for (int i = 1; i <= p && i <= t; ++i) h += th[i] * x[t - i] * x[t - i];
    for (int j = 1; j <= q && j <= t; ++j) h += th[p + j] * m.h_hat[t - j];
    m.h_hat[t] = std::max(h, limits::kVarianceFloor);
  }
  return m;
}

CondMoments aparch_moments(const ModelSpec& spec, const VectorXd& th, const Eigen::Ref<const VectorXd>& x) {
  const Index n = x.size();
  const int p = spec.p, q = spec.q;
  const double delta = spec.delta;
  CondMoments m{VectorXd::Zero(n), VectorXd(n)};
  VectorXd s(n);  // σ_t^δ before clamping
  for (Index t = 0; t < n; ++t) {
    double v = th[0];
    for (int i = 1; i <= p && i <= t; ++i) {
      const double xi = x[t - i];
      const double base = std::max(std::abs(xi) - th[p + i] * xi, 0.0);
      v += th[i] * std::pow(base, delta);
    }
    for (int j = 1; j <= q && j <= t; ++j) v += th[2 * p + j] * s[t - j];
    s[t] = std::max(v, 0.0);
    m.h_hat[t] = std::max(std::pow(s[t], 2.0 / delta), limits::kVarianceFloor);
  }
  return m;
}

CondMoments ararch_moments(const ModelSpec& spec, const VectorXd& th, const Eigen::Ref<const VectorXd>& x) {
  const Index n = x.size();
  const int p = spec.p;
  const double phi = th[0];
  CondMoments m{VectorXd(n), VectorXd(n)};
  VectorXd z(n);
  for (Index t = 0; t < n; ++t) {
    const double prev = t >= 1 ? x[t - 1] : 0.0;
    m.f_hat[t] = phi * prev;
    z[t] = x[t] - phi * prev;
    double h = th[1];
    for (int i = 1; i <= p && i <= t; ++i) h += th[1 + i] * z[t - i] * z[t - i];
    m.h_hat[t] = std::max(h, limits::kVarianceFloor);
  }
  return m;
}

}  // namespace

CondMoments cond_moments(const ParamVector& theta, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto& spec = theta.spec;
  switch (spec.family) {
    case Family::WhiteNoise: {
      const double s = theta[0];
      return {VectorXd::Zero(x.size()),
              VectorXd::Constant(x.size(), std::max(s * s, limits::kVarianceFloor))};
    }
    case Family::ARMA: return arma_moments(spec, theta.values, x);
    case Family::GARCH: return garch_moments(spec, theta.values, x);
    case Family::APARCH: return aparch_moments(spec, theta.values, x);
    case Family::ARARCH: return ararch_moments(spec, theta.values, x);
  }
  return {};
}

}  // namespace qmlsel
