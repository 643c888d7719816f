#include "qmlsel/config.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <set>

#include "qmlsel/criteria.hpp"
#include "qmlsel/errors.hpp"
#include "qmlsel/io.hpp"

namespace qmlsel {

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ConfigError, key + ": " + why);
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= value.size(); ++i) {
    if (i == value.size() || value[i] == ',') {
      auto item = trim(std::string_view(value).substr(start, i - start));
      if (!item.empty()) out.push_back(item);
      start = i + 1;
    }
  }
  return out;
}

template <typename Int>
Int parse_integer(const std::string& key, const std::string& value) {
  Int v{};
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) fail(key, "expected an integer, got '" + value + "'");
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    return parse_real(value, key);
  } catch (const Error&) {
    fail(key, "expected a number, got '" + value + "'");
  }
}

const std::map<std::string, std::set<std::string>>& schema_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"", {"schema"}},
      {"experiment",
       {"label", "dgp", "theta", "family", "n_values", "n_reps", "criteria", "master_seed", "oracle_n", "burn_in"}},
      {"fit", {"max_iter", "grad_tol", "n_restarts", "restart_jitter"}},
      {"output", {"dir"}},
  };
  return keys;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ',';
    if constexpr (std::is_same_v<T, double>) out += format_real(item);
    else if constexpr (std::is_same_v<T, std::string>) out += item;
    else out += std::to_string(item);
  }
  return out;
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  std::string section;
  std::set<std::string> seen;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("line " + std::to_string(line_no), "malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!schema_keys().count(section)) fail("[" + section + "]", "unknown section");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("line " + std::to_string(line_no), "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!schema_keys().at(section).count(key)) {
      fail(key, section.empty() ? "unknown top-level key" : "unknown key in [" + section + "]");
    }
    if (!seen.insert(key).second) fail(key, "given twice");

    if (key == "schema") {
      cfg.schema = parse_integer<int>(key, value);
      if (cfg.schema != kConfigSchema) fail(key, "unsupported schema " + value);
    } else if (key == "label") {
      cfg.label = value;
    } else if (key == "dgp") {
      try {
        cfg.dgp = parse_model(value);
      } catch (const Error& e) {
        fail(key, e.what());
      }
    } else if (key == "theta") {
      cfg.theta.clear();
      for (const auto& item : split_list(value)) cfg.theta.push_back(parse_double(key, item));
    } else if (key == "family") {
      try {
        parse_family(value);
      } catch (const Error& e) {
        fail(key, e.what());
      }
      cfg.family = value;
    } else if (key == "n_values") {
      cfg.n_values.clear();
      for (const auto& item : split_list(value)) cfg.n_values.push_back(parse_integer<Eigen::Index>(key, item));
    } else if (key == "n_reps") {
      cfg.n_reps = parse_integer<int>(key, value);
    } else if (key == "criteria") {
      cfg.criteria.clear();
      for (const auto& item : split_list(value)) {
        try {
          cfg.criteria.push_back(parse_criterion(item).name());
        } catch (const Error& e) {
          fail(key, e.what());
        }
      }
    } else if (key == "master_seed") {
      cfg.master_seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "oracle_n") {
      cfg.oracle_n = parse_integer<Eigen::Index>(key, value);
    } else if (key == "burn_in") {
      cfg.burn_in = parse_integer<std::size_t>(key, value);
    } else if (key == "max_iter") {
      cfg.fit.max_iter = parse_integer<int>(key, value);
    } else if (key == "grad_tol") {
      cfg.fit.grad_tol = parse_double(key, value);
    } else if (key == "n_restarts") {
      cfg.fit.n_restarts = parse_integer<int>(key, value);
    } else if (key == "restart_jitter") {
      cfg.fit.restart_jitter = parse_double(key, value);
    } else if (key == "dir") {
      cfg.output_dir = value;
    }
  }
  for (const char* required : {"schema", "dgp", "theta", "family", "n_values", "n_reps", "criteria", "master_seed"}) {
    if (!seen.count(required)) fail(required, "missing required key");
  }
  if (cfg.label.empty()) cfg.label = to_string(cfg.dgp);
  return cfg;
}

std::string serialize_run_config(const RunConfig& c) {
  std::string out;
  out += "schema = " + std::to_string(c.schema) + "\n\n[experiment]\n";
  out += "label = " + c.label + "\n";
  out += "dgp = " + to_string(c.dgp) + "\n";
  out += "theta = " + join(c.theta) + "\n";
  out += "family = " + c.family + "\n";
  out += "n_values = " + join(c.n_values) + "\n";
  out += "n_reps = " + std::to_string(c.n_reps) + "\n";
  out += "criteria = " + join(c.criteria) + "\n";
  out += "master_seed = " + std::to_string(c.master_seed) + "\n";
  out += "oracle_n = " + std::to_string(c.oracle_n) + "\n";
  out += "burn_in = " + std::to_string(c.burn_in) + "\n\n[fit]\n";
  out += "max_iter = " + std::to_string(c.fit.max_iter) + "\n";
  out += "grad_tol = " + format_real(c.fit.grad_tol) + "\n";
  out += "n_restarts = " + std::to_string(c.fit.n_restarts) + "\n";
  out += "restart_jitter = " + format_real(c.fit.restart_jitter) + "\n\n[output]\n";
  out += "dir = " + c.output_dir + "\n";
  return out;
}

ExperimentConfig to_experiment(const RunConfig& c) {
  if (c.theta.size() != static_cast<std::size_t>(dim(c.dgp))) {
    fail("theta", to_string(c.dgp) + " needs " + std::to_string(dim(c.dgp)) + " values, got " +
                      std::to_string(c.theta.size()));
  }
  Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(c.theta.data(), static_cast<Eigen::Index>(c.theta.size()));
  std::vector<Criterion> criteria;
  for (const auto& name : c.criteria) criteria.push_back(parse_criterion(name));
  ExperimentConfig exp{c.label,   ParamVector(c.dgp, theta), parse_family(c.family), c.n_values, c.n_reps,
                       criteria,  c.master_seed,             c.oracle_n,             c.burn_in,  c.fit};
  validate(exp);
  return exp;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_run_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qmlsel
