#include "qmlsel/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "qmlsel/errors.hpp"

namespace qmlsel {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }

std::optional<double> parse_optional(std::string_view s, std::string_view field) {
  if (s == "NA") return std::nullopt;
  return parse_real(s, field);
}

Eigen::Index parse_index(std::string_view s, std::string_view field) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ParseError, "bad integer '" + std::string(s) + "' in " + std::string(field));
  }
  return static_cast<Eigen::Index>(v);
}

bool parse_flag(std::string_view s, std::string_view field) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw Error(ErrorCode::ParseError, "bad flag '" + std::string(s) + "' in " + std::string(field));
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view text, std::string_view field) {
  text = trim(text);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::ParseError, "bad number '" + std::string(text) + "' in " + std::string(field));
  }
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text, std::string_view expected_header) {
  std::vector<std::vector<std::string>> rows;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != expected_header) {
        throw Error(ErrorCode::ParseError,
                    "expected CSV header '" + std::string(expected_header) + "', got '" + std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false, was_quoted = false;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      const char c = i < line.size() ? line[i] : ',';
      if (quoted) {
        if (i == line.size()) throw Error(ErrorCode::ParseError, "unterminated quote in CSV row");
        if (c != '"') {
          field += c;
        } else if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else if (c == '"' && trim(field).empty() && !was_quoted) {
        quoted = was_quoted = true;
        field.clear();
      } else if (c == ',') {
        fields.emplace_back(was_quoted ? field : std::string(trim(field)));
        field.clear();
        was_quoted = false;
      } else if (!was_quoted || c != ' ') {
        if (was_quoted) throw Error(ErrorCode::ParseError, "text after closing quote in CSV row");
        field += c;
      }
    }
    rows.push_back(std::move(fields));
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, "missing CSV header '" + std::string(expected_header) + "'");
  return rows;
}

namespace {

// Quotes a text field when it holds a separator, as model strings do.
std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string trajectory_csv(const Trajectory& x) {
  std::string out = "x\n";
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    out += format_real(x[t]);
    out += '\n';
  }
  return out;
}

Trajectory parse_trajectory_csv(std::string_view text) {
  const auto rows = parse_csv(text, "x");
  Eigen::VectorXd data(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 1) throw Error(ErrorCode::ParseError, "trajectory CSV must have one column");
    data[static_cast<Eigen::Index>(i)] = parse_real(rows[i][0], "x");
  }
  if (data.size() == 0) throw Error(ErrorCode::ParseError, "trajectory CSV has no rows");
  return Trajectory(std::move(data));
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) { return parse_trajectory_csv(read_text(path)); }

void write_trajectory_csv(const Trajectory& x, const std::filesystem::path& path) {
  write_text(path, trajectory_csv(x));
}

std::string selection_csv(const SelectionResult& result) {
  std::string out = "model,converged,n_gamma_bar,penalty,logdet_term,value,chosen\n";
  for (const auto& row : result.rows) {
    out += csv_text(to_string(row.spec));
    out += row.converged ? ",1," : ",0,";
    if (row.report) {
      const auto& c = row.report->components;
      out += format_real(c.n_gamma_bar) + ',' + format_real(c.penalty) + ',' + optional_real(c.logdet_term) + ',' +
             format_real(row.report->value);
    } else {
      out += "NA,NA,NA,NA";
    }
    out += row.spec == result.chosen ? ",1\n" : ",0\n";
  }
  return out;
}

std::vector<SelectionCsvRow> parse_selection_csv(std::string_view text) {
  std::vector<SelectionCsvRow> out;
  for (const auto& f : parse_csv(text, "model,converged,n_gamma_bar,penalty,logdet_term,value,chosen")) {
    if (f.size() != 7) throw Error(ErrorCode::ParseError, "selection CSV rows need 7 fields");
    out.push_back({f[0], parse_flag(f[1], "converged"), parse_optional(f[2], "n_gamma_bar"),
                   parse_optional(f[3], "penalty"), parse_optional(f[4], "logdet_term"), parse_optional(f[5], "value"),
                   parse_flag(f[6], "chosen")});
  }
  return out;
}

std::string consistency_csv(const ConsistencyTable& table) {
  std::string out = "dgp,n,criterion,pct_true,pct_overfit,pct_misspec,pct_failed\n";
  for (const auto& c : table.cells) {
    out += csv_text(table.label) + ',' + std::to_string(c.n) + ',' + c.criterion + ',' + format_real(c.pct_true()) + ',' +
           format_real(c.pct_overfit()) + ',' + format_real(c.pct_misspec()) + ',' + format_real(c.pct_failed()) + '\n';
  }
  return out;
}

std::vector<ConsistencyCsvRow> parse_consistency_csv(std::string_view text) {
  std::vector<ConsistencyCsvRow> out;
  for (const auto& f : parse_csv(text, "dgp,n,criterion,pct_true,pct_overfit,pct_misspec,pct_failed")) {
    if (f.size() != 7) throw Error(ErrorCode::ParseError, "consistency CSV rows need 7 fields");
    out.push_back({f[0], parse_index(f[1], "n"), f[2], parse_real(f[3], "pct_true"), parse_real(f[4], "pct_overfit"),
                   parse_real(f[5], "pct_misspec"), parse_real(f[6], "pct_failed")});
  }
  return out;
}

std::string efficiency_csv(const EfficiencyTable& table) {
  std::string out = "dgp,n,criterion,me,mean_loss_selected,mean_loss_true\n";
  for (const auto& c : table.cells) {
    out += csv_text(table.label) + ',' + std::to_string(c.n) + ',' + c.criterion + ',' + format_real(c.me) + ',' +
           format_real(c.mean_loss_selected) + ',' + format_real(c.mean_loss_true) + '\n';
  }
  return out;
}

std::vector<EfficiencyCsvRow> parse_efficiency_csv(std::string_view text) {
  std::vector<EfficiencyCsvRow> out;
  for (const auto& f : parse_csv(text, "dgp,n,criterion,me,mean_loss_selected,mean_loss_true")) {
    if (f.size() != 6) throw Error(ErrorCode::ParseError, "efficiency CSV rows need 6 fields");
    out.push_back({f[0], parse_index(f[1], "n"), f[2], parse_real(f[3], "me"), parse_real(f[4], "mean_loss_selected"),
                   parse_real(f[5], "mean_loss_true")});
  }
  return out;
}

}  // namespace qmlsel
