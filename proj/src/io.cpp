#include "sigtest/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "sigtest/error.hpp"

namespace sigtest {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

Error parse_error(std::size_t line, std::size_t col, const std::string& what) {
  return Error(ErrorKind::invalid_input,
               "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
}

Matrix covariates(const CsvTable& table, const std::vector<std::size_t>& skip) {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (std::find(skip.begin(), skip.end(), c) == skip.end()) keep.push_back(c);
  }
  if (keep.empty()) throw Error(ErrorKind::invalid_input, "no covariate columns");
  Matrix X(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < keep.size(); ++c) {
      X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = table.rows[r][keep[c]];
    }
  }
  return X;
}

Vector column_vector(const CsvTable& table, std::size_t c) {
  Vector v(static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) v(static_cast<Eigen::Index>(r)) = table.rows[r][c];
  return v;
}

std::size_t require_column(const CsvTable& table, std::string_view name) {
  const auto c = table.column(name);
  if (!c) throw Error(ErrorKind::invalid_input, "missing required column '" + std::string(name) + "'");
  return *c;
}

void require_rows(const CsvTable& table) {
  if (table.rows.empty()) throw Error(ErrorKind::invalid_input, "file has a header but no data rows");
}

nlohmann::ordered_json indices_json(const IndexList& idx) {
  auto arr = nlohmann::ordered_json::array();
  for (int i : idx) arr.push_back(i + 1);
  return arr;
}

}  // namespace

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  return std::nullopt;
}

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (!have_header) {
      for (const auto f : fields) {
        if (f.empty()) throw parse_error(lineno, table.header.size() + 1, "empty column name");
        table.header.push_back(unquote(f));
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw parse_error(lineno, std::min(fields.size(), table.header.size()) + 1,
                        "expected " + std::to_string(table.header.size()) + " fields, found " +
                            std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto value = parse_number(fields[c]);
      if (!value) throw parse_error(lineno, c + 1, "not a number: '" + std::string(fields[c]) + "'");
      row.push_back(*value);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw parse_error(1, 1, "empty input");
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::invalid_input, "cannot open '" + path.string() + "'");
  return parse_csv(in);
}

Dataset dataset_from_csv(const CsvTable& table, std::optional<double> sigma2, bool center) {
  require_rows(table);
  const std::size_t yc = require_column(table, "y");
  return Dataset(standardize(covariates(table, {yc}), center), column_vector(table, yc), sigma2);
}

BinaryDataset binary_from_csv(const CsvTable& table) {
  require_rows(table);
  const std::size_t yc = require_column(table, "y");
  return BinaryDataset(covariates(table, {yc}), column_vector(table, yc), true);
}

SurvivalDataset survival_from_csv(const CsvTable& table) {
  require_rows(table);
  const std::size_t tc = require_column(table, "time");
  const std::size_t sc = require_column(table, "status");
  return SurvivalDataset(covariates(table, {tc, sc}), column_vector(table, tc),
                         column_vector(table, sc));
}

std::vector<double> read_values(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto value = parse_number(line);
    if (!value || !std::isfinite(*value)) {
      throw parse_error(lineno, 1, "not a finite number: '" + std::string(trim(line)) + "'");
    }
    out.push_back(*value);
  }
  if (out.empty()) throw Error(ErrorKind::invalid_input, "no values in input");
  return out;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

nlohmann::ordered_json outcome_to_json(const TestOutcome& o) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(o.kind));
  j["k"] = o.k;
  j["A"] = indices_json(o.A);
  j["j"] = o.j + 1;
  j["statistic"] = o.statistic;
  j["correction"] = o.correction ? nlohmann::ordered_json(*o.correction) : nullptr;
  j["p_value"] = o.p_value;
  j["alpha"] = o.alpha;
  j["reject"] = o.reject;
  j["conservative"] = o.conservative;
  j["warnings"] = o.warnings;
  return j;
}

nlohmann::ordered_json summary_to_json(const MonteCarloSummary& s) {
  nlohmann::ordered_json j;
  j["scenario"] = s.scenario;
  j["reps"] = s.reps;
  j["ks"] = s.ks;
  j["rejection_rate_05"] = s.rejection_rate_05;
  nlohmann::ordered_json reasons = nlohmann::ordered_json::object();
  for (const auto& [reason, count] : s.failures.reasons) reasons[reason] = count;
  j["failures"] = {{"count", s.failures.count}, {"reasons", reasons}};
  j["h0_violations"] = s.h0_violations;
  j["unreliable"] = s.unreliable;
  return j;
}

std::string knots_csv(const LassoPath& path) {
  std::ostringstream os;
  os << "k,lambda,entering,action,active_set\n";
  for (const Knot& knot : path.knots) {
    os << knot.k << ',' << format_double(knot.lambda) << ',' << knot.variable + 1 << ','
       << (knot.action == KnotAction::enter ? "enter" : "leave") << ',';
    for (std::size_t i = 0; i < knot.active_after.size(); ++i) {
      os << (i ? ";" : "") << knot.active_after[i] + 1;
    }
    os << '\n';
  }
  return os.str();
}

std::string statistics_csv(const MonteCarloSummary& summary) {
  std::string out = "statistic\n";
  for (double x : summary.statistics) out += format_double(x) + '\n';
  return out;
}

std::string qq_csv(const std::vector<std::pair<double, double>>& qq) {
  std::string out = "theoretical,empirical\n";
  for (const auto& [t, e] : qq) out += format_double(t) + ',' + format_double(e) + '\n';
  return out;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::invalid_input, "inline scenario must be a JSON object");
  try {
    Scenario s = j.contains("preset") ? preset(j.at("preset").get<std::string>()) : Scenario{};
    for (const auto& [key, value] : j.items()) {
      if (key == "preset") continue;
      if (key == "name") {
        s.name = value.get<std::string>();
      } else if (key == "family") {
        s.family = parse_family(value.get<std::string>());
      } else if (key == "design") {
        const std::string kind = value.is_string() ? value.get<std::string>()
                                                   : value.at("kind").get<std::string>();
        if (kind == "orthogonal") {
          s.design = {DesignKind::orthogonal, 0.0};
        } else if (kind == "ar1") {
          s.design = {DesignKind::ar1, value.is_object() ? value.value("rho", 0.0) : 0.0};
        } else if (kind == "iid_gaussian") {
          s.design = {DesignKind::iid_gaussian, 0.0};
        } else {
          throw Error(ErrorKind::invalid_input, "unknown design '" + kind + "'");
        }
      } else if (key == "rho") {
        s.design.rho = value.get<double>();
      } else if (key == "n") {
        s.n = value.get<int>();
      } else if (key == "p") {
        s.p = value.get<int>();
      } else if (key == "beta") {
        s.beta = value.get<std::vector<double>>();
      } else if (key == "sigma") {
        s.sigma = value.get<double>();
      } else if (key == "censor_frac") {
        s.censor_frac = value.get<double>();
      } else if (key == "test") {
        const auto t = value.get<std::string>();
        if (t == "gumbel") {
          s.test = TestKind::gumbel;
        } else if (t == "covariance") {
          s.test = TestKind::covariance;
        } else if (t == "gumbel_glm") {
          s.test = TestKind::gumbel_glm;
        } else {
          throw Error(ErrorKind::invalid_input, "unknown test '" + t + "'");
        }
      } else if (key == "selector") {
        s.selector = parse_selector(value.get<std::string>());
      } else if (key == "k") {
        s.k = value.get<int>();
      } else if (key == "reps") {
        s.reps = value.get<int>();
      } else if (key == "seed") {
        s.seed = value.get<std::uint64_t>();
      } else {
        throw Error(ErrorKind::invalid_input, "unknown scenario field '" + key + "'");
      }
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_input, std::string("inline scenario: ") + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::invalid_input, "cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw Error(ErrorKind::invalid_input, "write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace sigtest
