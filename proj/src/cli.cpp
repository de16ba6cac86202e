#include "sigtest/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "sigtest/io.hpp"

namespace sigtest::cli {

namespace {

struct Options {
  std::string input;
  std::string output;
  std::string format = "csv";
  std::optional<int> max_steps;
  bool center = false;
  std::optional<double> sigma2;
  double alpha = 0.05;
  std::string selector = "max_r";
  std::string family = "gaussian";
  std::string scenario;
  std::string inline_json;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::string out_dir = ".";
  std::string reference = "gumbel";
};

void emit(const Options& opt, std::ostream& out, const std::string& content) {
  if (opt.output.empty() || opt.output == "-") {
    out << content;
  } else {
    write_file_atomic(opt.output, content);
  }
}

std::string na_or(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

int cmd_path(const Options& opt, std::ostream& out) {
  const Dataset data = dataset_from_csv(read_csv_file(opt.input), opt.sigma2, opt.center);
  const int limit = static_cast<int>(std::min(data.n(), data.p()));
  const LassoPath path = lars_path(data, opt.max_steps.value_or(limit));
  if (opt.format == "json") {
    auto arr = nlohmann::ordered_json::array();
    for (const Knot& knot : path.knots) {
      nlohmann::ordered_json j;
      j["k"] = knot.k;
      j["lambda"] = knot.lambda;
      j["entering"] = knot.variable + 1;
      j["action"] = knot.action == KnotAction::enter ? "enter" : "leave";
      auto active = nlohmann::ordered_json::array();
      for (int a : knot.active_after) active.push_back(a + 1);
      j["active_set"] = active;
      arr.push_back(j);
    }
    emit(opt, out, arr.dump(2) + "\n");
  } else {
    emit(opt, out, knots_csv(path));
  }
  return kSuccess;
}

struct TestRow {
  int k = 0;
  std::optional<int> j;
  std::optional<double> r_j;
  std::string selector;
  bool conservative = false;
  std::optional<TestOutcome> gumbel;
  std::optional<TestOutcome> covariance;
  std::string note;
};

std::string rows_csv(const std::vector<TestRow>& rows) {
  std::ostringstream os;
  os << "k,j,R_j,selector,conservative,gumbel_statistic,correction,gumbel_p_value,gumbel_reject,"
        "cov_j,cov_statistic,cov_p_value,cov_reject,note\n";
  auto flag = [](bool b) { return b ? "true" : "false"; };
  for (const auto& r : rows) {
    os << r.k << ',' << (r.j ? std::to_string(*r.j + 1) : "NA") << ',' << na_or(r.r_j) << ','
       << r.selector << ',' << flag(r.conservative) << ',';
    if (r.gumbel) {
      os << format_double(r.gumbel->statistic) << ',' << na_or(r.gumbel->correction) << ','
         << format_double(r.gumbel->p_value) << ',' << flag(r.gumbel->reject) << ',';
    } else {
      os << "NA,NA,NA,NA,";
    }
    if (r.covariance) {
      os << r.covariance->j + 1 << ',' << format_double(r.covariance->statistic) << ','
         << format_double(r.covariance->p_value) << ',' << flag(r.covariance->reject) << ',';
    } else {
      os << "NA,NA,NA,NA,";
    }
    os << r.note << '\n';
  }
  return os.str();
}

void append_note(std::string& note, std::string_view what) {
  if (!note.empty()) note += ';';
  note += what;
}

std::vector<TestRow> gaussian_rows(const Options& opt, const CsvTable& table) {
  bool plug_in = false;
  const Dataset data =
      resolve_sigma2(dataset_from_csv(table, opt.sigma2, opt.center), plug_in);
  const int limit = static_cast<int>(std::min(data.n(), data.p()));
  const int steps = opt.max_steps.value_or(limit);
  const Selector selector = parse_selector(opt.selector);
  const SelectionPath sel = select_steps(data, selector, steps);
  const LassoPath path = lars_path(data, std::min(steps + 1, limit));

  std::vector<TestRow> rows;
  for (const SelectionStep& step : sel.steps) {
    TestRow row;
    row.k = step.k;
    row.j = step.j;
    row.r_j = step.r_j;
    row.selector = std::string(to_string(step.selector));
    row.conservative = step.conservative;
    try {
      row.gumbel = gumbel_test(step, opt.alpha);
      if (plug_in) row.gumbel->warnings.push_back(kPlugInWarning);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::too_few_remaining) throw;
      append_note(row.note, "too_few_remaining");
    }
    try {
      row.covariance = covariance_test(path, data, step.k, opt.alpha);
      if (plug_in) row.covariance->warnings.push_back(kPlugInWarning);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::path_too_short && e.kind() != ErrorKind::unsupported_step) throw;
      append_note(row.note, std::string("covariance_") + std::string(to_string(e.kind())));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<TestRow> glm_rows(const Options& opt, const CsvTable& table, Family family) {
  const ModelData data = family == Family::logistic ? ModelData(binary_from_csv(table))
                                                    : ModelData(survival_from_csv(table));
  const Eigen::Index p = num_covariates(data);
  const Eigen::Index n = std::visit([](const auto& d) { return d.n(); }, data);
  const int steps = opt.max_steps.value_or(static_cast<int>(std::min(n - 1, p)));
  if (steps < 0 || steps > p) throw Error(ErrorKind::invalid_input, "max-steps out of range");

  std::vector<TestRow> rows;
  IndexList A;
  for (int k = 1; k <= steps; ++k) {
    TestRow row;
    row.k = k;
    row.selector = "lrt";
    if (p - static_cast<Eigen::Index>(A.size()) < 3) {
      row.note = "too_few_remaining";
      rows.push_back(std::move(row));
      continue;
    }
    TestOutcome o = gumbel_test_glm(data, A, opt.alpha);
    row.j = o.j;
    row.r_j = o.statistic + *o.correction;
    A.push_back(o.j);
    std::sort(A.begin(), A.end());
    row.gumbel = std::move(o);
    rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_test(const Options& opt, std::ostream& out) {
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) {
    throw Error(ErrorKind::invalid_input, "alpha must lie in (0, 1)");
  }
  const CsvTable table = read_csv_file(opt.input);
  const Family family = parse_family(opt.family);
  const std::vector<TestRow> rows =
      family == Family::gaussian ? gaussian_rows(opt, table) : glm_rows(opt, table, family);
  if (opt.format == "json") {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      if (r.gumbel) arr.push_back(outcome_to_json(*r.gumbel));
      if (r.covariance) arr.push_back(outcome_to_json(*r.covariance));
    }
    emit(opt, out, arr.dump(2) + "\n");
  } else {
    emit(opt, out, rows_csv(rows));
  }
  return kSuccess;
}

int thread_setting() {
  const char* env = std::getenv("SIGTEST_THREADS");
  if (!env || !*env) return 0;
  try {
    const int t = std::stoi(env);
    return t < 0 ? 0 : t;
  } catch (const std::exception&) {
    throw Error(ErrorKind::invalid_input, "SIGTEST_THREADS must be an integer");
  }
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  Scenario s;
  if (!opt.inline_json.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(opt.inline_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::invalid_input, std::string("inline scenario: ") + e.what());
    }
    s = scenario_from_json(j);
  } else if (!opt.scenario.empty()) {
    s = preset(opt.scenario);
  } else {
    throw Error(ErrorKind::invalid_input, "simulate needs --scenario NAME or --inline JSON");
  }
  if (opt.seed) s.seed = *opt.seed;
  if (opt.reps) s.reps = *opt.reps;
  s.validate();

  const MonteCarloSummary summary = run_scenario(s, thread_setting());
  const std::filesystem::path dir = opt.out_dir;
  std::filesystem::create_directories(dir);
  const std::string json = summary_to_json(summary).dump(2) + "\n";
  write_file_atomic(dir / "statistics.csv", statistics_csv(summary));
  write_file_atomic(dir / "qq.csv", qq_csv(summary.qq));
  write_file_atomic(dir / "summary.json", json);
  out << json;
  return kSuccess;
}

int cmd_qq(const Options& opt, std::ostream& out) {
  std::ifstream in(opt.input);
  if (!in) throw Error(ErrorKind::invalid_input, "cannot open '" + opt.input + "'");
  const std::vector<double> values = read_values(in);
  emit(opt, out, qq_csv(qq_points(values, parse_reference(opt.reference))));
  return kSuccess;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::missing_variance:
      return kMissingVariance;
    case ErrorKind::singular_design:
    case ErrorKind::duplicate_column:
    case ErrorKind::not_estimable:
    case ErrorKind::degenerate_variance:
    case ErrorKind::path_too_short:
    case ErrorKind::unsupported_step:
    case ErrorKind::separation:
    case ErrorKind::convergence:
    case ErrorKind::unreliable_max:
      return kNumericalError;
    default:
      return kInputError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Significance tests along lasso and forward-stepwise paths"};
  app.require_subcommand(1);

  auto* path = app.add_subcommand("path", "LARS knot table for a CSV dataset");
  path->add_option("--input", opt.input, "CSV with a 'y' column")->required();
  path->add_option("--max-steps", opt.max_steps, "number of entries to trace");
  path->add_flag("--center", opt.center, "center covariates before scaling");
  path->add_option("--output", opt.output, "output file (default stdout)");
  path->add_option("--format", opt.format)->check(CLI::IsMember({"csv", "json"}));

  auto* test = app.add_subcommand("test", "per-step covariance and Gumbel tests");
  test->add_option("--input", opt.input, "CSV dataset")->required();
  test->add_option("--sigma2", opt.sigma2, "known noise variance")->check(CLI::PositiveNumber);
  test->add_option("--alpha", opt.alpha, "test level");
  test->add_option("--selector", opt.selector)
      ->check(CLI::IsMember({"stepwise", "lasso", "max_r"}));
  test->add_option("--family", opt.family)->check(CLI::IsMember({"gaussian", "logistic", "cox"}));
  test->add_option("--max-steps", opt.max_steps);
  test->add_flag("--center", opt.center, "center covariates before scaling");
  test->add_option("--output", opt.output);
  test->add_option("--format", opt.format)->check(CLI::IsMember({"csv", "json"}));

  auto* sim = app.add_subcommand("simulate", "Monte Carlo calibration of a scenario");
  auto* name_opt = sim->add_option("--scenario,scenario", opt.scenario, "preset name");
  sim->add_option("--inline", opt.inline_json, "scenario as JSON")->excludes(name_opt);
  sim->add_option("--seed", opt.seed);
  sim->add_option("--reps", opt.reps);
  sim->add_option("--out", opt.out_dir, "output directory");

  auto* qq = app.add_subcommand("qq", "Q-Q pairs for a file of statistics");
  qq->add_option("--input", opt.input, "one value per line")->required();
  qq->add_option("--reference", opt.reference)->check(CLI::IsMember({"gumbel", "exp1"}));
  qq->add_option("--output", opt.output);

  std::vector<const char*> argv{"sigtest"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    if (*path) return cmd_path(opt, out);
    if (*test) return cmd_test(opt, out);
    if (*sim) return cmd_simulate(opt, out);
    return cmd_qq(opt, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace sigtest::cli
