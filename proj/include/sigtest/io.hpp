#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sigtest/glm.hpp"
#include "sigtest/lasso_path.hpp"
#include "sigtest/montecarlo.hpp"
#include "sigtest/sig_tests.hpp"

namespace sigtest {

/// Numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Position of a named column, if present.
  std::optional<std::size_t> column(std::string_view name) const;
};

/// Throws invalid_input with "line L, column C" in the message on malformed input.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

/// "y" is the response, every other column a covariate. Covariates are scaled
/// to unit norm (centered first when `center`).
Dataset dataset_from_csv(const CsvTable& table, std::optional<double> sigma2, bool center);
BinaryDataset binary_from_csv(const CsvTable& table);
/// "time" and "status" are reserved; the rest are covariates.
SurvivalDataset survival_from_csv(const CsvTable& table);

/// One real number per line; blank lines are skipped.
std::vector<double> read_values(std::istream& in);

/// Shortest text that round-trips the double exactly.
std::string format_double(double x);

/// Field names: kind, k, A, j, statistic, correction, p_value, alpha, reject,
/// conservative, warnings. Indices are written 1-based.
nlohmann::ordered_json outcome_to_json(const TestOutcome& outcome);

/// Fields: scenario, reps, ks, rejection_rate_05, failures, h0_violations, unreliable.
nlohmann::ordered_json summary_to_json(const MonteCarloSummary& summary);

/// Knot table: k, lambda, entering, action, active_set (1-based, ';'-joined).
std::string knots_csv(const LassoPath& path);
std::string statistics_csv(const MonteCarloSummary& summary);
std::string qq_csv(const std::vector<std::pair<double, double>>& qq);

/// Inline scenario; an optional "preset" key selects the starting point.
Scenario scenario_from_json(const nlohmann::json& j);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace sigtest
