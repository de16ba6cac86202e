#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sigtest/glm.hpp"
#include "sigtest/rng.hpp"
#include "sigtest/selection.hpp"
#include "sigtest/sig_tests.hpp"

namespace sigtest {

enum class DesignKind { orthogonal, ar1, iid_gaussian };

struct DesignSpec {
  DesignKind kind = DesignKind::orthogonal;
  double rho = 0.0;  ///< ar1 only
};

std::string_view to_string(DesignKind kind);

enum class Reference { gumbel, exp1 };
std::string_view to_string(Reference r);
Reference parse_reference(std::string_view name);
double reference_cdf(Reference ref, double x);
double reference_quantile(Reference ref, double p);

struct Scenario {
  std::string name = "custom";
  Family family = Family::gaussian;
  DesignSpec design;
  int n = 100;
  int p = 50;
  std::vector<double> beta;  ///< leading coefficients; the rest are zero
  double sigma = 1.0;
  double censor_frac = 0.10;
  TestKind test = TestKind::gumbel;
  Selector selector = Selector::max_r;
  int k = 1;
  int reps = 500;
  std::uint64_t seed = 1;

  /// Throws invalid_input describing the first problem found.
  void validate() const;
  Vector full_beta() const;
  IndexList support() const;
  Reference reference() const;
};

/// Named presets: fig1-left, fig1-right, fig2-left, fig2-right, fig3-left, fig3-right, cov-null.
Scenario preset(std::string_view name);
std::vector<std::string> preset_names();

struct FailureTally {
  int count = 0;
  std::map<std::string, int> reasons;
};

struct MonteCarloSummary {
  std::string scenario;
  int reps = 0;
  Reference reference = Reference::gumbel;
  std::vector<double> statistics;  ///< successful replications, in replication order
  std::vector<double> p_values;
  std::vector<std::pair<double, double>> qq;  ///< (theoretical, empirical)
  double ks = 1.0;
  double rejection_rate_05 = 0.0;
  FailureTally failures;
  int h0_violations = 0;  ///< signal replications whose tested model missed part of supp(beta)
  bool unreliable = false;

  double mean_statistic() const;
};

/// Orthonormal columns, or unit-norm AR(1)/iid Gaussian columns.
Matrix gen_design(const DesignSpec& design, int n, int p, Rng& rng);

/// Response for the scenario's family; Gaussian data carries sigma^2 as known.
ModelData gen_response(const Scenario& s, const Matrix& X, Rng& rng);

struct Replication {
  std::optional<TestOutcome> outcome;
  std::string failure;
  bool h0_violation = false;
};

/// Replication r of the scenario, driven by the stream (seed, r).
Replication run_replication(const Scenario& s, int r);

/// All replications, executed on up to `threads` workers (0 = hardware concurrency)
/// and aggregated in replication order.
MonteCarloSummary run_scenario(const Scenario& s, int threads = 1);

std::vector<std::pair<double, double>> qq_points(std::span<const double> statistics, Reference ref);
double ks_distance(std::span<const double> statistics, Reference ref);

}  // namespace sigtest
