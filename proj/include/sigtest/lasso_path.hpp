#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigtest/linmodel.hpp"

namespace sigtest {

enum class KnotAction { enter, leave };

/// One event on the lasso path: a variable entering or leaving the active set.
struct Knot {
  int k = 0;  ///< 1-based event counter (entries and deletions)
  double lambda = 0.0;
  int variable = -1;
  KnotAction action = KnotAction::enter;
  IndexList active_before;  ///< sorted
  IndexList active_after;   ///< sorted
  std::vector<int> signs_after;  ///< aligned with active_after, entries +-1
};

struct LassoPath {
  std::vector<Knot> knots;
  std::uint64_t data_digest = 0;
  Eigen::Index p = 0;
  std::vector<std::string> warnings;

  /// Positions in `knots` of the entry events, in path order.
  std::vector<std::size_t> entry_positions() const;
};

/**
 * LARS with the lasso modification.
 *
 * Runs until `max_steps` variables have entered (deletions do not count),
 * the path reaches lambda = 0, or the active set can no longer grow.
 * Entry ties within 1e-10 go to the lowest column index and are noted in
 * `warnings`. Exact duplicate columns are rejected up front.
 */
LassoPath lars_path(const Dataset& data, int max_steps);

struct LassoSolution {
  IndexList subset;    ///< columns the problem was restricted to
  Vector beta;         ///< aligned with subset
  IndexList active;    ///< global indices of the active segment at lambda
  std::vector<int> signs;  ///< aligned with active
  std::vector<std::string> warnings;
};

/// Exact lasso minimizer of 0.5*||y - X_S b||^2 + lambda*||b||_1 over S = all columns.
LassoSolution lasso_solve(const Dataset& data, double lambda);

/// Same, restricted to the columns in `subset`.
LassoSolution lasso_solve(const Dataset& data, double lambda, const IndexList& subset);

struct KktCoordinate {
  int index = -1;  ///< global column index
  double beta = 0.0;
  double gradient = 0.0;  ///< <x_m, y - X beta>
  double slack = 0.0;     ///< violation size; <= tolerance means satisfied
  bool ok = true;
};

struct KktReport {
  bool pass = true;
  std::vector<KktCoordinate> coordinates;
  IndexList failing;
};

/// Subgradient optimality check with tolerance `tol` on each coordinate.
KktReport kkt_check(const Dataset& data, const Vector& beta, double lambda,
                    const IndexList& subset, double tol = 1e-6);

KktReport kkt_check(const Dataset& data, const Vector& beta, double lambda, double tol = 1e-6);

/// 0.5*||y - X_S b||^2 + lambda*||b||_1.
double lasso_objective(const Dataset& data, const Vector& beta, double lambda,
                       const IndexList& subset);

}  // namespace sigtest
