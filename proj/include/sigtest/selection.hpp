#pragma once

#include <string>
#include <vector>

#include "sigtest/lasso_path.hpp"
#include "sigtest/linmodel.hpp"

namespace sigtest {

enum class Selector { stepwise, lasso, max_r };

std::string_view to_string(Selector s);
Selector parse_selector(std::string_view name);

/// One step of a selection sequence: model A before the step, entering j and its RSS drop.
struct SelectionStep {
  int k = 0;
  IndexList A;
  int j = -1;
  double r_j = 0.0;
  IndexList candidates;       ///< A^c, ascending
  std::vector<double> r_all;  ///< R_m aligned with candidates
  Selector selector = Selector::max_r;
  bool conservative = false;  ///< r_j below the maximum over A^c

  Eigen::Index remaining() const { return static_cast<Eigen::Index>(candidates.size()); }
  double r_max() const;
};

struct SelectionPath {
  std::vector<SelectionStep> steps;
  std::vector<std::string> notes;
};

/// R_m = (RSS_A - RSS_{A+m}) / sigma^2 for every m in `candidates`, by projecting onto span(X_A).
std::vector<double> r_values(const Dataset& data, const IndexList& A, const IndexList& candidates);

/**
 * Forward stepwise regression: each step adds the candidate with the largest
 * R_m, lowest index on ties. `selector` must be stepwise or max_r; it only
 * sets the tag on the produced steps.
 */
SelectionPath stepwise_path(const Dataset& data, int max_steps,
                            Selector selector = Selector::stepwise);

/// One step per entry event of `path`. Throws stale_path on digest mismatch.
SelectionPath lasso_steps(const LassoPath& path, const Dataset& data);

/// Dispatches on the selector; lasso runs LARS for `max_steps` entries first.
SelectionPath select_steps(const Dataset& data, Selector selector, int max_steps);

}  // namespace sigtest
