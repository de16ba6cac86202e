#include "sigtest/selection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sigtest/error.hpp"

namespace sigtest {

namespace {

// Orthonormal basis for span(X_A) by twice-iterated Gram-Schmidt.
Matrix orthonormal_basis(const Matrix& X, const IndexList& A) {
  Matrix Q(X.rows(), static_cast<Eigen::Index>(A.size()));
  for (std::size_t i = 0; i < A.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    Vector v = X.col(A[i]);
    const double norm0 = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      if (c > 0) v -= Q.leftCols(c) * (Q.leftCols(c).transpose() * v);
    }
    const double norm = v.norm();
    if (norm <= 1e-10 * norm0 || norm0 == 0.0) {
      throw Error(ErrorKind::singular_design, "model columns are rank deficient");
    }
    Q.col(c) = v / norm;
  }
  return Q;
}

}  // namespace

std::string_view to_string(Selector s) {
  switch (s) {
    case Selector::stepwise: return "stepwise";
    case Selector::lasso: return "lasso";
    case Selector::max_r: return "max_r";
  }
  return "unknown";
}

Selector parse_selector(std::string_view name) {
  if (name == "stepwise") return Selector::stepwise;
  if (name == "lasso") return Selector::lasso;
  if (name == "max_r") return Selector::max_r;
  throw Error(ErrorKind::invalid_input, "unknown selector '" + std::string(name) + "'");
}

double SelectionStep::r_max() const {
  return r_all.empty() ? r_j : *std::max_element(r_all.begin(), r_all.end());
}

std::vector<double> r_values(const Dataset& data, const IndexList& A, const IndexList& candidates) {
  const double sigma2 = data.require_sigma2();
  const Matrix Q = orthonormal_basis(data.X(), A);
  Vector resid = data.y();
  if (Q.cols() > 0) resid -= Q * (Q.transpose() * resid);
  std::vector<double> out;
  out.reserve(candidates.size());
  for (int m : candidates) {
    Vector x = data.X().col(m);
    const double norm0 = x.squaredNorm();
    if (Q.cols() > 0) x -= Q * (Q.transpose() * x);
    const double nm = x.squaredNorm();
    if (norm0 == 0.0 || nm <= 1e-20 * norm0) {
      out.push_back(0.0);  // in span(X_A)
      continue;
    }
    const double proj = x.dot(resid);
    out.push_back(proj * proj / nm / sigma2);
  }
  return out;
}

SelectionPath stepwise_path(const Dataset& data, int max_steps, Selector selector) {
  if (selector == Selector::lasso) {
    throw Error(ErrorKind::invalid_input, "stepwise_path does not produce lasso steps");
  }
  const double sigma2 = data.require_sigma2();
  const auto limit = std::min(data.n(), data.p());
  if (max_steps < 0 || max_steps > limit) {
    throw Error(ErrorKind::invalid_input, "max_steps must lie in [0, min(n, p)]");
  }
  const double floor = 1e-12 * std::max(data.y().squaredNorm() / sigma2, 1e-300);

  SelectionPath out;
  IndexList A;
  for (int k = 1; k <= max_steps; ++k) {
    SelectionStep step;
    step.k = k;
    step.A = A;
    step.selector = selector;
    step.candidates = complement(A, data.p());
    step.r_all = r_values(data, A, step.candidates);
    std::size_t best = 0;
    for (std::size_t i = 1; i < step.r_all.size(); ++i) {
      if (step.r_all[i] > step.r_all[best]) best = i;
    }
    if (step.r_all.empty() || step.r_all[best] <= floor) {
      out.notes.push_back("stepwise path truncated at step " + std::to_string(k) +
                          ": residual is orthogonal to the remaining columns");
      break;
    }
    step.j = step.candidates[best];
    step.r_j = step.r_all[best];
    A.push_back(step.j);
    std::sort(A.begin(), A.end());
    out.steps.push_back(std::move(step));
  }
  return out;
}

SelectionPath lasso_steps(const LassoPath& path, const Dataset& data) {
  if (path.data_digest != data.digest()) {
    throw Error(ErrorKind::stale_path, "lasso path was computed from different data");
  }
  SelectionPath out;
  int k = 0;
  bool deletion_seen = false;
  for (const Knot& knot : path.knots) {
    if (knot.action == KnotAction::leave) {
      deletion_seen = true;
      continue;
    }
    SelectionStep step;
    step.k = ++k;
    step.A = knot.active_before;
    step.j = knot.variable;
    step.selector = Selector::lasso;
    step.candidates = complement(step.A, data.p());
    step.r_all = r_values(data, step.A, step.candidates);
    const auto it = std::find(step.candidates.begin(), step.candidates.end(), step.j);
    step.r_j = step.r_all[static_cast<std::size_t>(it - step.candidates.begin())];
    const double top = step.r_max();
    step.conservative = step.r_j < top - 1e-10 * std::max(1.0, top);
    out.steps.push_back(std::move(step));
  }
  if (deletion_seen) {
    out.notes.push_back("lasso path contains deletion events; steps follow entries only");
  }
  return out;
}

SelectionPath select_steps(const Dataset& data, Selector selector, int max_steps) {
  if (selector == Selector::lasso) {
    return lasso_steps(lars_path(data, max_steps), data);
  }
  return stepwise_path(data, max_steps, selector);
}

}  // namespace sigtest
