#include "sigtest/lasso_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "sigtest/error.hpp"

namespace sigtest {

namespace {

constexpr double kLambdaTol = 1e-10;
constexpr double kDenomTol = 1e-14;

struct Event {
  double lambda = 0.0;
  int var = -1;  // local column
  KnotAction action = KnotAction::enter;
  int sign = 1;
};

// Piecewise-linear lasso homotopy on a fixed set of columns.
// Within a segment the active coefficients are a - lambda * b, where
// a = (X_E'X_E)^{-1} X_E'y and b = (X_E'X_E)^{-1} s_E.
class Homotopy {
 public:
  Homotopy(Matrix X, const Vector& y) : X_(std::move(X)), y_(y) {
    active_flag_.assign(static_cast<std::size_t>(X_.cols()), false);
    refresh();
  }

  std::optional<Event> next_event() {
    if (stalled_) return std::nullopt;
    std::optional<Event> best;
    bool tie = false;
    const double ceiling = lambda_ + kLambdaTol;
    for (Eigen::Index m = 0; m < X_.cols(); ++m) {
      const int mi = static_cast<int>(m);
      if (active_flag_[static_cast<std::size_t>(m)]) {
        const auto pos = position(mi);
        const double bb = b_(pos);
        if (std::abs(bb) <= kDenomTol) continue;
        const double r = a_(pos) / bb;
        if (!(r > kLambdaTol && r < lambda_ - kLambdaTol)) continue;
        consider(best, tie, Event{r, mi, KnotAction::leave, 0});
      } else {
        const double um = u_(m);
        const double vm = v_(m);
        std::optional<Event> local;
        auto take = [&](double r, int sign) {
          if (!(r > kLambdaTol && r <= ceiling)) return;
          if (mi == last_var_ && r >= lambda_ - kLambdaTol) return;
          if (!local || r > local->lambda) local = Event{r, mi, KnotAction::enter, sign};
        };
        if (1.0 - vm > kDenomTol) take(um / (1.0 - vm), +1);
        if (1.0 + vm > kDenomTol) take(-um / (1.0 + vm), -1);
        if (local) consider(best, tie, *local);
      }
    }
    if (best && tie && best->action == KnotAction::enter) {
      warnings_.push_back("entry tie at lambda=" + std::to_string(best->lambda) +
                          "; lowest index taken");
    }
    if (best) best->lambda = std::min(best->lambda, lambda_);
    return best;
  }

  void apply(const Event& ev) {
    const auto idx = static_cast<std::size_t>(ev.var);
    if (ev.action == KnotAction::enter) {
      active_.push_back(ev.var);
      signs_.push_back(ev.sign);
      active_flag_[idx] = true;
    } else {
      const auto pos = static_cast<std::size_t>(position(ev.var));
      active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(pos));
      signs_.erase(signs_.begin() + static_cast<std::ptrdiff_t>(pos));
      active_flag_[idx] = false;
    }
    lambda_ = ev.lambda;
    last_var_ = ev.var;
    refresh();
  }

  double lambda() const { return lambda_; }
  const std::vector<int>& active() const { return active_; }
  const std::vector<int>& signs() const { return signs_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Coefficients on all local columns for lambda inside the current segment.
  Vector beta_at(double lambda) const {
    Vector beta = Vector::Zero(X_.cols());
    for (std::size_t i = 0; i < active_.size(); ++i) {
      const auto e = static_cast<Eigen::Index>(i);
      beta(active_[i]) = a_(e) - lambda * b_(e);
    }
    return beta;
  }

 private:
  static void consider(std::optional<Event>& best, bool& tie, const Event& cand) {
    if (!best) {
      best = cand;
      tie = false;
      return;
    }
    if (cand.lambda > best->lambda + kLambdaTol) {
      best = cand;
      tie = false;
    } else if (cand.lambda >= best->lambda - kLambdaTol) {
      tie = true;
    }
  }

  Eigen::Index position(int var) const {
    const auto it = std::find(active_.begin(), active_.end(), var);
    return static_cast<Eigen::Index>(it - active_.begin());
  }

  void refresh() {
    const auto size = static_cast<Eigen::Index>(active_.size());
    if (size == 0) {
      a_ = Vector::Zero(0);
      b_ = Vector::Zero(0);
      u_ = X_.transpose() * y_;
      v_ = Vector::Zero(X_.cols());
      return;
    }
    Matrix XE(X_.rows(), size);
    Vector s(size);
    for (Eigen::Index i = 0; i < size; ++i) {
      XE.col(i) = X_.col(active_[static_cast<std::size_t>(i)]);
      s(i) = signs_[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(XE);
    qr.setThreshold(1e-10);
    if (qr.rank() < size) {
      warnings_.push_back("active set of size " + std::to_string(size) +
                          " is rank deficient; solution not unique, path stops");
      stalled_ = true;
      return;
    }
    a_ = qr.solve(y_);
    Vector t = qr.colsPermutation().transpose() * s;
    const auto R = qr.matrixR().topLeftCorner(size, size).triangularView<Eigen::Upper>();
    R.transpose().solveInPlace(t);
    R.solveInPlace(t);
    b_ = qr.colsPermutation() * t;
    u_ = X_.transpose() * (y_ - XE * a_);
    v_ = X_.transpose() * (XE * b_);
  }

  Matrix X_;
  Vector y_;
  std::vector<int> active_;
  std::vector<int> signs_;
  std::vector<bool> active_flag_;
  double lambda_ = std::numeric_limits<double>::infinity();
  int last_var_ = -1;
  bool stalled_ = false;
  Vector a_, b_, u_, v_;
  std::vector<std::string> warnings_;
};

void sorted_state(const std::vector<int>& local_active, const std::vector<int>& local_signs,
                  const IndexList& to_global, IndexList& active, std::vector<int>& signs) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < local_active.size(); ++i) {
    pairs.emplace_back(to_global[static_cast<std::size_t>(local_active[i])], local_signs[i]);
  }
  std::sort(pairs.begin(), pairs.end());
  active.clear();
  signs.clear();
  for (const auto& [var, sign] : pairs) {
    active.push_back(var);
    signs.push_back(sign);
  }
}

void check_duplicates(const Matrix& X) {
  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < X.cols(); ++j) {
      const double scale = std::max(1.0, X.col(i).cwiseAbs().maxCoeff());
      if ((X.col(i) - X.col(j)).cwiseAbs().maxCoeff() <= 1e-12 * scale) {
        throw Error(ErrorKind::duplicate_column, "columns " + std::to_string(i) + " and " +
                                                     std::to_string(j) + " are identical");
      }
    }
  }
}

IndexList validate_subset(const IndexList& subset, Eigen::Index p) {
  std::vector<bool> seen(static_cast<std::size_t>(p), false);
  for (int m : subset) {
    if (m < 0 || m >= p) {
      throw Error(ErrorKind::invalid_input, "column index " + std::to_string(m) + " out of range");
    }
    if (seen[static_cast<std::size_t>(m)]) {
      throw Error(ErrorKind::invalid_input, "column index " + std::to_string(m) + " repeated");
    }
    seen[static_cast<std::size_t>(m)] = true;
  }
  return subset;
}

}  // namespace

std::vector<std::size_t> LassoPath::entry_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (knots[i].action == KnotAction::enter) out.push_back(i);
  }
  return out;
}

LassoPath lars_path(const Dataset& data, int max_steps) {
  const auto limit = std::min(data.n(), data.p());
  if (max_steps < 0 || max_steps > limit) {
    throw Error(ErrorKind::invalid_input, "max_steps must lie in [0, min(n, p)] = [0, " +
                                              std::to_string(limit) + "]");
  }
  check_duplicates(data.X());

  LassoPath path;
  path.data_digest = data.digest();
  path.p = data.p();
  if (!data.is_standardized()) {
    path.warnings.push_back("design columns are not unit-norm; lambda tolerances assume they are");
  }

  const IndexList identity = all_columns(data.p());

  Homotopy h(data.X(), data.y());
  int entries = 0;
  const std::size_t max_events = 20 * static_cast<std::size_t>(data.p() + 1);
  while (entries < max_steps) {
    const auto ev = h.next_event();
    if (!ev) break;
    Knot knot;
    knot.k = static_cast<int>(path.knots.size()) + 1;
    knot.lambda = ev->lambda;
    knot.variable = ev->var;
    knot.action = ev->action;
    knot.active_before = h.active();
    std::sort(knot.active_before.begin(), knot.active_before.end());
    h.apply(*ev);
    sorted_state(h.active(), h.signs(), identity, knot.active_after, knot.signs_after);
    path.knots.push_back(std::move(knot));
    if (ev->action == KnotAction::enter) ++entries;
    if (path.knots.size() >= max_events) {
      path.warnings.push_back("event limit reached; path truncated");
      break;
    }
  }
  path.warnings.insert(path.warnings.end(), h.warnings().begin(), h.warnings().end());
  return path;
}

LassoSolution lasso_solve(const Dataset& data, double lambda) {
  return lasso_solve(data, lambda, all_columns(data.p()));
}

LassoSolution lasso_solve(const Dataset& data, double lambda, const IndexList& subset) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::domain, "lambda must be a finite nonnegative number");
  }
  LassoSolution sol;
  sol.subset = validate_subset(subset, data.p());
  if (subset.empty()) {
    sol.beta = Vector::Zero(0);
    return sol;
  }
  Homotopy h(select_columns(data.X(), subset), data.y());
  const std::size_t max_events = 20 * (subset.size() + 1);
  std::size_t events = 0;
  while (true) {
    const auto ev = h.next_event();
    if (!ev || ev->lambda <= lambda) break;
    h.apply(*ev);
    if (++events >= max_events) {
      sol.warnings.push_back("event limit reached; solution may be inexact");
      break;
    }
  }
  sol.beta = h.beta_at(lambda);
  sorted_state(h.active(), h.signs(), subset, sol.active, sol.signs);
  sol.warnings.insert(sol.warnings.end(), h.warnings().begin(), h.warnings().end());
  return sol;
}

double lasso_objective(const Dataset& data, const Vector& beta, double lambda,
                       const IndexList& subset) {
  const Matrix XS = select_columns(data.X(), subset);
  return 0.5 * (data.y() - XS * beta).squaredNorm() + lambda * beta.lpNorm<1>();
}

KktReport kkt_check(const Dataset& data, const Vector& beta, double lambda,
                    const IndexList& subset, double tol) {
  if (beta.size() != static_cast<Eigen::Index>(subset.size())) {
    throw Error(ErrorKind::invalid_input, "beta dimension does not match subset");
  }
  const Matrix XS = select_columns(data.X(), subset);
  const Vector grad = XS.transpose() * (data.y() - XS * beta);
  KktReport report;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    KktCoordinate c;
    c.index = subset[i];
    c.beta = beta(e);
    c.gradient = grad(e);
    if (c.beta != 0.0) {
      c.slack = std::abs(c.gradient - lambda * (c.beta > 0 ? 1.0 : -1.0));
    } else {
      c.slack = std::max(0.0, std::abs(c.gradient) - lambda);
    }
    c.ok = c.slack <= tol;
    if (!c.ok) {
      report.pass = false;
      report.failing.push_back(c.index);
    }
    report.coordinates.push_back(c);
  }
  return report;
}

KktReport kkt_check(const Dataset& data, const Vector& beta, double lambda, double tol) {
  return kkt_check(data, beta, lambda, all_columns(data.p()), tol);
}

}  // namespace sigtest
