#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's solvers; only plain Eigen and <cmath>.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

/// Cyclic coordinate descent for 0.5*||y - Xb||^2 + lambda*||b||_1, warm-started from `beta`.
inline Vector cd_lasso(const Matrix& X, const Vector& y, double lambda, Vector beta,
                       double tol = 1e-14, int max_sweeps = 200000) {
  Vector resid = y - X * beta;
  const Vector sq = X.colwise().squaredNorm().transpose();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double biggest = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double old = beta(j);
      const double z = X.col(j).dot(resid) + sq(j) * old;
      const double updated = soft_threshold(z, lambda) / sq(j);
      if (updated != old) {
        resid -= (updated - old) * X.col(j);
        beta(j) = updated;
        biggest = std::max(biggest, std::abs(updated - old));
      }
    }
    if (biggest < tol) break;
  }
  return beta;
}

inline double lasso_objective(const Matrix& X, const Vector& y, const Vector& beta, double lambda) {
  return 0.5 * (y - X * beta).squaredNorm() + lambda * beta.lpNorm<1>();
}

/// Lambda values (grid-interval midpoints) where the coordinate-descent support changes,
/// scanning a uniform grid from `hi` down to `lo`.
inline std::vector<double> cd_support_changes(const Matrix& X, const Vector& y, double hi, double lo,
                                              double step, double zero_tol = 1e-9) {
  std::vector<double> changes;
  Vector beta = Vector::Zero(X.cols());
  std::vector<bool> prev(static_cast<std::size_t>(X.cols()), false);
  double prev_lambda = hi;
  for (double lambda = hi; lambda >= lo; lambda -= step) {
    beta = cd_lasso(X, y, lambda, beta);
    std::vector<bool> support(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      support[static_cast<std::size_t>(j)] = std::abs(beta(j)) > zero_tol;
    }
    if (support != prev) changes.push_back(0.5 * (lambda + prev_lambda));
    prev = support;
    prev_lambda = lambda;
  }
  return changes;
}

/// RSS of y on the columns `cols` by explicit normal equations.
inline double rss_normal_equations(const Matrix& X, const Vector& y, const std::vector<int>& cols) {
  if (cols.empty()) return y.squaredNorm();
  Matrix XM(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) XM.col(static_cast<Eigen::Index>(i)) = X.col(cols[i]);
  const Vector b = (XM.transpose() * XM).ldlt().solve(XM.transpose() * y);
  return (y - XM * b).squaredNorm();
}

/// Maximizes f on [lo, hi] by repeatedly zooming a uniform grid around the best point.
inline std::pair<double, double> zoom_grid_max(const std::function<double(double)>& f, double lo,
                                               double hi, int points = 201, int rounds = 12) {
  double best_x = lo;
  double best_f = -INFINITY;
  for (int r = 0; r < rounds; ++r) {
    const double h = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) {
      const double x = lo + h * i;
      const double v = f(x);
      if (v > best_f) {
        best_f = v;
        best_x = x;
      }
    }
    lo = best_x - 2 * h;
    hi = best_x + 2 * h;
  }
  return {best_x, best_f};
}

/// Bernoulli log-likelihood of a no-intercept single-covariate model.
inline double logistic_loglik_1d(const Vector& x, const Vector& y, double b) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double prob = 1.0 / (1.0 + std::exp(-b * x(i)));
    acc += y(i) == 1.0 ? std::log(prob) : std::log(1.0 - prob);
  }
  return acc;
}

/// Breslow partial log-likelihood by explicit risk-set enumeration.
inline double cox_loglik_1d(const Vector& x, const Vector& time, const Vector& status, double b) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (status(i) != 1.0) continue;
    double risk = 0.0;
    for (Eigen::Index r = 0; r < x.size(); ++r) {
      if (time(r) >= time(i)) risk += std::exp(b * x(r));
    }
    acc += b * x(i) - std::log(risk);
  }
  return acc;
}

}  // namespace oracle
