#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace sigtest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Column indices, 0-based.
using IndexList = std::vector<int>;

/**
 * Design matrix, response and (optionally) the known noise variance.
 *
 * Construction validates shape and finiteness; the object is immutable
 * afterwards and can be shared freely between threads.
 */
class Dataset {
 public:
  Dataset(Matrix X, Vector y, std::optional<double> sigma2 = std::nullopt);

  const Matrix& X() const { return X_; }
  const Vector& y() const { return y_; }
  std::optional<double> sigma2() const { return sigma2_; }
  Eigen::Index n() const { return X_.rows(); }
  Eigen::Index p() const { return X_.cols(); }

  /// Same data with a different noise-variance declaration.
  Dataset with_sigma2(std::optional<double> sigma2) const;

  /// Requires a known, positive sigma2; throws missing_variance otherwise.
  double require_sigma2() const;

  /// FNV-1a checksum over the shape, X and y.
  std::uint64_t digest() const;

  /// True when every column has unit squared norm within `tol`.
  bool is_standardized(double tol = 1e-8) const;

 private:
  Matrix X_;
  Vector y_;
  std::optional<double> sigma2_;
};

struct SubsetFit {
  IndexList subset;
  Vector coefficients;
  double rss = 0.0;
  Vector fitted;
};

/// Scales each column to unit squared norm, optionally centering first.
Matrix standardize(const Matrix& X, bool center);

/// Columns of X in the order given by `subset`.
Matrix select_columns(const Matrix& X, const IndexList& subset);

/// Least squares on the columns in M via a column-pivoted QR.
/// Throws singular_design when X_M is rank deficient.
SubsetFit least_squares(const Dataset& data, const IndexList& M);

/// (RSS_A - RSS_{A+m}) / sigma^2.
double r_stat(const Dataset& data, const IndexList& A, int m);

/// RSS_full / (n - p).
double estimate_sigma2(const Dataset& data);

/// 0, 1, ..., p-1.
IndexList all_columns(Eigen::Index p);

/// Indices 0..p-1 not in A, ascending.
IndexList complement(const IndexList& A, Eigen::Index p);

}  // namespace sigtest
