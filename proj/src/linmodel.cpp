#include "sigtest/linmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "sigtest/error.hpp"

namespace sigtest {

namespace {

constexpr double kRankTolerance = 1e-10;

void fnv_mix(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

Dataset::Dataset(Matrix X, Vector y, std::optional<double> sigma2)
    : X_(std::move(X)), y_(std::move(y)), sigma2_(sigma2) {
  if (X_.rows() < 2 || X_.cols() < 1) {
    throw Error(ErrorKind::invalid_input, "dataset needs n >= 2 rows and p >= 1 columns");
  }
  if (y_.size() != X_.rows()) {
    throw Error(ErrorKind::invalid_input,
                "response length " + std::to_string(y_.size()) + " does not match " +
                    std::to_string(X_.rows()) + " design rows");
  }
  if (!X_.allFinite() || !y_.allFinite()) {
    throw Error(ErrorKind::invalid_input, "dataset contains non-finite values");
  }
  if (sigma2_ && !(*sigma2_ > 0.0 && std::isfinite(*sigma2_))) {
    throw Error(ErrorKind::invalid_input, "sigma2 must be positive and finite");
  }
}

Dataset Dataset::with_sigma2(std::optional<double> sigma2) const {
  return Dataset(X_, y_, sigma2);
}

double Dataset::require_sigma2() const {
  if (!sigma2_) {
    throw Error(ErrorKind::missing_variance,
                "noise variance is unknown; supply sigma2 or estimate it");
  }
  return *sigma2_;
}

std::uint64_t Dataset::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::int64_t dims[2] = {X_.rows(), X_.cols()};
  fnv_mix(h, dims, sizeof(dims));
  fnv_mix(h, X_.data(), sizeof(double) * static_cast<std::size_t>(X_.size()));
  fnv_mix(h, y_.data(), sizeof(double) * static_cast<std::size_t>(y_.size()));
  return h;
}

bool Dataset::is_standardized(double tol) const {
  for (Eigen::Index j = 0; j < X_.cols(); ++j) {
    if (std::abs(X_.col(j).squaredNorm() - 1.0) > tol) return false;
  }
  return true;
}

Matrix standardize(const Matrix& X, bool center) {
  Matrix out = X;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    auto col = out.col(j);
    if (center) {
      const double scale = std::max(1.0, col.cwiseAbs().maxCoeff());
      col.array() -= col.mean();
      if (col.norm() <= 1e-12 * scale * std::sqrt(static_cast<double>(col.size()))) {
        throw Error(ErrorKind::degenerate_column,
                    "column " + std::to_string(j) + " has zero variance");
      }
    }
    const double norm = col.norm();
    if (norm == 0.0) {
      throw Error(ErrorKind::degenerate_column, "column " + std::to_string(j) + " is all zero");
    }
    col /= norm;
  }
  return out;
}

Matrix select_columns(const Matrix& X, const IndexList& subset) {
  Matrix out(X.rows(), static_cast<Eigen::Index>(subset.size()));
  for (std::size_t i = 0; i < subset.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = X.col(subset[i]);
  }
  return out;
}

IndexList all_columns(Eigen::Index p) {
  IndexList out(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) out[static_cast<std::size_t>(j)] = j;
  return out;
}

IndexList complement(const IndexList& A, Eigen::Index p) {
  std::vector<bool> in(static_cast<std::size_t>(p), false);
  for (int a : A) in[static_cast<std::size_t>(a)] = true;
  IndexList out;
  for (int m = 0; m < p; ++m) {
    if (!in[static_cast<std::size_t>(m)]) out.push_back(m);
  }
  return out;
}

SubsetFit least_squares(const Dataset& data, const IndexList& M) {
  for (int m : M) {
    if (m < 0 || m >= data.p()) {
      throw Error(ErrorKind::invalid_input, "column index " + std::to_string(m) + " out of range");
    }
  }
  SubsetFit fit;
  fit.subset = M;
  if (M.empty()) {
    fit.coefficients = Vector::Zero(0);
    fit.fitted = Vector::Zero(data.n());
    fit.rss = data.y().squaredNorm();
    return fit;
  }
  if (static_cast<Eigen::Index>(M.size()) > data.n()) {
    throw Error(ErrorKind::singular_design, "more columns than observations");
  }
  const Matrix XM = select_columns(data.X(), M);
  Eigen::ColPivHouseholderQR<Matrix> qr(XM);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < XM.cols()) {
    throw Error(ErrorKind::singular_design,
                "subset of " + std::to_string(M.size()) + " columns is rank deficient");
  }
  fit.coefficients = qr.solve(data.y());
  fit.fitted = XM * fit.coefficients;
  fit.rss = (data.y() - fit.fitted).squaredNorm();
  return fit;
}

double r_stat(const Dataset& data, const IndexList& A, int m) {
  const double sigma2 = data.require_sigma2();
  if (std::find(A.begin(), A.end(), m) != A.end()) {
    throw Error(ErrorKind::invalid_input, "candidate " + std::to_string(m) + " already in A");
  }
  IndexList bigger = A;
  bigger.push_back(m);
  const double rss_small = least_squares(data, A).rss;
  const double rss_big = least_squares(data, bigger).rss;
  return std::max(0.0, (rss_small - rss_big) / sigma2);
}

double estimate_sigma2(const Dataset& data) {
  if (data.n() <= data.p()) {
    throw Error(ErrorKind::not_estimable, "sigma2 needs n > p");
  }
  const SubsetFit fit = least_squares(data, all_columns(data.p()));
  const double s2 = fit.rss / static_cast<double>(data.n() - data.p());
  if (!(s2 > 1e-14 * std::max(1.0, data.y().squaredNorm()))) {
    throw Error(ErrorKind::degenerate_variance, "residual variance is zero (perfect fit)");
  }
  return s2;
}

}  // namespace sigtest
