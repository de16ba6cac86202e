#include "sigtest/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "sigtest/error.hpp"

namespace sigtest {

namespace {

constexpr int kMaxIterations = 100;
constexpr int kMaxHalvings = 20;
constexpr double kGradTol = 1e-10;
constexpr double kAcceptGradTol = 1e-8;
constexpr double kDivergenceNorm = 1e3;
// |eta| beyond this puts a fitted probability within 1e-13 of 0 or 1.
constexpr double kSeparationEta = 30.0;

double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

void check_indices(const IndexList& M, Eigen::Index p) {
  for (int m : M) {
    if (m < 0 || m >= p) {
      throw Error(ErrorKind::invalid_input, "column index " + std::to_string(m) + " out of range");
    }
  }
}

void require_full_rank(const Matrix& Z, const char* what) {
  if (Z.cols() == 0) return;
  if (Z.cols() > Z.rows()) {
    throw Error(ErrorKind::singular_design, std::string(what) + ": more columns than rows");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(Z);
  qr.setThreshold(1e-10);
  if (qr.rank() < Z.cols()) {
    throw Error(ErrorKind::singular_design, std::string(what) + " design is rank deficient");
  }
}

Matrix logistic_design(const BinaryDataset& data, const IndexList& M) {
  const Eigen::Index offset = data.include_intercept() ? 1 : 0;
  Matrix Z(data.n(), offset + static_cast<Eigen::Index>(M.size()));
  if (offset) Z.col(0).setOnes();
  for (std::size_t i = 0; i < M.size(); ++i) {
    Z.col(offset + static_cast<Eigen::Index>(i)) = data.X().col(M[i]);
  }
  return Z;
}

double bernoulli_loglik(const Vector& y, const Vector& eta) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) acc += y(i) * eta(i) - softplus(eta(i));
  return acc;
}

// Event/risk-set bookkeeping for the Breslow partial likelihood.
struct CoxTerms {
  double loglik = 0.0;
  Vector grad;
  Matrix info;  // negative Hessian
};

CoxTerms cox_terms(const SurvivalDataset& data, const Matrix& XM, const Vector& beta,
                   const std::vector<Eigen::Index>& order, bool derivatives) {
  const Eigen::Index n = data.n();
  const Eigen::Index q = XM.cols();
  const Vector eta = q > 0 ? Vector(XM * beta) : Vector::Zero(n);
  const double shift = eta.maxCoeff();

  CoxTerms out;
  out.grad = Vector::Zero(q);
  out.info = Matrix::Zero(q, q);
  double s0 = 0.0;
  Vector s1 = Vector::Zero(q);
  Matrix s2 = Matrix::Zero(q, q);

  std::size_t i = 0;
  while (i < order.size()) {
    // Tied times enter the risk set together before any of them is scored.
    std::size_t end = i;
    const double t = data.time()(order[i]);
    while (end < order.size() && data.time()(order[end]) == t) {
      const Eigen::Index r = order[end];
      const double w = std::exp(eta(r) - shift);
      s0 += w;
      if (derivatives && q > 0) {
        s1 += w * XM.row(r).transpose();
        s2.noalias() += w * XM.row(r).transpose() * XM.row(r);
      }
      ++end;
    }
    for (std::size_t e = i; e < end; ++e) {
      const Eigen::Index r = order[e];
      if (data.status()(r) != 1.0) continue;
      out.loglik += eta(r) - shift - std::log(s0);
      if (derivatives && q > 0) {
        const Vector mean = s1 / s0;
        out.grad += XM.row(r).transpose() - mean;
        out.info += s2 / s0 - mean * mean.transpose();
      }
    }
    i = end;
  }
  return out;
}

std::vector<Eigen::Index> descending_time_order(const SurvivalDataset& data) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.n()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return data.time()(a) > data.time()(b);
  });
  return order;
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::logistic: return "logistic";
    case Family::cox: return "cox";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "gaussian") return Family::gaussian;
  if (name == "logistic") return Family::logistic;
  if (name == "cox") return Family::cox;
  throw Error(ErrorKind::invalid_input, "unknown family '" + std::string(name) + "'");
}

BinaryDataset::BinaryDataset(Matrix X, Vector y, bool include_intercept)
    : X_(std::move(X)), y_(std::move(y)), include_intercept_(include_intercept) {
  if (X_.rows() < 2 || y_.size() != X_.rows()) {
    throw Error(ErrorKind::invalid_input, "binary dataset shape mismatch");
  }
  if (!X_.allFinite()) throw Error(ErrorKind::invalid_input, "design contains non-finite values");
  bool has0 = false;
  bool has1 = false;
  for (Eigen::Index i = 0; i < y_.size(); ++i) {
    if (y_(i) == 0.0) {
      has0 = true;
    } else if (y_(i) == 1.0) {
      has1 = true;
    } else {
      throw Error(ErrorKind::invalid_input, "binary response must be 0 or 1 (row " +
                                                std::to_string(i + 1) + ")");
    }
  }
  if (!has0 || !has1) {
    throw Error(ErrorKind::invalid_input, "binary response needs both 0 and 1 outcomes");
  }
}

SurvivalDataset::SurvivalDataset(Matrix X, Vector time, Vector status)
    : X_(std::move(X)), time_(std::move(time)), status_(std::move(status)) {
  if (X_.rows() < 2 || time_.size() != X_.rows() || status_.size() != X_.rows()) {
    throw Error(ErrorKind::invalid_input, "survival dataset shape mismatch");
  }
  if (!X_.allFinite()) throw Error(ErrorKind::invalid_input, "design contains non-finite values");
  bool any_event = false;
  for (Eigen::Index i = 0; i < time_.size(); ++i) {
    if (!(time_(i) > 0.0) || !std::isfinite(time_(i))) {
      throw Error(ErrorKind::invalid_input, "survival times must be positive (row " +
                                                std::to_string(i + 1) + ")");
    }
    if (status_(i) != 0.0 && status_(i) != 1.0) {
      throw Error(ErrorKind::invalid_input, "status must be 0 or 1 (row " +
                                                std::to_string(i + 1) + ")");
    }
    any_event = any_event || status_(i) == 1.0;
  }
  if (!any_event) throw Error(ErrorKind::no_events, "all observations are censored");
}

Family family_of(const ModelData& data) {
  return static_cast<Family>(data.index());
}

Eigen::Index num_covariates(const ModelData& data) {
  return std::visit([](const auto& d) { return d.p(); }, data);
}

FitResult gaussian_fit(const Dataset& data, const IndexList& M) {
  const double sigma2 = data.require_sigma2();
  const SubsetFit ls = least_squares(data, M);
  FitResult out;
  out.subset = M;
  out.coefficients = ls.coefficients;
  out.loglik = -0.5 * static_cast<double>(data.n()) * std::log(2.0 * std::numbers::pi * sigma2) -
               0.5 * ls.rss / sigma2;
  out.converged = true;
  return out;
}

double logistic_loglik(const BinaryDataset& data, const IndexList& M, const Vector& coefficients) {
  return bernoulli_loglik(data.y(), logistic_design(data, M) * coefficients);
}

FitResult logistic_fit(const BinaryDataset& data, const IndexList& M) {
  check_indices(M, data.p());
  const Matrix Z = logistic_design(data, M);
  require_full_rank(Z, "logistic");

  FitResult out;
  out.subset = M;
  Vector beta = Vector::Zero(Z.cols());
  if (data.include_intercept()) {
    const double ybar = data.y().mean();
    beta(0) = std::log(ybar / (1.0 - ybar));
  }
  Vector eta = Z * beta;
  double ll = bernoulli_loglik(data.y(), eta);
  if (Z.cols() == 0) {
    out.coefficients = beta;
    out.loglik = ll;
    out.converged = true;
    return out;
  }

  double grad_norm = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= kMaxIterations; ++it) {
    const Vector mu = (1.0 + (-eta.array()).exp()).inverse().matrix();
    const Vector grad = Z.transpose() * (data.y() - mu);
    grad_norm = grad.norm();
    out.iterations = it - 1;
    if (grad_norm < kGradTol) break;

    const Vector w = (mu.array() * (1.0 - mu.array())).matrix();
    const Matrix H = Z.transpose() * w.asDiagonal() * Z;
    const Vector step = H.ldlt().solve(grad);

    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h, t *= 0.5) {
      const Vector cand = beta + t * step;
      const Vector cand_eta = Z * cand;
      const double cand_ll = bernoulli_loglik(data.y(), cand_eta);
      if (std::isfinite(cand_ll) && cand_ll >= ll - 1e-12 * std::abs(ll)) {
        beta = cand;
        eta = cand_eta;
        ll = cand_ll;
        accepted = true;
        break;
      }
    }
    out.iterations = it;
    if (beta.norm() > kDivergenceNorm) {
      throw Error(ErrorKind::separation,
                  "logistic coefficients diverge (complete or quasi-complete separation)");
    }
    if (!accepted) break;
  }
  if (!(grad_norm < kAcceptGradTol)) {
    const Vector mu = (1.0 + (-eta.array()).exp()).inverse().matrix();
    grad_norm = (Z.transpose() * (data.y() - mu)).norm();
  }
  if (!(grad_norm < kAcceptGradTol)) {
    throw Error(ErrorKind::convergence, "logistic IRLS did not converge (gradient norm " +
                                            std::to_string(grad_norm) + ")");
  }
  if (eta.cwiseAbs().maxCoeff() > kSeparationEta) {
    throw Error(ErrorKind::separation,
                "logistic fitted probabilities are numerically 0 or 1 (separation)");
  }
  out.coefficients = beta;
  out.loglik = ll;
  out.converged = true;
  return out;
}

double cox_partial_loglik(const SurvivalDataset& data, const IndexList& M, const Vector& beta) {
  check_indices(M, data.p());
  return cox_terms(data, select_columns(data.X(), M), beta, descending_time_order(data), false)
      .loglik;
}

FitResult cox_fit(const SurvivalDataset& data, const IndexList& M) {
  check_indices(M, data.p());
  const Matrix XM = select_columns(data.X(), M);
  {
    Matrix Z(data.n(), XM.cols() + 1);
    Z.col(0).setOnes();
    Z.rightCols(XM.cols()) = XM;
    require_full_rank(Z, "cox");  // a constant covariate is not identifiable
  }
  const auto order = descending_time_order(data);

  FitResult out;
  out.subset = M;
  Vector beta = Vector::Zero(XM.cols());
  CoxTerms terms = cox_terms(data, XM, beta, order, true);
  if (XM.cols() == 0) {
    out.coefficients = beta;
    out.loglik = terms.loglik;
    out.converged = true;
    return out;
  }

  for (int it = 1; it <= kMaxIterations; ++it) {
    out.iterations = it - 1;
    if (terms.grad.norm() < kGradTol) break;
    const auto ldlt = terms.info.ldlt();
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
      if (beta.norm() > 0.5 * kDivergenceNorm) {
        throw Error(ErrorKind::separation, "cox partial likelihood is monotone");
      }
      throw Error(ErrorKind::singular_design, "cox information matrix is singular");
    }
    const Vector step = ldlt.solve(terms.grad);
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h, t *= 0.5) {
      const Vector cand = beta + t * step;
      CoxTerms cand_terms = cox_terms(data, XM, cand, order, true);
      if (std::isfinite(cand_terms.loglik) &&
          cand_terms.loglik >= terms.loglik - 1e-12 * std::abs(terms.loglik)) {
        beta = cand;
        terms = std::move(cand_terms);
        accepted = true;
        break;
      }
    }
    out.iterations = it;
    if (beta.norm() > kDivergenceNorm) {
      throw Error(ErrorKind::separation, "cox coefficients diverge (monotone likelihood)");
    }
    if (!accepted) break;
  }
  if (!(terms.grad.norm() < kAcceptGradTol)) {
    throw Error(ErrorKind::convergence, "cox Newton iterations did not converge (gradient norm " +
                                            std::to_string(terms.grad.norm()) + ")");
  }
  const Vector eta = XM * beta;
  if (eta.maxCoeff() - eta.minCoeff() > 2.0 * kSeparationEta) {
    throw Error(ErrorKind::separation, "cox relative risks are degenerate (monotone likelihood)");
  }
  out.coefficients = beta;
  out.loglik = terms.loglik;
  out.converged = true;
  return out;
}

FitResult fit(const ModelData& data, const IndexList& M) {
  return std::visit(
      [&](const auto& d) -> FitResult {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Dataset>) {
          return gaussian_fit(d, M);
        } else if constexpr (std::is_same_v<T, BinaryDataset>) {
          return logistic_fit(d, M);
        } else {
          return cox_fit(d, M);
        }
      },
      data);
}

namespace {

double drop_given_base(const ModelData& data, const FitResult& base, const IndexList& A, int m) {
  IndexList bigger = A;
  bigger.push_back(m);
  try {
    const FitResult ext = fit(data, bigger);
    return std::max(0.0, 2.0 * (ext.loglik - base.loglik));
  } catch (const Error& e) {
    // The base fit is fine, so a singular extension means x_m adds nothing.
    if (e.kind() == ErrorKind::singular_design) return 0.0;
    throw;
  }
}

}  // namespace

double lrt_drop(const ModelData& data, const IndexList& A, int m) {
  if (std::find(A.begin(), A.end(), m) != A.end()) {
    throw Error(ErrorKind::invalid_input, "candidate " + std::to_string(m) + " already in A");
  }
  return drop_given_base(data, fit(data, A), A, m);
}

LrtScan lrt_scan(const ModelData& data, const IndexList& A) {
  LrtScan scan;
  scan.candidates = complement(A, num_covariates(data));
  const FitResult base = fit(data, A);
  scan.drops.reserve(scan.candidates.size());
  for (int m : scan.candidates) {
    try {
      scan.drops.push_back(drop_given_base(data, base, A, m));
    } catch (const Error& e) {
      scan.drops.push_back(std::numeric_limits<double>::quiet_NaN());
      scan.excluded.push_back(m);
      scan.warnings.push_back("candidate " + std::to_string(m + 1) + " excluded: " +
                              std::string(to_string(e.kind())));
    }
  }
  return scan;
}

TestOutcome gumbel_test_glm(const ModelData& data, const IndexList& A, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::domain, "alpha must lie in (0, 1)");
  const Eigen::Index remaining = num_covariates(data) - static_cast<Eigen::Index>(A.size());
  const double correction = gumbel_correction(remaining);
  LrtScan scan = lrt_scan(data, A);
  if (static_cast<double>(scan.excluded.size()) > 0.1 * static_cast<double>(remaining)) {
    throw Error(ErrorKind::unreliable_max,
                std::to_string(scan.excluded.size()) + " of " + std::to_string(remaining) +
                    " candidate fits failed; maximum is unreliable");
  }
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scan.drops.size(); ++i) {
    if (std::isnan(scan.drops[i])) continue;
    if (!best || scan.drops[i] > scan.drops[*best]) best = i;
  }
  if (!best) throw Error(ErrorKind::unreliable_max, "no candidate fit succeeded");

  TestOutcome out;
  out.kind = TestKind::gumbel_glm;
  out.k = static_cast<int>(A.size()) + 1;
  out.A = A;
  out.j = scan.candidates[*best];
  out.alpha = alpha;
  out.correction = correction;
  out.statistic = scan.drops[*best] - correction;
  out.p_value = gumbel_sf(out.statistic);
  out.reject = out.p_value <= alpha;
  out.warnings = std::move(scan.warnings);
  return out;
}

std::vector<TestOutcome> gumbel_glm_sequence(const ModelData& data, int max_steps, double alpha) {
  std::vector<TestOutcome> out;
  IndexList A;
  const Eigen::Index p = num_covariates(data);
  for (int k = 1; k <= max_steps; ++k) {
    if (p - static_cast<Eigen::Index>(A.size()) < 3) break;
    out.push_back(gumbel_test_glm(data, A, alpha));
    A.push_back(out.back().j);
    std::sort(A.begin(), A.end());
  }
  return out;
}

}  // namespace sigtest
