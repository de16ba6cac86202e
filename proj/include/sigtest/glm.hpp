#pragma once

#include <string>
#include <variant>
#include <vector>

#include "sigtest/linmodel.hpp"
#include "sigtest/sig_tests.hpp"

namespace sigtest {

enum class Family { gaussian, logistic, cox };
std::string_view to_string(Family f);
Family parse_family(std::string_view name);

/// Binary response in {0, 1}; both outcomes must occur.
class BinaryDataset {
 public:
  BinaryDataset(Matrix X, Vector y, bool include_intercept = true);

  const Matrix& X() const { return X_; }
  const Vector& y() const { return y_; }
  bool include_intercept() const { return include_intercept_; }
  Eigen::Index n() const { return X_.rows(); }
  Eigen::Index p() const { return X_.cols(); }

 private:
  Matrix X_;
  Vector y_;
  bool include_intercept_;
};

/// Right-censored survival data; status 1 = event, 0 = censored.
class SurvivalDataset {
 public:
  SurvivalDataset(Matrix X, Vector time, Vector status);

  const Matrix& X() const { return X_; }
  const Vector& time() const { return time_; }
  const Vector& status() const { return status_; }
  Eigen::Index n() const { return X_.rows(); }
  Eigen::Index p() const { return X_.cols(); }

 private:
  Matrix X_;
  Vector time_;
  Vector status_;
};

using ModelData = std::variant<Dataset, BinaryDataset, SurvivalDataset>;
Family family_of(const ModelData& data);
Eigen::Index num_covariates(const ModelData& data);

struct FitResult {
  IndexList subset;
  Vector coefficients;  ///< intercept first when the model has one, then subset order
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Gaussian log-likelihood with known sigma2, so that 2*(gain) equals r_stat.
FitResult gaussian_fit(const Dataset& data, const IndexList& M);

/// Bernoulli maximum likelihood by Newton/IRLS with step halving.
FitResult logistic_fit(const BinaryDataset& data, const IndexList& M);

/// Breslow partial likelihood maximized by damped Newton.
FitResult cox_fit(const SurvivalDataset& data, const IndexList& M);

FitResult fit(const ModelData& data, const IndexList& M);

/// Cox partial log-likelihood (Breslow ties) at the given coefficients.
double cox_partial_loglik(const SurvivalDataset& data, const IndexList& M, const Vector& beta);

/// Bernoulli log-likelihood at (intercept, beta) on the columns M.
double logistic_loglik(const BinaryDataset& data, const IndexList& M, const Vector& coefficients);

/// D_m = 2 (l_{A+m} - l_A), clamped at 0.
double lrt_drop(const ModelData& data, const IndexList& A, int m);

/// Per-candidate likelihood-ratio drops, with failed candidates reported separately.
struct LrtScan {
  IndexList candidates;
  std::vector<double> drops;  ///< aligned with candidates; NaN where excluded
  IndexList excluded;
  std::vector<std::string> warnings;
};

LrtScan lrt_scan(const ModelData& data, const IndexList& A);

/// Max likelihood-ratio drop over A^c, centered like the linear Gumbel test.
TestOutcome gumbel_test_glm(const ModelData& data, const IndexList& A, double alpha);

/// Forward selection by likelihood-ratio drop, one gumbel_glm outcome per step.
std::vector<TestOutcome> gumbel_glm_sequence(const ModelData& data, int max_steps, double alpha);

}  // namespace sigtest
