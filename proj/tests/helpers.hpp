#pragma once

#include <cstdint>
#include <functional>

#include <doctest.h>

#include "sigtest/error.hpp"
#include "sigtest/linmodel.hpp"
#include "sigtest/montecarlo.hpp"
#include "sigtest/rng.hpp"

namespace testutil {

using sigtest::Dataset;
using sigtest::Matrix;
using sigtest::Vector;

/// Runs f and returns the kind of the sigtest::Error it throws; fails the test if none.
inline sigtest::ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const sigtest::Error& e) {
    return e.kind();
  }
  FAIL("expected a sigtest::Error");
  return sigtest::ErrorKind::invalid_input;
}

/// X = 3x3 identity, y = (3, -1, 2), sigma^2 = 1.
inline Dataset identity_example() {
  Vector y(3);
  y << 3, -1, 2;
  return Dataset(Matrix::Identity(3, 3), y, 1.0);
}

/// Unit-norm AR(1) design (rho = 0 gives iid columns) with y = X*beta + N(0, 1) noise.
inline Dataset random_dataset(int n, int p, double rho, std::uint64_t seed,
                              const std::vector<double>& beta = {}) {
  sigtest::Rng rng(seed, 0);
  const Matrix X = sigtest::gen_design({sigtest::DesignKind::ar1, rho}, n, p, rng);
  Vector b = Vector::Zero(p);
  for (std::size_t i = 0; i < beta.size(); ++i) b(static_cast<Eigen::Index>(i)) = beta[i];
  Vector y = X * b;
  for (int i = 0; i < n; ++i) y(i) += rng.normal();
  return Dataset(X, y, 1.0);
}

}  // namespace testutil
