// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "oracles.hpp"
#include "sigtest/cli.hpp"
#include "sigtest/glm.hpp"
#include "sigtest/io.hpp"
#include "sigtest/lasso_path.hpp"
#include "sigtest/montecarlo.hpp"
#include "sigtest/selection.hpp"
#include "sigtest/sig_tests.hpp"

using namespace sigtest;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Verdict()>& body,
            double budget_seconds) {
  const auto start = Clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (secs >= budget_seconds) {
    v.pass = false;
    v.detail += (v.detail.empty() ? "" : "; ") + std::string("runtime over budget");
  }
  if (!v.pass) ++failures;
  char timing[64];
  std::snprintf(timing, sizeof timing, " (%.2fs, budget %.0fs)", secs, budget_seconds);
  std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << id << ' ' << title << timing;
  if (!v.detail.empty()) std::cout << " :: " << v.detail;
  std::cout << std::endl;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

Dataset make_data(int n, int p, DesignSpec design, std::uint64_t seed, const std::vector<double>& beta,
                  double sigma = 1.0) {
  Rng rng(seed, 0);
  const Matrix X = gen_design(design, n, p, rng);
  Vector b = Vector::Zero(p);
  for (std::size_t i = 0; i < beta.size() && static_cast<int>(i) < p; ++i) {
    b(static_cast<Eigen::Index>(i)) = beta[i];
  }
  Vector y = X * b;
  for (int i = 0; i < n; ++i) y(i) += sigma * rng.normal();
  return Dataset(X, y, sigma * sigma);
}

Verdict criterion1() {
  Verdict v;
  int instances = 0, steps = 0, skipped = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; instances < 100; ++seed) {
    const int p = instances % 2 == 0 ? 5 : 10;
    const DesignSpec design =
        (instances / 2) % 2 == 0 ? DesignSpec{DesignKind::iid_gaussian, 0.0} : DesignSpec{DesignKind::ar1, 0.5};
    const Dataset d = make_data(30, p, design, 1000 + seed, {2.0, -1.5});
    ++instances;
    const LassoPath path = lars_path(d, p);
    const auto entries = path.entry_positions();
    for (std::size_t k = 1; k < entries.size(); ++k) {
      try {
        const CovarianceForms f = covariance_forms(path, d, static_cast<int>(k));
        worst = std::max(worst, std::abs(f.inner_product_form - f.decomposition_form));
        ++steps;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::unsupported_step) throw;
        ++skipped;
      }
    }
  }
  v.require(worst < 1e-8, "max gap " + fmt(worst));
  v.detail += (v.detail.empty() ? "" : "; ") + std::to_string(instances) + " instances, " +
              std::to_string(steps) + " steps, max gap " + fmt(worst) +
              (skipped ? ", " + std::to_string(skipped) + " steps after a deletion skipped" : "");
  return v;
}

Verdict criterion2() {
  Verdict v;
  double knot_err = 0.0, solve_err = 0.0, cov_err = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int n = 40, p = 12;
    const double sigma = 0.5 + 0.1 * static_cast<double>(seed);
    const Dataset d = make_data(n, p, {DesignKind::orthogonal, 0.0}, 50 + seed, {3, -2, 1}, sigma);
    const Vector z = d.X().transpose() * d.y();
    std::vector<double> sorted(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) sorted[static_cast<std::size_t>(j)] = std::abs(z(j));
    std::sort(sorted.rbegin(), sorted.rend());

    const LassoPath path = lars_path(d, p);
    if (path.knots.size() != static_cast<std::size_t>(p)) {
      v.require(false, "path length " + std::to_string(path.knots.size()));
      continue;
    }
    for (int k = 0; k < p; ++k) {
      knot_err = std::max(knot_err, std::abs(path.knots[static_cast<std::size_t>(k)].lambda -
                                             sorted[static_cast<std::size_t>(k)]));
    }
    for (double frac : {0.05, 0.3, 0.6, 0.95}) {
      const double lambda = frac * sorted[0];
      const LassoSolution sol = lasso_solve(d, lambda);
      for (int j = 0; j < p; ++j) {
        solve_err = std::max(solve_err, std::abs(sol.beta(j) - oracle::soft_threshold(z(j), lambda)));
      }
    }
    const double s2 = *d.sigma2();
    for (int k = 1; k < p; ++k) {
      const double lk = sorted[static_cast<std::size_t>(k - 1)];
      const double lk1 = sorted[static_cast<std::size_t>(k)];
      const double expected = lk * (lk - lk1) / s2;
      cov_err = std::max(cov_err, std::abs(covariance_test(path, d, k).statistic - expected));
    }
  }
  v.require(knot_err < 1e-8, "knots off by " + fmt(knot_err));
  v.require(solve_err < 1e-8, "soft-threshold mismatch " + fmt(solve_err));
  v.require(cov_err < 1e-8, "T_k closed form mismatch " + fmt(cov_err));
  if (v.pass) {
    v.detail = "max errors knots " + fmt(knot_err) + ", solve " + fmt(solve_err) + ", T_k " + fmt(cov_err);
  }
  return v;
}

Verdict criterion3() {
  Verdict v;
  const double at_loc = std::abs(gumbel_cdf(-std::log(std::numbers::pi)) - std::exp(-1.0));
  v.require(at_loc < 1e-12, "cdf at location off by " + fmt(at_loc));
  double trip = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double p = i / 1001.0;
    trip = std::max(trip, std::abs(gumbel_cdf(gumbel_quantile(p)) - p));
  }
  v.require(trip < 1e-10, "round trip " + fmt(trip));
  auto hp = [](long double m) { return static_cast<double>(2.0L * std::log(m) - std::log(std::log(m))); };
  const double c50 = gumbel_correction(50), c47 = gumbel_correction(47);
  v.require(std::abs(c50 - 6.45999) < 1e-4, "correction(50) = " + fmt(c50));
  v.require(std::abs(c47 - 6.35222) < 1e-4, "correction(47) = " + fmt(c47));
  v.require(std::abs(c50 - hp(50)) < 1e-12 && std::abs(c47 - hp(47)) < 1e-12,
            "correction disagrees with extended precision");
  return v;
}

std::string summary_line(const MonteCarloSummary& m) {
  return m.scenario + ": KS " + fmt(m.ks) + ", reject@0.05 " + fmt(m.rejection_rate_05) +
         ", failures " + std::to_string(m.failures.count) + "/" + std::to_string(m.reps) +
         ", h0 violations " + std::to_string(m.h0_violations);
}

Verdict criterion4() {
  Verdict v;
  const MonteCarloSummary m = run_scenario(preset("fig1-left"), 1);
  v.require(m.ks < 0.08, "KS " + fmt(m.ks) + " >= 0.08");
  v.require(m.rejection_rate_05 >= 0.02 && m.rejection_rate_05 <= 0.09,
            "type-I error " + fmt(m.rejection_rate_05) + " outside [0.02, 0.09]");
  if (v.pass) v.detail = summary_line(m);
  return v;
}

Verdict criterion5() {
  Verdict v;
  std::string all;
  for (const char* name : {"fig1-right", "fig2-left", "fig2-right"}) {
    const MonteCarloSummary m = run_scenario(preset(name), 0);
    v.require(m.ks < 0.12, std::string(name) + " KS " + fmt(m.ks) + " >= 0.12");
    all += (all.empty() ? "" : " | ") + summary_line(m);
  }
  v.detail += (v.detail.empty() ? "" : " :: ") + all;
  return v;
}

Verdict criterion6() {
  Verdict v;
  const MonteCarloSummary orth = run_scenario(preset("cov-null"), 0);
  const double mean = orth.mean_statistic();
  v.require(mean >= 0.75 && mean <= 1.30, "orthogonal mean T_1 " + fmt(mean));
  v.require(orth.rejection_rate_05 <= 0.09, "orthogonal rejection " + fmt(orth.rejection_rate_05));
  v.require(!orth.unreliable, "orthogonal run unreliable");

  Scenario corr = preset("cov-null");
  corr.name = "cov-null-ar1-0.8";
  corr.design = {DesignKind::ar1, 0.8};
  const MonteCarloSummary ar = run_scenario(corr, 0);
  v.require(ar.rejection_rate_05 <= 0.06, "ar1(0.8) rejection " + fmt(ar.rejection_rate_05));
  v.require(!ar.unreliable, "ar1 run unreliable");
  v.detail += (v.detail.empty() ? "" : " :: ") + std::string("mean T_1 ") + fmt(mean) +
              ", orthogonal reject " + fmt(orth.rejection_rate_05) + ", ar1(0.8) reject " +
              fmt(ar.rejection_rate_05);
  return v;
}

Verdict criterion7() {
  Verdict v;
  std::string all;
  for (const char* name : {"fig3-left", "fig3-right"}) {
    const MonteCarloSummary m = run_scenario(preset(name), 0);
    v.require(m.ks < 0.10, std::string(name) + " KS " + fmt(m.ks) + " >= 0.10");
    v.require(m.failures.count < 0.02 * m.reps,
              std::string(name) + " failures " + std::to_string(m.failures.count));
    all += (all.empty() ? "" : " | ") + summary_line(m);
  }
  v.detail += (v.detail.empty() ? "" : " :: ") + all;
  return v;
}

Verdict criterion8() {
  Verdict v;
  int wrong_j = 0;
  double r_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Dataset d = make_data(40, 15, {DesignKind::ar1, 0.3 + 0.01 * seed}, 300 + seed, {1.0});
    const SelectionPath sel = stepwise_path(d, 1);
    const double rss0 = d.y().squaredNorm();
    int best = -1;
    double best_r = -1.0;
    for (int m = 0; m < 15; ++m) {
      const double r = (rss0 - oracle::rss_normal_equations(d.X(), d.y(), {m})) / *d.sigma2();
      if (r > best_r) {
        best_r = r;
        best = m;
      }
    }
    if (sel.steps.empty() || sel.steps[0].j != best) ++wrong_j;
    if (!sel.steps.empty()) r_gap = std::max(r_gap, std::abs(sel.steps[0].r_j - best_r) / std::max(1.0, best_r));
  }
  v.require(wrong_j == 0, std::to_string(wrong_j) + " step-1 selections differ");
  v.require(r_gap < 1e-10, "R_j relative gap " + fmt(r_gap));

  double excess = -INFINITY;
  Rng pick(404, 0);
  for (int i = 0; i < 100; ++i) {
    const int p = 5 + i % 16;
    const Dataset d = make_data(30, p, {DesignKind::ar1, 0.6}, 500 + i, {2, -1, 1});
    const double lmax = (d.X().transpose() * d.y()).cwiseAbs().maxCoeff();
    const double lambda = lmax * (0.01 + 0.98 * pick.uniform());
    const LassoSolution sol = lasso_solve(d, lambda);
    const Vector cd = oracle::cd_lasso(d.X(), d.y(), lambda, Vector::Zero(p));
    excess = std::max(excess, oracle::lasso_objective(d.X(), d.y(), sol.beta, lambda) -
                                  oracle::lasso_objective(d.X(), d.y(), cd, lambda));
  }
  v.require(excess <= 1e-8, "lasso objective exceeds oracle by " + fmt(excess));

  double logit_gap = 0.0, cox_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed, 77);
    const int n = 60;
    Matrix X(n, 1);
    Vector y(n), time(n), status(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = rng.normal();
      y(i) = rng.bernoulli(1.0 / (1.0 + std::exp(-0.8 * X(i, 0)))) ? 1.0 : 0.0;
      const double t = rng.exponential(std::exp(0.5 * X(i, 0)));
      const double c = rng.exponential(0.3);
      time(i) = std::min(t, c);
      status(i) = t <= c ? 1.0 : 0.0;
    }
    const Vector x = X.col(0);
    const BinaryDataset b(X, y, false);
    const auto lg = oracle::zoom_grid_max([&](double c) { return oracle::logistic_loglik_1d(x, y, c); }, -10, 10);
    const FitResult lf = logistic_fit(b, {0});
    logit_gap = std::max({logit_gap, std::abs(lf.coefficients(0) - lg.first), std::abs(lf.loglik - lg.second)});

    const SurvivalDataset s(X, time, status);
    const auto cg = oracle::zoom_grid_max([&](double c) { return oracle::cox_loglik_1d(x, time, status, c); }, -10, 10);
    const FitResult cf = cox_fit(s, {0});
    cox_gap = std::max({cox_gap, std::abs(cf.coefficients(0) - cg.first), std::abs(cf.loglik - cg.second)});
  }
  v.require(logit_gap < 1e-6, "logistic grid gap " + fmt(logit_gap));
  v.require(cox_gap < 1e-6, "cox grid gap " + fmt(cox_gap));
  if (v.pass) {
    v.detail = "R_j gap " + fmt(r_gap) + ", lasso excess " + fmt(excess) + ", logistic " + fmt(logit_gap) +
               ", cox " + fmt(cox_gap);
  }
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Verdict criterion9() {
  Verdict v;
  const fs::path root = fs::temp_directory_path() / ("sigtest_accept_" + std::to_string(::getpid()));
  fs::create_directories(root);
  std::vector<std::string> signatures;
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"1", "a"}, {"1", "b"}, {"4", "c"}, {"4", "d"}};
  for (const auto& [threads, tag] : runs) {
    ::setenv("SIGTEST_THREADS", threads.c_str(), 1);
    std::ostringstream out, err;
    const int code = cli::run({"simulate", "fig1-left", "--seed", "17", "--out", (root / tag).string()}, out, err);
    v.require(code == 0, "run " + tag + " exited " + std::to_string(code) + ": " + err.str());
    std::string sig = out.str();
    for (const char* f : {"statistics.csv", "qq.csv", "summary.json"}) sig += '\x1f' + slurp(root / tag / f);
    signatures.push_back(sig);
  }
  ::unsetenv("SIGTEST_THREADS");
  for (std::size_t i = 1; i < signatures.size(); ++i) {
    v.require(signatures[i] == signatures[0], "outputs of run " + runs[i].second + " differ from run a");
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  return v;
}

}  // namespace

int main() {
  report(1, "covariance statistic forms agree", criterion1, 10);
  report(2, "orthogonal closed forms", criterion2, 1);
  report(3, "gumbel utilities", criterion3, 1);
  report(4, "fig1-left null calibration", criterion4, 60);
  report(5, "signal scenarios track the gumbel reference", criterion5, 300);
  report(6, "covariance test calibration", criterion6, 120);
  report(7, "logistic and cox null calibration", criterion7, 600);
  report(8, "oracle equivalences", criterion8, 60);
  report(9, "simulate output is deterministic", criterion9, 120);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
