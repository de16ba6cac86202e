#include "sigtest/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "sigtest/error.hpp"

namespace sigtest {

namespace {

constexpr double kTestAlpha = 0.05;

bool covers(const IndexList& A, const IndexList& support) {
  return std::all_of(support.begin(), support.end(), [&](int s) {
    return std::find(A.begin(), A.end(), s) != A.end();
  });
}

TestOutcome gaussian_gumbel(const Scenario& s, const Dataset& data) {
  const SelectionPath sel = select_steps(data, s.selector, s.k);
  if (static_cast<int>(sel.steps.size()) < s.k) {
    throw Error(ErrorKind::path_too_short, "selection stopped before step " + std::to_string(s.k));
  }
  return gumbel_test(sel.steps[static_cast<std::size_t>(s.k - 1)], kTestAlpha);
}

TestOutcome gaussian_covariance(const Scenario& s, const Dataset& data) {
  const LassoPath path = lars_path(data, std::min(s.k + 1, std::min(s.n, s.p)));
  return covariance_test(path, data, s.k, kTestAlpha);
}

TestOutcome glm_gumbel(const Scenario& s, const ModelData& data) {
  if (s.k == 1) return gumbel_test_glm(data, {}, kTestAlpha);
  auto seq = gumbel_glm_sequence(data, s.k, kTestAlpha);
  if (static_cast<int>(seq.size()) < s.k) {
    throw Error(ErrorKind::path_too_short, "selection stopped before step " + std::to_string(s.k));
  }
  return seq[static_cast<std::size_t>(s.k - 1)];
}

}  // namespace

std::string_view to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::orthogonal: return "orthogonal";
    case DesignKind::ar1: return "ar1";
    case DesignKind::iid_gaussian: return "iid_gaussian";
  }
  return "unknown";
}

std::string_view to_string(Reference r) {
  return r == Reference::gumbel ? "gumbel" : "exp1";
}

Reference parse_reference(std::string_view name) {
  if (name == "gumbel") return Reference::gumbel;
  if (name == "exp1") return Reference::exp1;
  throw Error(ErrorKind::invalid_input, "unknown reference '" + std::string(name) + "'");
}

double reference_cdf(Reference ref, double x) {
  if (ref == Reference::gumbel) return gumbel_cdf(x);
  return x <= 0.0 ? 0.0 : -std::expm1(-x);
}

double reference_quantile(Reference ref, double p) {
  if (ref == Reference::gumbel) return gumbel_quantile(p);
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::domain, "quantile level must lie in (0, 1)");
  return -std::log1p(-p);
}

void Scenario::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::invalid_input, what); };
  if (n < 2) fail("scenario n must be at least 2");
  if (p < 1) fail("scenario p must be at least 1");
  if (reps < 1) fail("scenario reps must be at least 1");
  if (k < 1) fail("scenario k must be at least 1");
  if (static_cast<int>(beta.size()) > p) fail("scenario beta has more entries than p");
  if (design.kind == DesignKind::orthogonal && n < p) fail("orthogonal design needs n >= p");
  if (design.kind == DesignKind::ar1 && !(design.rho > -1.0 && design.rho < 1.0)) {
    fail("ar1 rho must lie in (-1, 1)");
  }
  if (!(sigma > 0.0)) fail("scenario sigma must be positive");
  if (!(censor_frac >= 0.0 && censor_frac < 1.0)) fail("censor_frac must lie in [0, 1)");
  if (family != Family::gaussian && test != TestKind::gumbel_glm) {
    fail("logistic and cox scenarios use the gumbel_glm test");
  }
  if (test == TestKind::covariance && selector != Selector::lasso && selector != Selector::max_r) {
    fail("the covariance test follows the lasso path");
  }
  if (p - (k - 1) < 3 && test != TestKind::covariance) {
    fail("step k leaves fewer than 3 candidates for the Gumbel correction");
  }
  if (k > std::min(n, p)) fail("step k exceeds min(n, p)");
}

Vector Scenario::full_beta() const {
  Vector b = Vector::Zero(p);
  for (std::size_t i = 0; i < beta.size(); ++i) b(static_cast<Eigen::Index>(i)) = beta[i];
  return b;
}

IndexList Scenario::support() const {
  IndexList out;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (beta[i] != 0.0) out.push_back(static_cast<int>(i));
  }
  return out;
}

Reference Scenario::reference() const {
  return test == TestKind::covariance ? Reference::exp1 : Reference::gumbel;
}

Scenario preset(std::string_view name) {
  Scenario s;
  s.name = std::string(name);
  const std::vector<double> signal = {6.0, 6.0, 6.0};
  if (name == "fig1-left") {
    s.design = {DesignKind::orthogonal, 0.0};
  } else if (name == "fig1-right") {
    s.design = {DesignKind::orthogonal, 0.0};
    s.beta = signal;
    s.k = 4;
  } else if (name == "fig2-left") {
    s.design = {DesignKind::ar1, 0.2};
    s.beta = signal;
    s.k = 4;
  } else if (name == "fig2-right") {
    s.design = {DesignKind::ar1, 0.8};
    s.beta = signal;
    s.k = 4;
  } else if (name == "fig3-left") {
    s.family = Family::logistic;
    s.design = {DesignKind::iid_gaussian, 0.0};
    s.test = TestKind::gumbel_glm;
  } else if (name == "fig3-right") {
    s.family = Family::cox;
    s.design = {DesignKind::iid_gaussian, 0.0};
    s.test = TestKind::gumbel_glm;
  } else if (name == "cov-null") {
    s.design = {DesignKind::orthogonal, 0.0};
    s.test = TestKind::covariance;
    s.selector = Selector::lasso;
  } else {
    std::string list;
    for (const auto& p : preset_names()) list += (list.empty() ? "" : ", ") + p;
    throw Error(ErrorKind::invalid_input,
                "unknown scenario '" + std::string(name) + "'; presets: " + list);
  }
  return s;
}

std::vector<std::string> preset_names() {
  return {"fig1-left", "fig1-right", "fig2-left", "fig2-right",
          "fig3-left", "fig3-right", "cov-null"};
}

double MonteCarloSummary::mean_statistic() const {
  if (statistics.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(statistics.begin(), statistics.end(), 0.0) /
         static_cast<double>(statistics.size());
}

Matrix gen_design(const DesignSpec& design, int n, int p, Rng& rng) {
  Matrix G(n, p);
  if (design.kind == DesignKind::orthogonal) {
    if (n < p) throw Error(ErrorKind::infeasible, "orthogonal design needs n >= p");
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) G(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Matrix> qr(G);
    return qr.householderQ() * Matrix::Identity(n, p);
  }
  const double rho = design.kind == DesignKind::ar1 ? design.rho : 0.0;
  const double innovation = std::sqrt(1.0 - rho * rho);
  for (int i = 0; i < n; ++i) {
    double prev = 0.0;
    for (int j = 0; j < p; ++j) {
      const double z = rng.normal();
      prev = j == 0 ? z : rho * prev + innovation * z;
      G(i, j) = prev;
    }
  }
  return standardize(G, false);
}

ModelData gen_response(const Scenario& s, const Matrix& X, Rng& rng) {
  const Vector eta = X * s.full_beta();
  const Eigen::Index n = X.rows();
  switch (s.family) {
    case Family::gaussian: {
      Vector y(n);
      for (Eigen::Index i = 0; i < n; ++i) y(i) = eta(i) + s.sigma * rng.normal();
      return Dataset(X, std::move(y), s.sigma * s.sigma);
    }
    case Family::logistic: {
      Vector y(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = rng.bernoulli(1.0 / (1.0 + std::exp(-eta(i)))) ? 1.0 : 0.0;
      }
      return BinaryDataset(X, std::move(y), true);
    }
    case Family::cox: {
      const double censor_rate = s.censor_frac / (1.0 - s.censor_frac);
      Vector time(n);
      Vector status(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double event = rng.exponential(std::exp(eta(i)));
        const double censor = censor_rate > 0.0 ? rng.exponential(censor_rate)
                                                : std::numeric_limits<double>::infinity();
        time(i) = std::min(event, censor);
        status(i) = event <= censor ? 1.0 : 0.0;
      }
      return SurvivalDataset(X, std::move(time), std::move(status));
    }
  }
  throw Error(ErrorKind::invalid_input, "unknown family");
}

Replication run_replication(const Scenario& s, int r) {
  Replication rep;
  Rng rng(s.seed, static_cast<std::uint64_t>(r));
  try {
    const Matrix X = gen_design(s.design, s.n, s.p, rng);
    const ModelData data = gen_response(s, X, rng);
    if (s.family == Family::gaussian && s.test != TestKind::gumbel_glm) {
      const auto& d = std::get<Dataset>(data);
      rep.outcome = s.test == TestKind::covariance ? gaussian_covariance(s, d) : gaussian_gumbel(s, d);
    } else {
      rep.outcome = glm_gumbel(s, data);
    }
    rep.h0_violation = !covers(rep.outcome->A, s.support());
  } catch (const Error& e) {
    rep.outcome.reset();
    rep.failure = std::string(to_string(e.kind()));
  }
  return rep;
}

MonteCarloSummary run_scenario(const Scenario& s, int threads) {
  s.validate();
  std::vector<Replication> reps(static_cast<std::size_t>(s.reps));
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(s.reps));
  if (workers <= 1) {
    for (int r = 0; r < s.reps; ++r) reps[static_cast<std::size_t>(r)] = run_replication(s, r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r = next++; r < s.reps; r = next++) {
          reps[static_cast<std::size_t>(r)] = run_replication(s, r);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  MonteCarloSummary summary;
  summary.scenario = s.name;
  summary.reps = s.reps;
  summary.reference = s.reference();
  int rejections = 0;
  for (const auto& rep : reps) {
    if (!rep.outcome) {
      ++summary.failures.count;
      ++summary.failures.reasons[rep.failure];
      continue;
    }
    summary.statistics.push_back(rep.outcome->statistic);
    summary.p_values.push_back(rep.outcome->p_value);
    if (rep.outcome->p_value <= kTestAlpha) ++rejections;
    if (rep.h0_violation) ++summary.h0_violations;
  }
  if (!summary.statistics.empty()) {
    summary.qq = qq_points(summary.statistics, summary.reference);
    summary.ks = ks_distance(summary.statistics, summary.reference);
    summary.rejection_rate_05 =
        static_cast<double>(rejections) / static_cast<double>(summary.statistics.size());
  }
  summary.unreliable = summary.statistics.empty() ||
                       static_cast<double>(summary.failures.count) > 0.05 * s.reps;
  return summary;
}

std::vector<std::pair<double, double>> qq_points(std::span<const double> statistics,
                                                 Reference ref) {
  std::vector<double> sorted(statistics.begin(), statistics.end());
  std::sort(sorted.begin(), sorted.end());
  const double N = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double pos = (static_cast<double>(i) + 0.5) / N;
    out.emplace_back(reference_quantile(ref, pos), sorted[i]);
  }
  return out;
}

double ks_distance(std::span<const double> statistics, Reference ref) {
  std::vector<double> sorted(statistics.begin(), statistics.end());
  std::sort(sorted.begin(), sorted.end());
  const double N = static_cast<double>(sorted.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double F = reference_cdf(ref, sorted[i]);
    const double hi = static_cast<double>(i + 1) / N;
    const double lo = static_cast<double>(i) / N;
    sup = std::max({sup, std::abs(hi - F), std::abs(lo - F)});
  }
  return std::min(1.0, sup);
}

}  // namespace sigtest
