#include "qrep/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "qrep/kb.hpp"
#include "qrep/kernels.hpp"
#include "qrep/rng.hpp"
#include "qrep/wls.hpp"

namespace qrep::sim {

namespace {

// Stream lanes under a scenario seed.
constexpr std::uint64_t kLaneCovariates = 0;
constexpr std::uint64_t kLaneResponses = 1;
constexpr std::uint64_t kLaneGridCell = 2;

void validate_scenario(const Scenario& sc) {
  QuantileLevel check_tau(sc.tau);
  if (sc.k < 2) raise(errc::invalid_argument, "scenario needs k >= 2 groups");
  if (sc.n0 < 2) raise(errc::invalid_argument, "scenario needs n0 >= 2 replicates per group");
  if (sc.reps < 1) raise(errc::invalid_argument, "scenario needs at least one replication");
  if (!std::isfinite(sc.beta_true[0]) || !std::isfinite(sc.beta_true[1])) {
    raise(errc::non_finite, "true coefficients must be finite");
  }
  if (!(sc.gamma_shape > 0.0) || !(sc.gamma_scale > 0.0)) {
    raise(errc::invalid_argument, "covariate distribution needs positive shape and scale");
  }
}

struct RepOut {
  std::array<double, 2> se_wls{};
  std::array<double, 2> se_kb{};
  bool wls_fail = false;
  bool kb_fail = false;
};

// Kahan-Neumaier compensated accumulator; reductions run in replication
// order so totals never depend on the worker count.
struct Neumaier {
  double s = 0.0, c = 0.0;
  void add(double v) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  double total() const { return s + c; }
};

RepOut run_one(const Scenario& sc, const std::vector<double>& xs_fixed, std::uint64_t rep) {
  RepOut out;
  const std::vector<double> xs =
      sc.redraw_covariates ? draw_covariates(sc, rep) : xs_fixed;
  ReplicatedDesign design = draw_responses(sc, xs, rep);
  QuantileLevel tau(sc.tau);

  PipelineOptions opt = sc.pipeline;
  opt.strict_sparsity = true;  // degenerate groups count as estimator failure
  try {
    QuantileFit fit = wls::wls_pipeline(design, tau, opt);
    for (int j = 0; j < 2; ++j) {
      const double e = fit.beta(j) - sc.beta_true[static_cast<std::size_t>(j)];
      out.se_wls[static_cast<std::size_t>(j)] = e * e;
    }
  } catch (const error&) {
    out.wls_fail = true;
  }
  try {
    QuantileFit fit = kb::kb_fit(kb::flatten(design, tau));
    for (int j = 0; j < 2; ++j) {
      const double e = fit.beta(j) - sc.beta_true[static_cast<std::size_t>(j)];
      out.se_kb[static_cast<std::size_t>(j)] = e * e;
    }
  } catch (const error&) {
    out.kb_fail = true;
  }
  return out;
}

}  // namespace

std::vector<double> draw_covariates(int k, double shape, double scale, rng::SeqStream& g) {
  std::vector<double> xs(static_cast<std::size_t>(k));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (auto& x : xs) x = rng::gamma_sample(g, shape, scale);
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    bool ok = sorted.front() > 1e-12;
    for (std::size_t i = 1; ok && i < sorted.size(); ++i) {
      if (sorted[i] == sorted[i - 1]) ok = false;
    }
    if (ok) return xs;
  }
  raise(errc::degenerate_covariate, "could not draw distinct positive covariates");
}

std::vector<double> draw_covariates(const Scenario& sc, std::uint64_t rep) {
  const std::uint64_t sub = sc.redraw_covariates ? rep + 1 : 0;
  rng::SeqStream g(rng::Stream(rng::derive_key(sc.seed, kLaneCovariates, sub)));
  return draw_covariates(sc.k, sc.gamma_shape, sc.gamma_scale, g);
}

ReplicatedDesign draw_responses(const Scenario& sc, const std::vector<double>& xs,
                                std::uint64_t rep) {
  const auto k = static_cast<Eigen::Index>(xs.size());
  const double ztau = kernels::normal_icdf(sc.tau);
  rng::Stream resp(rng::derive_key(sc.seed, kLaneResponses, rep));

  ReplicatedDesign d;
  d.x.resize(k, 2);
  d.responses.resize(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    const double xi = xs[static_cast<std::size_t>(i)];
    const double eta = sc.eta == EtaRule::reciprocal ? 1.0 / xi : 1.0;
    const double mu = sc.beta_true[0] + sc.beta_true[1] * xi - eta * ztau;
    d.x(i, 0) = 1.0;
    d.x(i, 1) = xi;
    auto& g = d.responses[static_cast<std::size_t>(i)];
    g.resize(static_cast<std::size_t>(sc.n0));
    const std::uint64_t base = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(sc.n0);
    for (int j = 0; j < sc.n0; ++j) {
      g[static_cast<std::size_t>(j)] = mu + eta * resp.normal(base + static_cast<std::uint64_t>(j));
    }
  }
  return d;
}

int worker_count() {
  if (const char* env = std::getenv("QREP_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

ScenarioResult run_scenario(const Scenario& sc) {
  validate_scenario(sc);
  std::vector<double> xs_fixed;
  if (!sc.redraw_covariates) xs_fixed = draw_covariates(sc, 0);

  const auto reps = static_cast<std::size_t>(sc.reps);
  std::vector<RepOut> slots(reps);
  const int workers = std::min<int>(worker_count(), static_cast<int>(reps));

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto body = [&] {
    constexpr std::uint64_t kChunk = 8;
    for (;;) {
      const std::uint64_t lo = next.fetch_add(kChunk);
      if (lo >= reps) return;
      const std::uint64_t hi = std::min<std::uint64_t>(lo + kChunk, reps);
      for (std::uint64_t rep = lo; rep < hi; ++rep) {
        try {
          slots[rep] = run_one(sc, xs_fixed, rep);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    }
  };

  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ScenarioResult res;
  res.scenario = sc;
  Neumaier acc_wls[2], acc_kb[2];
  for (const RepOut& r : slots) {
    if (r.wls_fail) {
      ++res.wls_failures;
    } else {
      acc_wls[0].add(r.se_wls[0]);
      acc_wls[1].add(r.se_wls[1]);
    }
    if (r.kb_fail) {
      ++res.kb_failures;
    } else {
      acc_kb[0].add(r.se_kb[0]);
      acc_kb[1].add(r.se_kb[1]);
    }
  }
  const auto div = [](const Neumaier& a, std::int64_t m) {
    return m > 0 ? a.total() / static_cast<double>(m) : std::nan("");
  };
  res.mse_wls = {div(acc_wls[0], sc.reps - res.wls_failures),
                 div(acc_wls[1], sc.reps - res.wls_failures)};
  res.mse_kb = {div(acc_kb[0], sc.reps - res.kb_failures),
                div(acc_kb[1], sc.reps - res.kb_failures)};
  return res;
}

GridAxes full_grid() {
  return {{0.1, 0.3, 0.5, 0.7, 0.9},
          {5, 10, 30},
          {50, 100, 200, 500},
          {EtaRule::reciprocal, EtaRule::unit}};
}

std::vector<ScenarioResult> run_grid(const GridAxes& axes, const Scenario& base) {
  if (axes.taus.empty() || axes.ks.empty() || axes.n0s.empty() || axes.etas.empty()) {
    raise(errc::invalid_argument, "grid axes must be non-empty");
  }
  std::vector<ScenarioResult> out;
  std::uint64_t cell = 0;
  for (double tau : axes.taus) {
    for (int k : axes.ks) {
      for (int n0 : axes.n0s) {
        for (EtaRule eta : axes.etas) {
          Scenario sc = base;
          sc.tau = tau;
          sc.k = k;
          sc.n0 = n0;
          sc.eta = eta;
          sc.seed = rng::derive_key(base.seed, kLaneGridCell, cell);
          out.push_back(run_scenario(sc));
          ++cell;
        }
      }
    }
  }
  return out;
}

}  // namespace qrep::sim
