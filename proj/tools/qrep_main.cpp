#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qrep/asymptotics.hpp"
#include "qrep/io.hpp"
#include "qrep/kb.hpp"
#include "qrep/quantile.hpp"
#include "qrep/rng.hpp"
#include "qrep/sim.hpp"
#include "qrep/wls.hpp"

namespace {

using qrep::io::Format;

struct OutputTarget {
  std::string path;  // empty: stdout
  void write(const qrep::io::Table& t, Format f) const {
    if (path.empty()) {
      qrep::io::write_table(std::cout, t, f);
      return;
    }
    std::ofstream out(path);
    if (!out) qrep::raise(qrep::errc::parse_error, "cannot open output '" + path + "'");
    qrep::io::write_table(out, t, f);
  }
};

std::string fmt(double v, Format f) { return qrep::io::format_value(v, f); }

std::string fmt_int(std::int64_t v) { return std::to_string(v); }

std::uint64_t effective_seed(std::uint64_t flag_seed) {
  if (const char* env = std::getenv("QREP_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return static_cast<std::uint64_t>(v);
  }
  return flag_seed;
}

qrep::quantile::SparsityMethod parse_sparsity(const std::string& name) {
  if (name == "siddiqui") return qrep::quantile::SparsityMethod::siddiqui_hs;
  if (name == "kernel") return qrep::quantile::SparsityMethod::kernel_plugin;
  qrep::raise(qrep::errc::invalid_argument,
              "unknown sparsity method '" + name + "' (siddiqui, kernel)");
}

void check_taus(const std::vector<double>& taus) {
  for (double t : taus) qrep::QuantileLevel check(t);
}

// ---- fit ----------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string x_col = "year";
  std::string y_col = "wind";
  std::vector<double> taus;
  std::string method = "both";
  std::string sparsity = "siddiqui";
  double alpha = 0.05;
  std::string plot_path;
};

qrep::ReplicatedDesign load_design(const qrep::io::ParsedTable& t, const std::string& x_col,
                                   const std::string& y_col) {
  const Eigen::Index xc = qrep::io::resolve_column(t, x_col, "x");
  const Eigen::Index yc = qrep::io::resolve_column(t, y_col, "y");
  if (xc == yc) qrep::raise(qrep::errc::invalid_argument, "x and y columns coincide");
  std::vector<qrep::Observation> rows;
  rows.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    qrep::Observation o;
    o.x = {1.0, r[static_cast<std::size_t>(xc)]};
    o.y = r[static_cast<std::size_t>(yc)];
    rows.push_back(std::move(o));
  }
  return qrep::group_by_covariates(rows);
}

int cmd_fit(const FitArgs& a, const OutputTarget& out, Format f) {
  std::vector<double> taus = a.taus.empty() ? std::vector<double>{0.5} : a.taus;
  check_taus(taus);
  if (a.method != "wls" && a.method != "kb" && a.method != "both") {
    qrep::raise(qrep::errc::invalid_argument,
                "unknown method '" + a.method + "' (wls, kb, both)");
  }
  auto table = qrep::io::read_delimited_file(a.input);
  auto design = load_design(table, a.x_col, a.y_col);

  qrep::PipelineOptions opt;
  opt.sparsity = parse_sparsity(a.sparsity);
  opt.alpha = a.alpha;

  qrep::io::Table result;
  result.columns = {"tau", "method", "beta0", "beta1", "se0", "se1", "k", "n"};
  struct Line {
    double tau;
    std::string method;
    Eigen::VectorXd beta;
  };
  std::vector<Line> lines;
  for (double tau : taus) {
    qrep::QuantileLevel lvl(tau);
    std::vector<std::pair<std::string, qrep::QuantileFit>> fits;
    if (a.method == "wls" || a.method == "both") {
      fits.emplace_back("wls", qrep::wls::wls_pipeline(design, lvl, opt));
    }
    if (a.method == "kb" || a.method == "both") {
      qrep::QuantileFit fit;
      try {
        fit = qrep::kb::kb_pipeline(design, lvl, opt);
      } catch (const qrep::error& e) {
        if (e.kind() != qrep::errc::no_replicates) throw;
        // point estimate still defined without replicates; no standard errors
        fit = qrep::kb::kb_fit(qrep::kb::flatten(design, lvl));
      }
      fits.emplace_back("kb", std::move(fit));
    }
    for (auto& [name, fit] : fits) {
      const double se0 = fit.std_errors.size() > 0 ? fit.std_errors(0) : std::nan("");
      const double se1 = fit.std_errors.size() > 1 ? fit.std_errors(1) : std::nan("");
      result.rows.push_back({fmt(tau, f), name, fmt(fit.beta(0), f), fmt(fit.beta(1), f),
                             fmt(se0, f), fmt(se1, f), fmt_int(design.groups()),
                             fmt_int(design.total_obs())});
      lines.push_back({tau, name, fit.beta});
    }
  }
  out.write(result, f);

  if (!a.plot_path.empty()) {
    std::ofstream plot(a.plot_path);
    if (!plot) {
      qrep::raise(qrep::errc::parse_error, "cannot open output '" + a.plot_path + "'");
    }
    qrep::io::Table p;
    p.columns = {"kind", "tau", "method", "x", "y"};
    const Eigen::Index xc = qrep::io::resolve_column(table, a.x_col, "x");
    const Eigen::Index yc = qrep::io::resolve_column(table, a.y_col, "y");
    double xmin = 0.0, xmax = 0.0;
    bool first = true;
    for (const auto& r : table.rows) {
      const double x = r[static_cast<std::size_t>(xc)];
      xmin = first ? x : std::min(xmin, x);
      xmax = first ? x : std::max(xmax, x);
      first = false;
      p.rows.push_back({"point", "", "", fmt(x, Format::csv),
                        fmt(r[static_cast<std::size_t>(yc)], Format::csv)});
    }
    for (const auto& ln : lines) {
      for (double x : {xmin, xmax}) {
        const double y = ln.beta(0) + ln.beta(1) * x;
        p.rows.push_back({"line", fmt(ln.tau, Format::csv), ln.method, fmt(x, Format::csv),
                          fmt(y, Format::csv)});
      }
    }
    qrep::io::write_table(plot, p, Format::csv);
  }
  return 0;
}

// ---- simulate -----------------------------------------------------------

struct SimArgs {
  bool full_grid_flag = false;
  std::vector<double> taus;
  std::vector<int> ks;
  std::vector<int> n0s;
  std::string eta = "reciprocal";
  std::int64_t reps = 1000;
  std::uint64_t seed = 0;
  bool redraw = false;
  std::string sparsity = "siddiqui";
  double alpha = 0.05;
};

int cmd_simulate(const SimArgs& a, const OutputTarget& out, Format f) {
  qrep::sim::GridAxes axes;
  if (a.full_grid_flag) {
    axes = qrep::sim::full_grid();
  } else {
    axes.taus = a.taus.empty() ? std::vector<double>{0.5} : a.taus;
    axes.ks = a.ks.empty() ? std::vector<int>{5} : a.ks;
    axes.n0s = a.n0s.empty() ? std::vector<int>{200} : a.n0s;
    if (a.eta == "reciprocal") {
      axes.etas = {qrep::sim::EtaRule::reciprocal};
    } else if (a.eta == "unit") {
      axes.etas = {qrep::sim::EtaRule::unit};
    } else if (a.eta == "both") {
      axes.etas = {qrep::sim::EtaRule::reciprocal, qrep::sim::EtaRule::unit};
    } else {
      qrep::raise(qrep::errc::invalid_argument,
                  "unknown eta rule '" + a.eta + "' (reciprocal, unit, both)");
    }
  }
  check_taus(axes.taus);
  if (a.reps < 1) qrep::raise(qrep::errc::invalid_argument, "--reps must be at least 1");

  qrep::sim::Scenario base;
  base.reps = a.reps;
  base.seed = effective_seed(a.seed);
  base.redraw_covariates = a.redraw;
  base.pipeline.sparsity = parse_sparsity(a.sparsity);
  base.pipeline.alpha = a.alpha;

  const auto results = qrep::sim::run_grid(axes, base);

  qrep::io::Table t;
  t.columns = {"tau", "k", "n0", "eta", "estimator", "coef", "mse", "failures"};
  for (const auto& r : results) {
    const char* eta = r.scenario.eta == qrep::sim::EtaRule::reciprocal ? "reciprocal" : "unit";
    const struct {
      const char* name;
      const std::array<double, 2>& mse;
      std::int64_t failures;
    } rows[2] = {{"wls", r.mse_wls, r.wls_failures}, {"kb", r.mse_kb, r.kb_failures}};
    for (const auto& est : rows) {
      for (int c = 0; c < 2; ++c) {
        t.rows.push_back({fmt(r.scenario.tau, f), fmt_int(r.scenario.k), fmt_int(r.scenario.n0),
                          eta, est.name, c == 0 ? "beta0" : "beta1",
                          fmt(est.mse[static_cast<std::size_t>(c)], f), fmt_int(est.failures)});
      }
    }
  }
  out.write(t, f);
  return 0;
}

// ---- asymptotics --------------------------------------------------------

struct AsymArgs {
  std::string input;
  bool design_mode = false;
  double tau = 0.5;
  std::string sparsity = "siddiqui";
  double alpha = 0.05;
  std::string x_col = "year";
  std::string y_col = "wind";
};

void emit_matrix(qrep::io::Table& t, const char* name, const Eigen::MatrixXd& m, Format f) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      t.rows.push_back({name, fmt_int(i), fmt_int(j), fmt(m(i, j), f)});
    }
  }
}

int cmd_asymptotics(const AsymArgs& a, const OutputTarget& out, Format f) {
  qrep::QuantileLevel tau(a.tau);
  Eigen::MatrixXd x;
  std::vector<std::int64_t> sizes;
  std::vector<double> dens;

  auto table = qrep::io::read_delimited_file(a.input);
  if (a.design_mode) {
    const Eigen::Index xc = qrep::io::resolve_column(table, "x", "x");
    const Eigen::Index nc = qrep::io::resolve_column(table, "n", "n");
    const Eigen::Index fc = qrep::io::resolve_column(table, "f", "f");
    x.resize(static_cast<Eigen::Index>(table.rows.size()), 2);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      x(static_cast<Eigen::Index>(i), 0) = 1.0;
      x(static_cast<Eigen::Index>(i), 1) = table.rows[i][static_cast<std::size_t>(xc)];
      const double n = table.rows[i][static_cast<std::size_t>(nc)];
      if (!(n >= 1.0) || n != std::floor(n)) {
        qrep::raise(qrep::errc::invalid_argument,
                    "row " + std::to_string(i + 1) + ": group size must be a positive integer");
      }
      sizes.push_back(static_cast<std::int64_t>(n));
      dens.push_back(table.rows[i][static_cast<std::size_t>(fc)]);
    }
  } else {
    auto design = load_design(table, a.x_col, a.y_col);
    qrep::validate_design(design, true);
    auto s = qrep::quantile::estimate_sparsity(design, tau, parse_sparsity(a.sparsity), a.alpha);
    x = design.x;
    sizes = design.group_sizes();
    for (Eigen::Index i = 0; i < s.s_hat.size(); ++i) dens.push_back(1.0 / s.s_hat(i));
  }

  const auto rep = qrep::asym::make_report(x, sizes, dens, tau);
  qrep::io::Table t;
  t.columns = {"quantity", "row", "col", "value"};
  emit_matrix(t, "d0", rep.moment.d0, f);
  emit_matrix(t, "d1", rep.moment.d1, f);
  emit_matrix(t, "d2", rep.moment.d2, f);
  emit_matrix(t, "cov_kb", rep.cov_kb, f);
  emit_matrix(t, "cov_wls", rep.cov_wls, f);
  t.rows.push_back({"loewner_gap_min_eig", "", "", fmt(rep.loewner_gap_min_eig, f)});
  t.rows.push_back({"equal_sparsity", "", "", rep.equal_sparsity ? "1" : "0"});
  t.rows.push_back({"n", "", "", fmt_int(rep.moment.n)});
  out.write(t, f);
  return 0;
}

// ---- synth --------------------------------------------------------------

struct SynthArgs {
  std::uint64_t seed = 0;
};

// Cyclone-style sample: 26 yearly groups, 2097 rows, exponential upper tail
// whose scale grows with the year so high quantile slopes are positive.
int cmd_synth(const SynthArgs& a, const OutputTarget& out) {
  qrep::rng::Stream s(qrep::rng::derive_key(effective_seed(a.seed), 7, 0));
  qrep::io::Table t;
  t.columns = {"year", "wind"};
  std::uint64_t row = 0;
  for (int year = 1981; year <= 2006; ++year) {
    const int count = year <= 1997 ? 81 : 80;
    const double scale = 8.0 + 0.25 * (year - 1980);
    for (int j = 0; j < count; ++j, ++row) {
      const double e = -std::log(s.uniform(row));
      const double wind = 25.0 + scale * e;
      t.rows.push_back({std::to_string(year), fmt(wind, Format::csv)});
    }
  }
  out.write(t, Format::csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantile regression for replicated designs: weighted and check-loss fits"};
  app.require_subcommand(1);
  app.fallthrough();  // --format/--out may follow the subcommand

  std::string format_name = "csv";
  OutputTarget out;
  app.add_option("--format", format_name, "Output format: csv, tsv, markdown")
      ->capture_default_str();
  app.add_option("--out", out.path, "Output path (default: stdout)");

  FitArgs fit;
  auto* cfit = app.add_subcommand("fit", "Fit replicated data from a delimited file");
  cfit->add_option("input", fit.input, "Input data file")->required();
  cfit->add_option("--tau", fit.taus, "Quantile level (repeatable; default 0.5)");
  cfit->add_option("--method", fit.method, "wls, kb, or both")->capture_default_str();
  cfit->add_option("--sparsity", fit.sparsity, "siddiqui or kernel")->capture_default_str();
  cfit->add_option("--alpha", fit.alpha, "Bandwidth level")->capture_default_str();
  cfit->add_option("--x-col", fit.x_col, "Covariate column (name or index)")
      ->capture_default_str();
  cfit->add_option("--y-col", fit.y_col, "Response column (name or index)")
      ->capture_default_str();
  cfit->add_option("--plot-data", fit.plot_path, "Also write scatter/fit-line rows to this csv");

  SimArgs sim;
  auto* csim = app.add_subcommand("simulate", "Monte Carlo comparison of the two estimators");
  csim->add_flag("--full-grid", sim.full_grid_flag,
                 "Full study grid: 5 levels x {5,10,30} groups x {50,100,200,500} sizes x both scale rules");
  csim->add_option("--tau", sim.taus, "Quantile level axis (repeatable; default 0.5)");
  csim->add_option("--k", sim.ks, "Group count axis (repeatable; default 5)");
  csim->add_option("--n0", sim.n0s, "Replicates-per-group axis (repeatable; default 200)");
  csim->add_option("--eta", sim.eta, "Group scale rule: reciprocal, unit, both")
      ->capture_default_str();
  csim->add_option("--reps", sim.reps, "Replications per scenario")->capture_default_str();
  csim->add_option("--seed", sim.seed, "Base seed (QREP_SEED overrides)")->capture_default_str();
  csim->add_flag("--redraw-covariates", sim.redraw,
                 "Redraw covariates every replication instead of once per scenario");
  csim->add_option("--sparsity", sim.sparsity, "siddiqui or kernel")->capture_default_str();
  csim->add_option("--alpha", sim.alpha, "Bandwidth level")->capture_default_str();

  AsymArgs asym;
  auto* casym = app.add_subcommand("asymptotics", "Moment matrices and covariance comparison");
  casym->add_option("input", asym.input, "Data file, or design file with --design")->required();
  casym->add_flag("--design", asym.design_mode,
                  "Input columns x,n,f supply the design and densities directly");
  casym->add_option("--tau", asym.tau, "Quantile level")->capture_default_str();
  casym->add_option("--sparsity", asym.sparsity, "siddiqui or kernel")->capture_default_str();
  casym->add_option("--alpha", asym.alpha, "Bandwidth level")->capture_default_str();
  casym->add_option("--x-col", asym.x_col, "Covariate column")->capture_default_str();
  casym->add_option("--y-col", asym.y_col, "Response column")->capture_default_str();

  SynthArgs synth;
  auto* csynth = app.add_subcommand("synth", "Write a cyclone-style synthetic dataset");
  csynth->add_option("--seed", synth.seed, "Seed (QREP_SEED overrides)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    const Format f = qrep::io::parse_format(format_name);
    if (cfit->parsed()) return cmd_fit(fit, out, f);
    if (csim->parsed()) return cmd_simulate(sim, out, f);
    if (casym->parsed()) return cmd_asymptotics(asym, out, f);
    if (csynth->parsed()) return cmd_synth(synth, out);
  } catch (const qrep::error& e) {
    std::cerr << "qrep: " << e.what() << "\n";
    return qrep::is_validation_error(e.kind()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "qrep: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
