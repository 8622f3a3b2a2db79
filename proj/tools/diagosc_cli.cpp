// diagosc: experiment runner for diagonalizable phase-oscillator systems.
//
//   diagosc <subcommand> [--config PATH] [--seed INT] [--out PATH] [--threads INT]
//                        [--n INT] [--epsilon X] [--sigma X] [--trials INT] [--t-end X]
//   diagosc --schema-check FILE
//
// Exit status: 0 success, 1 invalid configuration, 2 numerical failure,
// 3 verification failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "diagosc/diagosc.hpp"
#include "diagosc/random_basis.hpp"
#include "schema.hpp"

namespace {

using namespace diagosc;
using cli::ConfigError;
using cli::ConfigReader;
using cli::join_header;
using json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kInvalidConfig = 1, kNumericalFailure = 2, kVerificationFailure = 3 };

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

json to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json to_json(const CoherenceClass& c) {
  json pairs = json::array();
  for (const auto& [i, j] : c.locked_pairs) pairs.push_back({i, j});
  return {{"tag", to_string(c.tag)}, {"locked_pairs", pairs}};
}

/// Destination for one output: a file when a path is set, otherwise stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) : path_(path) {
    if (!path_.empty()) {
      file_.open(path_, std::ios::binary | std::ios::trunc);
      if (!file_) throw ConfigError("cannot write '" + path_ + "'");
    }
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }
  void finish() {
    stream().flush();
    if (!stream()) throw std::runtime_error("write failed for '" + (path_.empty() ? "stdout" : path_) + "'");
  }

 private:
  std::string path_;
  std::ofstream file_;
};

void write_json(const std::string& path, const json& doc) {
  Sink sink(path);
  sink.stream() << doc.dump(2) << '\n';
  sink.finish();
}

std::string sibling(const std::string& out, const std::string& suffix) {
  return out.empty() ? std::string() : out + suffix;
}

FrequencyDistribution read_distribution(const ConfigReader& cfg) {
  const std::string kind = cfg.text("distribution", "gaussian");
  const double mean = cfg.real("mean", 0.0);
  const double sigma = cfg.positive("sigma", 1.0);
  if (kind == "gaussian") return FrequencyDistribution::gaussian(mean, sigma * sigma);
  if (kind == "uniform") return FrequencyDistribution::uniform(mean, sigma * sigma);
  if (kind == "two_point") return FrequencyDistribution::two_point(mean, sigma * sigma);
  throw ConfigError("distribution must be gaussian, uniform or two_point (got '" + kind + "')");
}

PeriodicFunction read_mode(const ConfigReader& cfg) {
  try {
    return parse_mode_function(cfg.text("mode", "sin"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("mode: ") + e.what());
  }
}

/// "fourier", "random" (seeded orthonormal complement) or a basis CSV path.
BasisMatrix read_basis(const ConfigReader& cfg, int n, std::uint64_t seed,
                       const std::string& fallback) {
  const std::string spec = cfg.text("basis", fallback);
  if (spec == "fourier") return build_fourier_basis(n);
  if (spec == "random") return random_orthonormal_complement(n, derive_seed(seed, "basis"));
  std::ifstream in(spec);
  if (!in) throw ConfigError("basis must be fourier, random or a readable CSV file (got '" + spec + "')");
  try {
    return read_basis_csv(in);
  } catch (const std::exception& e) {
    throw ConfigError("basis file '" + spec + "': " + e.what());
  }
}

struct Grid {
  double lo, step;
  long count;
  double at(long i) const { return lo + step * static_cast<double>(i); }
};

Grid read_grid(const ConfigReader& cfg, const std::string& prefix, double lo, double hi,
               double step) {
  const double a = cfg.real(prefix + "_min", lo);
  const double b = cfg.real(prefix + "_max", hi);
  const double h = cfg.positive(prefix + "_step", step);
  if (!(b >= a)) throw ConfigError(prefix + "_max must be >= " + prefix + "_min");
  const double count = std::floor((b - a) / h + 1e-9) + 1.0;
  if (count > 1e7) throw ConfigError(prefix + " grid has more than 1e7 points");
  return {a, h, static_cast<long>(count)};
}

// ---------------------------------------------------------------- mode-curve

int cmd_mode_curve(const ConfigReader& cfg) {
  const double eps = cfg.nonnegative("epsilon", 1.0);
  const PeriodicFunction p = read_mode(cfg);
  const Grid grid = read_grid(cfg, "a", -3.0, 3.0, 0.01);
  Sink sink(cfg.text("out", ""));
  auto& out = sink.stream();
  out << cli::schema_line("diagosc.mode-curve") << '\n' << "a,mu\n";
  for (long i = 0; i < grid.count; ++i) {
    const double a = grid.at(i);
    out << num(a) << ',' << num(mode_frequency(p, a, eps).mu) << '\n';
  }
  sink.finish();
  return kOk;
}

// ------------------------------------------------------------------- density

int cmd_density(const ConfigReader& cfg) {
  const double eps = cfg.positive("epsilon", 1.0);
  const Grid grid = read_grid(cfg, "mu", -4.0, 4.0, 0.01);
  const long samples = cfg.integer("samples", 1'000'000, 0);
  const long bins = cfg.integer("bins", 80, 1, 100000);
  const int threads = static_cast<int>(cfg.integer("threads", 1, 1, 1024));
  const std::uint64_t seed = derive_seed(cfg.seed("seed", 1), "density");
  const std::string out_path = cfg.text("out", "");
  const FrequencyDensity g = gaussian_output_density(eps);
  const PeriodicFunction p = sine_mode();

  {
    Sink sink(out_path);
    auto& out = sink.stream();
    out << cli::schema_line("diagosc.density") << '\n' << "mu,g\n";
    for (long i = 0; i < grid.count; ++i) {
      const double mu = grid.at(i);
      out << num(mu) << ',' << num(g.continuous(mu)) << '\n';
    }
    sink.finish();
  }
  if (out_path.empty()) return kOk;

  // Monte Carlo: a ~ N(0, 1), mu = mu_sin(a, eps) by quadrature. Block b of
  // kBlock samples draws from stream b, so results do not depend on threads.
  constexpr long kBlock = 1 << 16;
  const double hist_lo = grid.lo;
  const double hist_hi = grid.at(grid.count - 1);
  const double width = (hist_hi - hist_lo) / static_cast<double>(bins);
  const long blocks = (samples + kBlock - 1) / kBlock;
  std::vector<std::vector<long>> counts(static_cast<std::size_t>(blocks),
                                        std::vector<long>(static_cast<std::size_t>(bins), 0));
  std::vector<long> atoms(static_cast<std::size_t>(blocks), 0);
  parallel_chunks(blocks, threads, [&](long begin, long end, int) {
    for (long b = begin; b < end; ++b) {
      CounterRng rng(seed, static_cast<std::uint64_t>(b));
      const long stop = std::min(samples, (b + 1) * kBlock);
      auto& hist = counts[static_cast<std::size_t>(b)];
      for (long s = b * kBlock; s < stop; ++s) {
        const ModeFrequencyResult r = mode_frequency(p, rng.normal(), eps);
        if (r.locked) {
          ++atoms[static_cast<std::size_t>(b)];
          continue;
        }
        if (width > 0.0 && r.mu >= hist_lo && r.mu < hist_hi) {
          const auto k = std::min(bins - 1, static_cast<long>((r.mu - hist_lo) / width));
          ++hist[static_cast<std::size_t>(k)];
        }
      }
    }
  });
  long atom_count = 0;
  std::vector<long> hist(static_cast<std::size_t>(bins), 0);
  for (long b = 0; b < blocks; ++b) {
    atom_count += atoms[static_cast<std::size_t>(b)];
    for (long k = 0; k < bins; ++k) hist[static_cast<std::size_t>(k)] += counts[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)];
  }

  const double inf = std::numeric_limits<double>::infinity();
  const double continuous = g.continuous_mass(-inf, inf);
  double grid_mass = g.atom_weight;
  for (long i = 0; i + 1 < grid.count; ++i) {
    grid_mass += 0.5 * grid.step * (g.continuous(grid.at(i)) + g.continuous(grid.at(i + 1)));
  }
  const double n = static_cast<double>(samples);
  {
    Sink sink(sibling(out_path, ".atom.csv"));
    auto& out = sink.stream();
    out << cli::schema_line("diagosc.density-atom") << '\n'
        << join_header(cli::csv_schemas().at("diagosc.density-atom")) << '\n';
    const double frac = samples ? static_cast<double>(atom_count) / n : std::nan("");
    const double se = samples ? std::sqrt(g.atom_weight * (1.0 - g.atom_weight) / n) : std::nan("");
    out << num(eps) << ',' << num(g.atom_weight) << ',' << num(continuous) << ','
        << num(g.atom_weight + continuous) << ',' << num(grid_mass) << ',' << samples << ','
        << num(frac) << ',' << num(se) << '\n';
    sink.finish();
  }
  {
    Sink sink(sibling(out_path, ".hist.csv"));
    auto& out = sink.stream();
    out << cli::schema_line("diagosc.density-hist") << '\n'
        << join_header(cli::csv_schemas().at("diagosc.density-hist")) << '\n';
    for (long k = 0; k < bins; ++k) {
      const double lo = hist_lo + width * static_cast<double>(k);
      const double hi = k + 1 == bins ? hist_hi : lo + width;
      const double expected = n * g.continuous_mass(lo, hi);
      const double observed = static_cast<double>(hist[static_cast<std::size_t>(k)]);
      const double mc_density = samples && hi > lo ? observed / (n * (hi - lo)) : std::nan("");
      const double analytic = hi > lo ? expected / (n * (hi - lo)) : std::nan("");
      out << num(lo) << ',' << num(hi) << ',' << hist[static_cast<std::size_t>(k)] << ','
          << num(expected) << ',' << num(mc_density) << ',' << num(samples ? analytic : g.continuous(0.5 * (lo + hi))) << '\n';
    }
    sink.finish();
  }
  return kOk;
}

// ------------------------------------------------------------------- qc-scan

int cmd_qc_scan(const ConfigReader& cfg) {
  std::vector<long> sizes = cfg.has("n") ? std::vector<long>{cfg.integer("n", 8, 2)}
                                         : cfg.integer_list("n_list", {4, 8, 16}, 2);
  std::vector<double> eps_grid;
  if (cfg.has("epsilon")) {
    eps_grid = cfg.real_list("epsilon", {});
  } else {
    const double lo = cfg.nonnegative("epsilon_min", 0.0);
    const double hi = cfg.nonnegative("epsilon_max", 4.0);
    const long steps = cfg.integer("epsilon_steps", 41, 1, 1'000'000);
    if (hi < lo) throw ConfigError("epsilon_max must be >= epsilon_min");
    for (long i = 0; i < steps; ++i) {
      eps_grid.push_back(steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1));
    }
  }
  for (double e : eps_grid) {
    if (!(e >= 0.0)) throw ConfigError("epsilon values must be >= 0");
  }
  const FrequencyDistribution dist = read_distribution(cfg);
  const PeriodicFunction mode = read_mode(cfg);
  const long trials = cfg.integer("trials", 10000, 0);
  const double confidence = cfg.real("confidence", 0.99);
  if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigError("confidence must be in (0, 1)");
  const double q = cfg.real("q", 0.5);
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("q must be in (0, 1)");
  const int threads = static_cast<int>(cfg.integer("threads", 1, 1, 1024));
  const std::uint64_t seed = cfg.seed("seed", 1);
  const std::string out_path = cfg.text("out", "");
  constexpr long kMaxMonteCarloN = 4096;
  for (long n : sizes) {
    if (trials > 0 && n > kMaxMonteCarloN) {
      throw ConfigError("Monte Carlo is limited to n <= " + std::to_string(kMaxMonteCarloN) +
                        "; set trials = 0 for the approximation only");
    }
    if (n > std::numeric_limits<int>::max()) throw ConfigError("n is too large");
  }

  // Per-mode locking probability for the independent-mode approximation.
  const double sigma = dist.sigma();
  const bool unit_range = std::abs(mode.min() + 1.0) < 1e-12 && std::abs(mode.max() - 1.0) < 1e-12;
  auto q_tilde = [&](double eps, long n) {
    if (unit_range) return qc_tilde(eps, sigma, static_cast<int>(n));
    if (eps <= 0.0) return 0.0;
    const double per_mode = stats::normal_cdf(-eps * mode.min() / sigma) - stats::normal_cdf(-eps * mode.max() / sigma);
    return std::pow(per_mode, static_cast<double>(n - 1));
  };

  Sink sink(out_path);
  auto& out = sink.stream();
  out << cli::schema_line("diagosc.qc-scan") << '\n'
      << join_header(cli::csv_schemas().at("diagosc.qc-scan")) << '\n';
  for (long n : sizes) {
    const std::uint64_t child = derive_seed(seed, "qc-scan", static_cast<std::uint64_t>(n));
    std::optional<BasisMatrix> basis;
    if (trials > 0) basis = build_fourier_basis(static_cast<int>(n));
    const ModeBounds bounds = ModeBounds::uniform(mode, static_cast<int>(n - 1));
    for (double eps : eps_grid) {
      double hat = std::nan(""), ci = std::nan("");
      if (basis) {
        const auto est = estimate_coherence_probability(*basis, eps, dist, bounds, trials, child, confidence, threads);
        hat = est.q_c_hat;
        ci = est.ci_halfwidth;
      }
      out << n << ',' << num(eps) << ',' << num(sigma) << ',' << trials << ',' << num(hat) << ','
          << num(ci) << ',' << num(q_tilde(eps, n)) << '\n';
    }
  }
  sink.finish();

  if (!out_path.empty() && unit_range) {
    Sink cross(sibling(out_path, ".crossings.csv"));
    auto& c = cross.stream();
    c << cli::schema_line("diagosc.qc-crossings") << '\n'
      << join_header(cli::csv_schemas().at("diagosc.qc-crossings")) << '\n';
    for (long n : sizes) {
      const TransitionPoint tp = transition_point(q, sigma, static_cast<int>(n));
      c << n << ',' << num(sigma) << ',' << num(q) << ',' << num(tp.epsilon) << ','
        << num(tp.bound) << ',' << num(tp.bound_rederived) << '\n';
    }
    cross.finish();
  }
  return kOk;
}

// ------------------------------------------------------------------ simulate

int cmd_simulate(const ConfigReader& cfg) {
  const std::uint64_t seed = cfg.seed("seed", 1);
  const FrequencyDistribution dist = read_distribution(cfg);
  const PeriodicFunction mode = read_mode(cfg);
  const double eps = cfg.nonnegative("epsilon", 1.0);
  const double t_end = cfg.positive("t_end", 2000.0);
  const double burn_in = cfg.real("burn_in", 0.2);
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw ConfigError("burn_in must be in [0, 1)");
  const double pair_tol = cfg.positive("pair_tol", 1e-3);
  const double sep_t_end = cfg.nonnegative("separation_t_end", 100.0);

  Vector omega;
  if (cfg.has("omega")) {
    const auto values = cfg.real_list("omega", {});
    if (values.size() < 2) throw ConfigError("omega needs at least 2 entries");
    if (cfg.has("n") && cfg.integer("n", 0, 2) != static_cast<long>(values.size())) {
      throw ConfigError("n does not match the length of omega");
    }
    omega = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  } else {
    const int n = static_cast<int>(cfg.integer("n", 4, 2, 4096));
    omega = sample_frequencies(dist, n, derive_seed(seed, "simulate.omega"));
  }
  const int n = static_cast<int>(omega.size());
  Vector theta0(n);
  if (cfg.has("theta0")) {
    const auto values = cfg.real_list("theta0", {});
    if (static_cast<int>(values.size()) != n) throw ConfigError("theta0 must have n entries");
    for (int i = 0; i < n; ++i) theta0(i) = values[static_cast<std::size_t>(i)];
  } else {
    CounterRng rng(derive_seed(seed, "simulate.theta0"), 0);
    for (int i = 0; i < n; ++i) theta0(i) = 2.0 * std::numbers::pi * rng.uniform();
  }
  const DiagonalizableSystem sys = make_system(read_basis(cfg, n, seed, "fourier"), omega, eps, mode);
  if (sys.n() != n) throw ConfigError("basis size does not match n");

  const InstanceReport rep = simulate_instance(sys, theta0, t_end, burn_in, pair_tol);
  json doc;
  doc["schema"] = "diagosc.simulate";
  doc["schema_version"] = cli::kSchemaVersion;
  doc["config"] = {{"n", n},
                   {"epsilon", eps},
                   {"mode", mode.name()},
                   {"distribution", dist.name()},
                   {"sigma", dist.sigma()},
                   {"mean", dist.mean()},
                   {"seed", seed},
                   {"t_end", t_end},
                   {"burn_in", burn_in},
                   {"pair_tol", pair_tol},
                   {"basis", cfg.text("basis", "fourier")}};
  doc["omega"] = to_json(omega);
  doc["theta0"] = to_json(theta0);
  doc["a"] = to_json(rep.analytic.a);
  doc["mu"] = to_json(rep.analytic.mu);
  doc["Omega_analytic"] = to_json(rep.analytic.Omega);
  doc["Omega_empirical"] = to_json(rep.empirical.omega);
  doc["std_error"] = to_json(rep.empirical.std_error);
  doc["window"] = {rep.empirical.window_start, rep.empirical.window_end};
  doc["analytic_class"] = to_json(rep.analytic_class);
  doc["empirical_class"] = to_json(rep.empirical_class);
  doc["marginal"] = rep.marginal;
  doc["max_frequency_error"] = rep.max_frequency_error;
  if (sep_t_end > 0.0) {
    const SeparationReport sep = verify_separation(sys, theta0, sep_t_end);
    doc["separation"] = {{"t_end", sep_t_end},
                         {"max_discrepancy", sep.max_discrepancy},
                         {"max_v_deviation", sep.max_v_deviation},
                         {"samples", sep.samples}};
  }
  const std::string out_path = cfg.text("out", "");
  write_json(out_path, doc);
  if (!out_path.empty()) {
    const Trajectory traj = integrate_system(sys, theta0, t_end, frequency_step_control());
    Sink sink(sibling(out_path, ".trajectory.csv"));
    sink.stream() << cli::schema_line("diagosc.trajectory") << '\n';
    write_trajectory_csv(sink.stream(), traj);
    sink.finish();
  }
  return kOk;
}

// -------------------------------------------------------------------- verify

int cmd_verify(const ConfigReader& cfg) {
  const std::uint64_t seed = cfg.seed("seed", 1);
  const int threads = static_cast<int>(cfg.integer("threads", 1, 1, 1024));
  const int n = static_cast<int>(cfg.integer("n", 8, 2, 4096));
  const double eps = cfg.nonnegative("epsilon", 1.0);
  const FrequencyDistribution dist = read_distribution(cfg);
  const PeriodicFunction mode = read_mode(cfg);
  const long trials = cfg.integer("trials", 10000, 1);
  const auto sizes = cfg.integer_list("trend_sizes", {4, 8, 16, 32, 64}, 2);
  const long trend_trials = cfg.integer("trend_trials", 100000, 1);
  const int clt_n = static_cast<int>(cfg.integer("clt_n", 1000, 2, 8192));
  const long clt_samples = cfg.integer("clt_samples", 10000, 2);
  const double tol = cfg.positive("tolerance", 1e-12);
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (sizes[i] <= sizes[i - 1]) throw ConfigError("trend_sizes must be increasing");
  }
  if (sizes.back() > 4096) throw ConfigError("trend_sizes entries must be <= 4096");

  json checks = json::array();
  bool all_passed = true;
  auto record = [&](const std::string& name, bool passed, json stats) {
    all_passed = all_passed && passed;
    json entry = {{"name", name}, {"passed", passed}};
    entry["statistics"] = std::move(stats);
    checks.push_back(std::move(entry));
  };

  {
    const ValidationReport fr = validate_basis(build_fourier_basis(n), tol);
    record("fourier_basis", fr.valid(),
           {{"n", n},
            {"orthonormality_error", fr.orthonormality_error},
            {"uniform_overlap", fr.uniform_overlap},
            {"row_distinct", fr.row_distinct},
            {"column_distinct", fr.column_distinct}});
  }
  {
    const BasisMatrix basis = read_basis(cfg, n, seed, "random");
    const ValidationReport vr = validate_basis(basis, tol);
    Theorem1Options opts;
    opts.threads = threads;
    opts.require_distinct_basis = false;
    const Theorem1Report rep =
        verify_theorem1(basis, eps, dist, mode, trials, derive_seed(seed, "verify.theorem1"), opts);
    const bool hypothesis = vr.valid() && vr.row_distinct && vr.column_distinct;
    record("partial_implies_coherent", hypothesis && rep.partial_nonmarginal == 0,
           {{"basis", cfg.text("basis", "random")},
            {"basis_distinct", vr.row_distinct && vr.column_distinct},
            {"trials", rep.trials},
            {"coherent", rep.coherent},
            {"partially_coherent", rep.partially_coherent},
            {"incoherent", rep.incoherent},
            {"marginal", rep.marginal},
            {"partial_nonmarginal", rep.partial_nonmarginal}});
  }
  {
    const BasisMatrix basis = build_fourier_basis(clt_n);
    const std::uint64_t s = derive_seed(seed, "verify.clt");
    auto ks_json = [](const KsReport& r) {
      return json{{"statistic", r.statistic},
                  {"samples", r.samples},
                  {"null_quantile", r.null_quantile},
                  {"convergence_allowance", r.convergence_allowance},
                  {"threshold", r.threshold}};
    };
    const KsReport single = clt_check(basis, 0, dist, clt_samples, s, threads);
    record("clt_single_mode", single.passed(), ks_json(single));
    const KsReport j1 = clt_joint_check(basis, 0, 1, 1.0, 1.0, dist, clt_samples, s + 1, threads);
    record("clt_joint_1_1", j1.passed(), ks_json(j1));
    const KsReport j2 = clt_joint_check(basis, 0, 1, 1.0, -2.0, dist, clt_samples, s + 2, threads);
    record("clt_joint_1_m2", j2.passed(), ks_json(j2));
  }
  {
    std::vector<int> int_sizes(sizes.begin(), sizes.end());
    const TrendReport trend = coherence_trend(int_sizes, eps, dist, mode, trend_trials,
                                              derive_seed(seed, "verify.trend"), 0.99, threads);
    json rows = json::array();
    for (const auto& e : trend.estimates) {
      rows.push_back({{"n", e.n}, {"q_c_hat", e.q_c_hat}, {"ci", e.ci_halfwidth},
                      {"q_tilde", qc_tilde(eps, dist.sigma(), e.n)}});
    }
    record("coherence_decreases_with_n", trend.nonincreasing,
           {{"epsilon", eps}, {"trials", trend_trials}, {"estimates", rows}, {"last", trend.last}});
  }

  json doc;
  doc["schema"] = "diagosc.verify";
  doc["schema_version"] = cli::kSchemaVersion;
  doc["config"] = {{"seed", seed},          {"n", n},          {"epsilon", eps},
                   {"distribution", dist.name()}, {"sigma", dist.sigma()}, {"mode", mode.name()},
                   {"trials", trials},      {"clt_n", clt_n},  {"clt_samples", clt_samples}};
  doc["checks"] = checks;
  doc["passed"] = all_passed;
  write_json(cfg.text("out", ""), doc);
  return all_passed ? kOk : kVerificationFailure;
}

// ------------------------------------------------------------ validate-basis

int cmd_validate_basis(const ConfigReader& cfg) {
  const int n = static_cast<int>(cfg.integer("n", 8, 2, 8192));
  const double tol = cfg.positive("tolerance", 1e-12);
  const BasisMatrix basis = read_basis(cfg, n, cfg.seed("seed", 1), "fourier");
  const ValidationReport r = validate_basis(basis, tol);
  json doc;
  doc["schema"] = "diagosc.validate-basis";
  doc["schema_version"] = cli::kSchemaVersion;
  doc["basis"] = cfg.text("basis", "fourier");
  doc["n"] = r.n;
  doc["tolerance"] = r.tolerance;
  doc["orthonormality_error"] = r.orthonormality_error;
  doc["uniform_overlap"] = r.uniform_overlap;
  doc["max_entry"] = r.max_entry;
  doc["row_distinct"] = r.row_distinct;
  doc["column_distinct"] = r.column_distinct;
  doc["valid"] = r.valid();
  write_json(cfg.text("out", ""), doc);
  return r.valid() ? kOk : kVerificationFailure;
}

int schema_check(const std::string& path) {
  const auto problems = cli::check_output_file(path);
  if (problems.empty()) {
    std::cout << path << ": ok\n";
    return kOk;
  }
  for (const auto& p : problems) std::cerr << path << ": " << p << '\n';
  return kVerificationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on diagonalizable phase-oscillator systems"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::string config_path, schema_path;
  std::optional<std::string> seed, out, threads, n, epsilon, sigma, trials, t_end;
  app.add_option("--config", config_path, "Experiment config file (key = value)");
  app.add_option("--seed", seed, "Top-level random seed");
  app.add_option("--out", out, "Output path (stdout when omitted)");
  app.add_option("--threads", threads, "Worker threads");
  app.add_option("--n", n, "Number of oscillators");
  app.add_option("--epsilon", epsilon, "Coupling strength");
  app.add_option("--sigma", sigma, "Standard deviation of the natural frequencies");
  app.add_option("--trials", trials, "Monte Carlo trials");
  app.add_option("--t-end", t_end, "Integration horizon");
  app.add_option("--schema-check", schema_path, "Validate an emitted CSV/JSON file and exit");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"mode-curve", "Mode input-output frequency curve (a, mu) as CSV"},
      {"density", "Output-frequency density for Gaussian mode inputs as CSV"},
      {"qc-scan", "Coherence probability over (N, epsilon) as CSV"},
      {"simulate", "Simulate one instance; JSON report plus trajectory CSV"},
      {"verify", "Run the statistical property suite; JSON report"},
      {"validate-basis", "Check a basis for orthonormality and distinctness; JSON report"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalidConfig;
  }

  if (!schema_path.empty()) return schema_check(schema_path);
  const auto chosen = app.get_subcommands();
  if (chosen.empty()) {
    std::cerr << app.help();
    return kInvalidConfig;
  }
  const std::string command = chosen.front()->get_name();

  try {
    cli::RawValues raw;
    if (!config_path.empty()) raw = cli::load_config_file(config_path, command);
    const std::pair<const char*, std::optional<std::string>*> overrides[] = {
        {"seed", &seed},       {"out", &out},     {"threads", &threads}, {"n", &n},
        {"epsilon", &epsilon}, {"sigma", &sigma}, {"trials", &trials},   {"t_end", &t_end}};
    for (const auto& [key, value] : overrides) {
      if (*value) raw[key] = **value;
    }
    const ConfigReader cfg(raw);
    if (command == "mode-curve") return cmd_mode_curve(cfg);
    if (command == "density") return cmd_density(cfg);
    if (command == "qc-scan") return cmd_qc_scan(cfg);
    if (command == "simulate") return cmd_simulate(cfg);
    if (command == "verify") return cmd_verify(cfg);
    return cmd_validate_basis(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "diagosc: invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const NumericalError& e) {
    std::cerr << "diagosc: numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "diagosc: invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "diagosc: " << e.what() << '\n';
    return kNumericalFailure;
  }
}
