#ifndef DIAGOSC_STOCHASTIC_HPP
#define DIAGOSC_STOCHASTIC_HPP

// Random natural frequencies and the Monte Carlo experiments built on them:
// coherence probabilities from the analytic locking condition, the
// independent-mode approximation erf(eps / (sigma sqrt 2))^(N-1), its
// transition point, and empirical checks of the partial-coherence theorem and
// of the central limit behaviour of the mode inputs a = W^T omega.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "diagosc/basis.hpp"
#include "diagosc/dynamics.hpp"
#include "diagosc/modes.hpp"
#include "diagosc/parallel.hpp"
#include "diagosc/periodic_function.hpp"
#include "diagosc/random.hpp"
#include "diagosc/statistics.hpp"

namespace diagosc {

/// i.i.d. law of each natural frequency.
class FrequencyDistribution {
 public:
  enum class Kind { Gaussian, Uniform, TwoPoint, CustomQuantile };

  static FrequencyDistribution gaussian(double mean = 0.0, double variance = 1.0) {
    return FrequencyDistribution(Kind::Gaussian, mean, variance, {});
  }
  /// Uniform on mean +- sqrt(3 variance).
  static FrequencyDistribution uniform(double mean = 0.0, double variance = 1.0) {
    return FrequencyDistribution(Kind::Uniform, mean, variance, {});
  }
  /// mean +- sqrt(variance) with probability 1/2 each.
  static FrequencyDistribution two_point(double mean = 0.0, double variance = 1.0) {
    return FrequencyDistribution(Kind::TwoPoint, mean, variance, {});
  }
  /// Inverse CDF given by linear interpolation of `quantiles` at equally
  /// spaced probabilities 0, 1/(K-1), ..., 1. Mean and variance are those of
  /// the interpolated law.
  static FrequencyDistribution custom_quantile(std::vector<double> quantiles) {
    if (quantiles.size() < 2 || !std::is_sorted(quantiles.begin(), quantiles.end())) {
      throw std::invalid_argument("custom quantile table must be nondecreasing with >= 2 entries");
    }
    // Moments of a piecewise-uniform law: each segment carries mass 1/(K-1).
    const double w = 1.0 / static_cast<double>(quantiles.size() - 1);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i + 1 < quantiles.size(); ++i) {
      const double a = quantiles[i], b = quantiles[i + 1];
      m1 += w * 0.5 * (a + b);
      m2 += w * (a * a + a * b + b * b) / 3.0;
    }
    return FrequencyDistribution(Kind::CustomQuantile, m1, m2 - m1 * m1, std::move(quantiles));
  }

  Kind kind() const { return kind_; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double sigma() const { return std::sqrt(variance_); }
  /// E|X - mean|^3
  double third_absolute_moment() const {
    const double s = sigma();
    switch (kind_) {
      case Kind::Gaussian: return 2.0 * std::sqrt(2.0 / std::numbers::pi) * s * s * s;
      case Kind::Uniform: {
        const double h = std::sqrt(3.0) * s;
        return h * h * h / 4.0;
      }
      case Kind::TwoPoint: return s * s * s;
      case Kind::CustomQuantile: {
        double acc = 0.0;
        const int grid = 20000;
        for (int i = 0; i < grid; ++i) {
          const double d = std::abs(quantile((i + 0.5) / grid) - mean_);
          acc += d * d * d;
        }
        return acc / grid;
      }
    }
    return 0.0;
  }

  template <typename Rng>
  double sample(Rng& rng) const {
    switch (kind_) {
      case Kind::Gaussian: return mean_ + sigma() * rng.normal();
      case Kind::Uniform: return mean_ + std::sqrt(3.0) * sigma() * (2.0 * rng.uniform() - 1.0);
      case Kind::TwoPoint: return mean_ + (rng.uniform() < 0.5 ? -sigma() : sigma());
      case Kind::CustomQuantile: return quantile(rng.uniform());
    }
    return 0.0;
  }

  const char* name() const {
    switch (kind_) {
      case Kind::Gaussian: return "gaussian";
      case Kind::Uniform: return "uniform";
      case Kind::TwoPoint: return "two_point";
      case Kind::CustomQuantile: return "custom_quantile";
    }
    return "unknown";
  }

 private:
  FrequencyDistribution(Kind kind, double mean, double variance, std::vector<double> quantiles)
      : kind_(kind), mean_(mean), variance_(variance), quantiles_(std::move(quantiles)) {
    if (!std::isfinite(mean_)) throw std::invalid_argument("frequency distribution: bad mean");
    if (!(variance_ > 0.0) || !std::isfinite(variance_)) {
      throw std::invalid_argument("frequency distribution: variance must be positive");
    }
  }

  double quantile(double u) const {
    const double pos = u * static_cast<double>(quantiles_.size() - 1);
    auto i = static_cast<std::size_t>(pos);
    if (i >= quantiles_.size() - 1) return quantiles_.back();
    const double frac = pos - static_cast<double>(i);
    return quantiles_[i] + frac * (quantiles_[i + 1] - quantiles_[i]);
  }

  Kind kind_;
  double mean_;
  double variance_;
  std::vector<double> quantiles_;
};

/// n i.i.d. draws from stream (seed, stream).
inline Vector sample_frequencies(const FrequencyDistribution& dist, int n, std::uint64_t seed,
                                 std::uint64_t stream = 0) {
  if (n < 1) throw std::invalid_argument("sample_frequencies: n must be >= 1");
  CounterRng rng(seed, stream);
  Vector omega(n);
  for (int i = 0; i < n; ++i) omega(i) = dist.sample(rng);
  return omega;
}

/// Per-mode locking bounds [-eps M_j, -eps m_j] expressed through m_j, M_j.
struct ModeBounds {
  std::vector<double> min;
  std::vector<double> max;

  static ModeBounds uniform(const PeriodicFunction& p, int modes) {
    return {std::vector<double>(static_cast<std::size_t>(modes), p.min()),
            std::vector<double>(static_cast<std::size_t>(modes), p.max())};
  }
  static ModeBounds from(const std::vector<PeriodicFunction>& modes) {
    ModeBounds b;
    for (const auto& p : modes) {
      b.min.push_back(p.min());
      b.max.push_back(p.max());
    }
    return b;
  }
};

namespace detail {

inline bool all_modes_locked(const Vector& a, const ModeBounds& bounds, double epsilon) {
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const LockingInterval iv{-epsilon * bounds.max[static_cast<std::size_t>(j)],
                             -epsilon * bounds.min[static_cast<std::size_t>(j)]};
    if (!iv.contains(a(j))) return false;
  }
  return true;
}

}  // namespace detail

struct CoherenceProbabilityEstimate {
  double q_c_hat = 0.0;
  long coherent = 0;
  long trials = 0;
  double ci_halfwidth = 0.0;
  double confidence = 0.95;
  double epsilon = 0.0;
  int n = 0;
};

inline double z_for_confidence(double confidence) {
  return stats::normal_quantile(0.5 + 0.5 * confidence);
}

/// Fraction of trials in which every a_j = W_j^T omega lies in its locking
/// interval. Trial k draws omega from stream (seed, k).
inline CoherenceProbabilityEstimate estimate_coherence_probability(
    const BasisMatrix& basis, double epsilon, const FrequencyDistribution& dist,
    const ModeBounds& bounds, long trials, std::uint64_t seed, double confidence = 0.95,
    int threads = 1) {
  if (trials < 1) throw std::invalid_argument("estimate_coherence_probability: trials must be >= 1");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("estimate_coherence_probability: epsilon < 0");
  require_same_size(basis.modes(), static_cast<long>(bounds.min.size()),
                    "estimate_coherence_probability: mode bounds");
  const Matrix wt = basis.entries().transpose();
  const long coherent = parallel_count(trials, threads, [&](long k) {
    const Vector omega = sample_frequencies(dist, basis.n(), seed, static_cast<std::uint64_t>(k));
    return detail::all_modes_locked(wt * omega, bounds, epsilon);
  });
  CoherenceProbabilityEstimate est;
  est.coherent = coherent;
  est.trials = trials;
  est.q_c_hat = static_cast<double>(coherent) / static_cast<double>(trials);
  est.confidence = confidence;
  est.ci_halfwidth = stats::wilson_halfwidth(coherent, trials, z_for_confidence(confidence));
  est.epsilon = epsilon;
  est.n = basis.n();
  return est;
}

inline CoherenceProbabilityEstimate estimate_coherence_probability(
    int n, double epsilon, const FrequencyDistribution& dist, const PeriodicFunction& mode,
    long trials, std::uint64_t seed, double confidence = 0.95, int threads = 1) {
  return estimate_coherence_probability(build_fourier_basis(n), epsilon, dist,
                                        ModeBounds::uniform(mode, n - 1), trials, seed,
                                        confidence, threads);
}

/// Smallest coupling at which trial k is coherent: for each mode the least
/// eps with a_j in [-eps M_j, -eps m_j], maximised over modes. Requires
/// m_j < 0 < M_j. The Monte Carlo q_c(eps) over these trials is the empirical
/// distribution function of the returned values.
inline std::vector<double> critical_couplings(const BasisMatrix& basis,
                                              const FrequencyDistribution& dist,
                                              const ModeBounds& bounds, long trials,
                                              std::uint64_t seed, int threads = 1) {
  for (std::size_t j = 0; j < bounds.min.size(); ++j) {
    if (!(bounds.min[j] < 0.0 && bounds.max[j] > 0.0)) {
      throw std::invalid_argument("critical_couplings: every mode needs m < 0 < M");
    }
  }
  const Matrix wt = basis.entries().transpose();
  std::vector<double> out(static_cast<std::size_t>(trials));
  parallel_chunks(trials, threads, [&](long begin, long end, int) {
    for (long k = begin; k < end; ++k) {
      const Vector a = wt * sample_frequencies(dist, basis.n(), seed, static_cast<std::uint64_t>(k));
      double worst = 0.0;
      for (Eigen::Index j = 0; j < a.size(); ++j) {
        const auto jj = static_cast<std::size_t>(j);
        worst = std::max(worst, a(j) >= 0.0 ? a(j) / -bounds.min[jj] : -a(j) / bounds.max[jj]);
      }
      out[static_cast<std::size_t>(k)] = worst;
    }
  });
  return out;
}

/// erf(eps / (sigma sqrt 2))^(n-1).
inline double qc_tilde(double epsilon, double sigma, int n) {
  if (n < 2) throw std::invalid_argument("qc_tilde: n must be >= 2");
  if (!(sigma > 0.0)) throw std::invalid_argument("qc_tilde: sigma must be > 0");
  if (epsilon <= 0.0) return 0.0;
  return std::pow(std::erf(epsilon / (sigma * std::numbers::sqrt2)), n - 1);
}

/// 2 / (sqrt(pi) + sqrt(pi + 4)): erf(x) >= 1 - C0 exp(-x^2) for x >= 1.
inline double erf_tail_constant() {
  return 2.0 / (std::sqrt(std::numbers::pi) + std::sqrt(std::numbers::pi + 4.0));
}

struct TransitionPoint {
  double epsilon = 0.0;         // root of qc_tilde(eps, sigma, n) = q
  double bound = 0.0;           // sigma sqrt(C1 + 2 ln(n-1)), C1 = 2 ln C0 - ln(1-q)
  double bound_rederived = 0.0; // same with C1 = 2 ln C0 - 2 ln(1-q)
  bool bound_applies = false;   // root satisfies x = eps / (sigma sqrt 2) >= 1
  int iterations = 0;
};

/// Solves qc_tilde(eps, sigma, n) = q by bisection on
/// [0, sigma (10 + 2 sqrt(ln n))]; qc_tilde is increasing in eps.
inline TransitionPoint transition_point(double q, double sigma, int n, double rel_tol = 1e-12) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("transition_point: q must be in (0, 1)");
  if (!(sigma > 0.0)) throw std::invalid_argument("transition_point: sigma must be > 0");
  if (n < 2) throw std::invalid_argument("transition_point: n must be >= 2");
  double lo = 0.0;
  double hi = sigma * (10.0 + 2.0 * std::sqrt(std::log(static_cast<double>(n))));
  TransitionPoint tp;
  while (hi - lo > rel_tol * hi && tp.iterations < 400) {
    const double mid = 0.5 * (lo + hi);
    if (qc_tilde(mid, sigma, n) < q) lo = mid; else hi = mid;
    ++tp.iterations;
  }
  tp.epsilon = 0.5 * (lo + hi);
  const double c0 = erf_tail_constant();
  const double log_n1 = std::log(static_cast<double>(n - 1));
  const double c1 = 2.0 * std::log(c0) - std::log(1.0 - q);
  const double c1_rederived = 2.0 * std::log(c0) - 2.0 * std::log(1.0 - q);
  tp.bound = sigma * std::sqrt(std::max(0.0, c1 + 2.0 * log_n1));
  tp.bound_rederived = sigma * std::sqrt(std::max(0.0, c1_rederived + 2.0 * log_n1));
  tp.bound_applies = tp.epsilon / (sigma * std::numbers::sqrt2) >= 1.0;
  return tp;
}

struct Theorem1Report {
  long trials = 0;
  long coherent = 0;
  long partially_coherent = 0;  // partial but not coherent
  long incoherent = 0;
  long marginal = 0;            // instances with a mode near a locking endpoint
  long partial_nonmarginal = 0; // partial-not-coherent among non-marginal instances
  bool row_distinct = false;
  bool column_distinct = false;

  double partial_fraction() const {
    return trials ? static_cast<double>(partially_coherent) / static_cast<double>(trials) : 0.0;
  }
};

struct Theorem1Options {
  double pair_tol = 1e-9;           // analytic Omega is exact up to quadrature error
  double boundary_fraction = 1e-3;  // marginal flag width, relative to eps
  bool require_distinct_basis = true;
  int threads = 1;
};

/// Classifies the analytic output frequencies of `trials` random systems and
/// counts partially-coherent-but-not-coherent instances.
inline Theorem1Report verify_theorem1(const BasisMatrix& basis, double epsilon,
                                      const FrequencyDistribution& dist,
                                      const PeriodicFunction& mode, long trials,
                                      std::uint64_t seed, const Theorem1Options& opts = {}) {
  const ValidationReport vr = validate_basis(basis);
  Theorem1Report rep;
  rep.row_distinct = vr.row_distinct;
  rep.column_distinct = vr.column_distinct;
  if (opts.require_distinct_basis && !(vr.row_distinct && vr.column_distinct)) {
    throw std::invalid_argument("verify_theorem1: basis entries are not distinct within rows and columns");
  }
  rep.trials = trials;
  const int workers = std::max(1, opts.threads);
  std::vector<Theorem1Report> partial(static_cast<std::size_t>(workers));
  parallel_chunks(trials, workers, [&](long begin, long end, int chunk) {
    Theorem1Report& local = partial[static_cast<std::size_t>(chunk)];
    for (long k = begin; k < end; ++k) {
      const Vector omega = sample_frequencies(dist, basis.n(), seed, static_cast<std::uint64_t>(k));
      const DiagonalizableSystem sys = make_system(basis, omega, epsilon, mode);
      const OutputFrequencies out = output_frequency_vector(sys);
      const CoherenceClass cls = classify(out.Omega, opts.pair_tol);
      const auto flags = marginal_modes(sys, out.a, out.mu, opts.boundary_fraction);
      const bool marginal = std::any_of(flags.begin(), flags.end(), [](bool b) { return b; });
      local.marginal += marginal;
      switch (cls.tag) {
        case CoherenceTag::Coherent: ++local.coherent; break;
        case CoherenceTag::Incoherent: ++local.incoherent; break;
        case CoherenceTag::PartiallyCoherent:
          ++local.partially_coherent;
          if (!marginal) ++local.partial_nonmarginal;
          break;
      }
    }
  });
  for (const auto& p : partial) {
    rep.coherent += p.coherent;
    rep.partially_coherent += p.partially_coherent;
    rep.incoherent += p.incoherent;
    rep.marginal += p.marginal;
    rep.partial_nonmarginal += p.partial_nonmarginal;
  }
  return rep;
}

struct KsReport {
  double statistic = 0.0;
  long samples = 0;
  double null_quantile = 0.0;       // Kolmogorov quantile / sqrt(samples)
  double convergence_allowance = 0.0;
  double threshold = 0.0;

  bool passed() const { return statistic < threshold; }
};

namespace detail {

inline constexpr double kKsAlpha = 1e-3;
inline constexpr double kBerryEsseenConstant = 0.56;

// Berry-Esseen bound for sum_j c_j X_j with sum c_j^2 = 1 (up to scale).
inline double berry_esseen(const Vector& weights, const FrequencyDistribution& dist) {
  const double s2 = weights.squaredNorm();
  const double s3 = weights.cwiseAbs().array().cube().sum();
  const double sigma = dist.sigma();
  return kBerryEsseenConstant * dist.third_absolute_moment() * s3 /
         (sigma * sigma * sigma * std::pow(s2, 1.5));
}

inline KsReport ks_against_gaussian(std::vector<double> values, double sd, double allowance) {
  KsReport r;
  r.samples = static_cast<long>(values.size());
  r.statistic = stats::ks_statistic(std::move(values),
                                    [sd](double x) { return stats::normal_cdf(x / sd); });
  r.null_quantile = stats::kolmogorov_quantile(kKsAlpha) / std::sqrt(static_cast<double>(r.samples));
  r.convergence_allowance = allowance;
  r.threshold = r.null_quantile + allowance;
  return r;
}

}  // namespace detail

/// KS distance between samples of t1 a_c1 + t2 a_c2 (a = W^T omega, omega
/// centred) and Gaussian(0, sigma^2 (t1^2 + t2^2)). With t2 = 0 this is the
/// marginal law of a single mode input.
inline KsReport clt_joint_check(const BasisMatrix& basis, int column1, int column2, double t1,
                                double t2, const FrequencyDistribution& dist, long samples,
                                std::uint64_t seed, int threads = 1) {
  if (column1 < 0 || column1 >= basis.modes() || column2 < 0 || column2 >= basis.modes()) {
    throw DimensionError("clt_check: column out of range");
  }
  if (samples < 2) throw std::invalid_argument("clt_check: need at least 2 samples");
  const Vector weights = t1 * basis.column(column1) + t2 * basis.column(column2);
  std::vector<double> values(static_cast<std::size_t>(samples));
  parallel_chunks(samples, threads, [&](long begin, long end, int) {
    for (long k = begin; k < end; ++k) {
      CounterRng rng(seed, static_cast<std::uint64_t>(k));
      double acc = 0.0;
      for (int i = 0; i < basis.n(); ++i) acc += weights(i) * (dist.sample(rng) - dist.mean());
      values[static_cast<std::size_t>(k)] = acc;
    }
  });
  const double sd = dist.sigma() * std::sqrt(t1 * t1 + t2 * t2);
  const double allowance =
      dist.kind() == FrequencyDistribution::Kind::Gaussian ? 0.0 : detail::berry_esseen(weights, dist);
  return detail::ks_against_gaussian(std::move(values), sd, allowance);
}

inline KsReport clt_check(const BasisMatrix& basis, int column, const FrequencyDistribution& dist,
                          long samples, std::uint64_t seed, int threads = 1) {
  return clt_joint_check(basis, column, column, 1.0, 0.0, dist, samples, seed, threads);
}

inline KsReport clt_check(int n, int column, const FrequencyDistribution& dist, long samples,
                          std::uint64_t seed, int threads = 1) {
  return clt_check(build_fourier_basis(n), column, dist, samples, seed, threads);
}

struct TrendReport {
  std::vector<CoherenceProbabilityEstimate> estimates;
  bool nonincreasing = false;  // each step down or within overlapping CIs
  double last = 0.0;
};

/// Monte Carlo q_c over an increasing list of system sizes (Fourier bases).
inline TrendReport coherence_trend(const std::vector<int>& sizes, double epsilon,
                                   const FrequencyDistribution& dist, const PeriodicFunction& mode,
                                   long trials, std::uint64_t seed, double confidence = 0.99,
                                   int threads = 1) {
  TrendReport rep;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    rep.estimates.push_back(estimate_coherence_probability(
        sizes[i], epsilon, dist, mode, trials, derive_seed(seed, "trend", i), confidence, threads));
  }
  rep.nonincreasing = true;
  for (std::size_t i = 1; i < rep.estimates.size(); ++i) {
    const auto& prev = rep.estimates[i - 1];
    const auto& cur = rep.estimates[i];
    if (cur.q_c_hat - cur.ci_halfwidth > prev.q_c_hat + prev.ci_halfwidth) rep.nonincreasing = false;
  }
  rep.last = rep.estimates.empty() ? 0.0 : rep.estimates.back().q_c_hat;
  return rep;
}

/// Empirical median of the critical couplings: where the Monte Carlo q_c
/// curve crosses 1/2.
inline double coherence_half_point(int n, const FrequencyDistribution& dist,
                                   const PeriodicFunction& mode, long trials, std::uint64_t seed,
                                   int threads = 1) {
  auto eps = critical_couplings(build_fourier_basis(n), dist, ModeBounds::uniform(mode, n - 1),
                                trials, seed, threads);
  const auto mid = eps.begin() + static_cast<long>(eps.size() / 2);
  std::nth_element(eps.begin(), mid, eps.end());
  return *mid;
}

}  // namespace diagosc

#endif  // DIAGOSC_STOCHASTIC_HPP
