#ifndef DIAGOSC_MODES_HPP
#define DIAGOSC_MODES_HPP

// Scalar mode analysis for u' = a + eps p(u): the period integral T(a, eps),
// the input-output frequency map mu_p(a, eps), its closed form for p = sin,
// the output frequency vector of a diagonalizable system, and the density of
// mu_p(a, eps) for standard Gaussian a.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "diagosc/errors.hpp"
#include "diagosc/interaction.hpp"
#include "diagosc/periodic_function.hpp"
#include "diagosc/quadrature.hpp"

namespace diagosc {

/// [lo, hi] = [-eps M, -eps m].
struct LockingInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double a) const {
    const double slack = 1e-12 * std::max(1.0, std::abs(a));
    return lo - slack <= a && a <= hi + slack;
  }
  /// Signed distance to the nearer endpoint; negative inside.
  double distance(double a) const {
    if (a < lo) return lo - a;
    if (a > hi) return a - hi;
    return -std::min(a - lo, hi - a);
  }
};

inline LockingInterval locking_interval(const PeriodicFunction& p, double epsilon) {
  return {-epsilon * p.max(), -epsilon * p.min()};
}

inline bool is_locked(const PeriodicFunction& p, double a, double epsilon) {
  return locking_interval(p, epsilon).contains(a);
}

namespace detail {

inline constexpr double kNearLockingFraction = 0.01;

// T = int_0^L du / (a + eps p(u)) for a + eps m > 0. The integrand peaks at
// the argmin of p; the period is centred there. Close to locking the peak
// narrows like sqrt(a + eps m), and u - u* = c sinh(s) spreads it out.
inline QuadratureResult positive_period(const PeriodicFunction& p, double a, double epsilon,
                                        const QuadratureOptions& opts) {
  const double L = p.period();
  const double u0 = p.argmin();
  const double gap = a + epsilon * p.min();
  auto integrand = [&](double u) { return 1.0 / (a + epsilon * p(u)); };

  if (gap >= kNearLockingFraction * epsilon) {
    auto q1 = integrate_adaptive(integrand, u0, u0 + 0.5 * L, opts);
    auto q2 = integrate_adaptive(integrand, u0 + 0.5 * L, u0 + L, opts);
    return {q1.value + q2.value, q1.error + q2.error, q1.evaluations + q2.evaluations,
            q1.subdivisions + q2.subdivisions, q1.converged && q2.converged};
  }

  // Width scale of the peak from the local curvature, falling back to
  // sqrt(gap/eps) at kinks or flat minima.
  const double h = 1e-4 * L;
  const double curvature = (p(u0 + h) - 2.0 * p.min() + p(u0 - h)) / (h * h);
  double c = std::sqrt(gap / epsilon);
  if (std::isfinite(curvature) && curvature > 0.0 && curvature < 1e6) {
    c = std::sqrt(2.0 * gap / (epsilon * curvature));
  }
  c = std::max(c, 1e-300);
  const double s_max = std::asinh(0.5 * L / c);
  auto mapped = [&](double s) {
    const double x = c * std::sinh(s);
    return c * std::cosh(s) / (a + epsilon * p(u0 + x));
  };
  QuadratureOptions tight = opts;
  tight.max_subdivisions = std::max(opts.max_subdivisions, 8000);
  auto q1 = integrate_adaptive(mapped, -s_max, 0.0, tight);
  auto q2 = integrate_adaptive(mapped, 0.0, s_max, tight);
  return {q1.value + q2.value, q1.error + q2.error, q1.evaluations + q2.evaluations,
          q1.subdivisions + q2.subdivisions, q1.converged && q2.converged};
}

}  // namespace detail

/// T(a, eps) = int_0^L du / (a + eps p(u)), negative for a < -eps M.
///
/// Relative accuracy is about 1e-9 away from the locking boundary. As the gap
/// to the boundary shrinks the integrand approaches a non-integrable pole and
/// T grows like 1/sqrt(gap); the quadrature error estimate grows with it.
inline double period_integral(const PeriodicFunction& p, double a, double epsilon,
                              const QuadratureOptions& opts = {}) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("period_integral: epsilon must be >= 0");
  if (epsilon == 0.0) {
    if (a == 0.0) throw LockedRegimeError("period_integral: a = 0 with eps = 0 never winds");
    return p.period() / a;
  }
  if (is_locked(p, a, epsilon)) {
    throw LockedRegimeError("period_integral: a = " + std::to_string(a) +
                            " lies in the locking interval [" +
                            std::to_string(-epsilon * p.max()) + ", " +
                            std::to_string(-epsilon * p.min()) + "]");
  }
  if (a > -epsilon * p.min()) return detail::positive_period(p, a, epsilon, opts).value;
  // u -> -u, a -> -a turns the lower branch into the upper one for -p(-u).
  return -detail::positive_period(p.reflected(), -a, epsilon, opts).value;
}

struct ModeFrequencyResult {
  double mu = 0.0;
  bool locked = false;
  std::optional<double> period;  // |T(a, eps)| when not locked
};

/// mu_p(a, eps) = lim u(t)/t for u' = a + eps p(u).
inline ModeFrequencyResult mode_frequency(const PeriodicFunction& p, double a, double epsilon,
                                          const QuadratureOptions& opts = {}) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("mode_frequency: epsilon must be >= 0");
  const double L = p.period();
  if (epsilon == 0.0) {
    if (a == 0.0) return {0.0, true, std::nullopt};
    return {a, false, L / std::abs(a)};
  }
  if (is_locked(p, a, epsilon)) return {0.0, true, std::nullopt};
  if (a > -epsilon * p.min()) {
    const double t = detail::positive_period(p, a, epsilon, opts).value;
    return {L / t, false, t};
  }
  const double t = detail::positive_period(p.reflected(), -a, epsilon, opts).value;
  return {-L / t, false, t};
}

/// mu for p = sin: -sqrt(a^2 - eps^2) below -eps, 0 on [-eps, eps],
/// sqrt(a^2 - eps^2) above eps.
inline double mode_frequency_sin_closed_form(double a, double epsilon) {
  if (std::abs(a) <= epsilon) return 0.0;
  const double r = std::sqrt((a - epsilon) * (a + epsilon));
  return a > 0.0 ? r : -r;
}

struct OutputFrequencies {
  Vector a;      // mode inputs W^T omega
  Vector mu;     // mode output frequencies
  Vector Omega;  // oscillator output frequencies (1^T omega) 1 + W mu
};

inline OutputFrequencies output_frequency_vector(const DiagonalizableSystem& sys,
                                                 const QuadratureOptions& opts = {}) {
  OutputFrequencies out;
  out.a = mode_inputs(sys);
  out.mu.resize(out.a.size());
  for (Eigen::Index j = 0; j < out.a.size(); ++j) {
    out.mu(j) = mode_frequency(sys.modes[j], out.a(j), sys.epsilon, opts).mu;
  }
  const double n = sys.n();
  out.Omega = sys.basis.entries() * out.mu;
  out.Omega.array() += sys.omega.sum() / n;  // (1^T omega) 1 = mean(omega) per component
  return out;
}

/// Distribution of mu_sin(a, eps) for a ~ N(0, 1): an atom at 0 of weight
/// erf(eps / sqrt 2) plus a continuous, even density.
struct FrequencyDensity {
  double epsilon = 0.0;
  double atom_weight = 0.0;

  double continuous(double mu) const {
    const double r2 = mu * mu + epsilon * epsilon;
    if (r2 == 0.0) return 0.0;
    return std::abs(mu) * std::exp(-0.5 * r2) / std::sqrt(2.0 * std::numbers::pi * r2);
  }

  /// Mass of the continuous part on [lo, hi]. Uses |mu| = sqrt(a^2 - eps^2),
  /// so the mass on 0 <= mu <= x is Phi(sqrt(x^2 + eps^2)) - Phi(eps).
  double continuous_mass(double lo, double hi) const {
    if (hi <= lo) return 0.0;
    auto upper_tail = [this](double x) {  // mass on [0, x] for x >= 0
      return 0.5 * (std::erf(std::sqrt(x * x + epsilon * epsilon) / std::numbers::sqrt2) -
                    std::erf(epsilon / std::numbers::sqrt2));
    };
    auto cumulative = [&](double x) {  // mass on (-inf, x]
      const double half = 0.5 * (1.0 - atom_weight);
      return x >= 0.0 ? half + upper_tail(x) : half - upper_tail(-x);
    };
    return cumulative(hi) - cumulative(lo);
  }
};

inline FrequencyDensity gaussian_output_density(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("gaussian_output_density: epsilon must be > 0");
  return {epsilon, std::erf(epsilon / std::numbers::sqrt2)};
}

}  // namespace diagosc

#endif  // DIAGOSC_MODES_HPP
