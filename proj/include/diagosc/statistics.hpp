#ifndef DIAGOSC_STATISTICS_HPP
#define DIAGOSC_STATISTICS_HPP

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace diagosc::stats {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// Limiting Kolmogorov distribution P(sqrt(n) D_n <= k).
inline double kolmogorov_cdf(double k) {
  if (k <= 0.0) return 0.0;
  if (k < 1.0) {
    // Small-k form: sqrt(2 pi)/k sum exp(-(2j-1)^2 pi^2 / (8 k^2))
    double s = 0.0;
    for (int j = 1; j <= 50; ++j) {
      const double t = (2.0 * j - 1.0) * std::numbers::pi / k;
      s += std::exp(-t * t / 8.0);
    }
    return std::sqrt(2.0 * std::numbers::pi) / k * s;
  }
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    s += (j % 2 ? 1.0 : -1.0) * std::exp(-2.0 * j * j * k * k);
  }
  return 1.0 - 2.0 * s;
}

/// k with P(sqrt(n) D_n > k) = alpha in the large-n limit.
inline double kolmogorov_quantile(double alpha) {
  double lo = 0.1, hi = 5.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - kolmogorov_cdf(mid) > alpha) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// sup_x |F_n(x) - F(x)| for the empirical distribution of `samples`.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Quantile of chi-square with `dof` degrees of freedom at probability p.
inline double chi_square_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("chi_square_quantile: p must be in (0, 1)");
  if (!(dof > 0.0)) throw std::invalid_argument("chi_square_quantile: dof must be > 0");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
}

/// Half-width of the Wilson score interval for `successes` out of `trials`,
/// measured from the point estimate to the farther bound.
inline double wilson_halfwidth(long successes, long trials, double z) {
  if (trials <= 0) return 1.0;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return std::max(std::abs(center + spread - p), std::abs(p - (center - spread)));
}

}  // namespace diagosc::stats

#endif  // DIAGOSC_STATISTICS_HPP
