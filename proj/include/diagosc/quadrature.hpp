#ifndef DIAGOSC_QUADRATURE_HPP
#define DIAGOSC_QUADRATURE_HPP

// Globally adaptive Gauss-Kronrod (7/15) quadrature: the interval with the
// largest error estimate is bisected until the total estimate meets the
// tolerance or the subdivision budget is exhausted.

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace diagosc {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_subdivisions = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;   // estimated absolute error
  int evaluations = 0;
  int subdivisions = 0;
  bool converged = false;
};

namespace detail {

// Kronrod abscissae (descending, last is the midpoint) and weights; the Gauss
// nodes are the odd-indexed Kronrod abscissae.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo, hi, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <typename F>
Segment kronrod15(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Integrates f over [lo, hi]. Non-convergence is reported, not thrown.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double lo, double hi,
                                    const QuadratureOptions& opts = {}) {
  QuadratureResult result;
  if (lo == hi) {
    result.converged = true;
    return result;
  }
  std::priority_queue<detail::Segment> work;
  work.push(detail::kronrod15(f, lo, hi));
  result.evaluations = 15;
  double total = work.top().value;
  double error = work.top().error;

  auto tolerance = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
  while (error > tolerance() && result.subdivisions < opts.max_subdivisions) {
    const detail::Segment worst = work.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;  // interval at roundoff width
    work.pop();
    const detail::Segment left = detail::kronrod15(f, worst.lo, mid);
    const detail::Segment right = detail::kronrod15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    work.push(left);
    work.push(right);
    result.evaluations += 30;
    ++result.subdivisions;
  }

  // Re-sum to shed the cancellation accumulated by the running updates.
  total = 0.0;
  error = 0.0;
  while (!work.empty()) {
    total += work.top().value;
    error += work.top().error;
    work.pop();
  }
  result.value = total;
  result.error = error;
  result.converged = error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
  return result;
}

}  // namespace diagosc

#endif  // DIAGOSC_QUADRATURE_HPP
