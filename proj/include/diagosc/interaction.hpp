#ifndef DIAGOSC_INTERACTION_HPP
#define DIAGOSC_INTERACTION_HPP

// Interaction functions f for the phase system theta' = omega + eps f(theta):
// diagonalizable interactions f(theta) = W p(W^T theta), Kuramoto-form
// pairwise interactions, their gradient potentials, and the product-of-cosines
// expansion used by the VCO realization.

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "diagosc/basis.hpp"
#include "diagosc/errors.hpp"
#include "diagosc/periodic_function.hpp"
#include "diagosc/quadrature.hpp"
#include "diagosc/random.hpp"

namespace diagosc {

/// A system whose interaction decouples into N-1 scalar modes
/// u_j' = a_j + eps p_j(u_j), a_j = W_j^T omega.
struct DiagonalizableSystem {
  double epsilon = 0.0;
  Vector omega;
  BasisMatrix basis;
  std::vector<PeriodicFunction> modes;

  int n() const { return basis.n(); }
};

inline DiagonalizableSystem make_system(BasisMatrix basis, Vector omega, double epsilon,
                                        std::vector<PeriodicFunction> modes) {
  require_same_size(basis.n(), omega.size(), "make_system: omega");
  require_same_size(basis.modes(), static_cast<long>(modes.size()), "make_system: modes");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("make_system: epsilon must be finite and >= 0");
  }
  return DiagonalizableSystem{epsilon, std::move(omega), std::move(basis), std::move(modes)};
}

/// Same mode function for every mode.
inline DiagonalizableSystem make_system(BasisMatrix basis, Vector omega, double epsilon,
                                        const PeriodicFunction& mode) {
  std::vector<PeriodicFunction> modes(static_cast<std::size_t>(basis.modes()), mode);
  return make_system(std::move(basis), std::move(omega), epsilon, std::move(modes));
}

/// a = W^T omega.
inline Vector mode_inputs(const DiagonalizableSystem& sys) {
  return sys.basis.entries().transpose() * sys.omega;
}

/// f(theta) = W p(W^T theta).
inline Vector diagonalizable_interaction(const DiagonalizableSystem& sys, const Vector& theta) {
  require_same_size(sys.n(), theta.size(), "diagonalizable_interaction: theta");
  Vector u = sys.basis.entries().transpose() * theta;
  for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = sys.modes[k](u(k));
  return sys.basis.entries() * u;
}

/// omega + eps W p(W^T theta).
inline Vector diagonalizable_field(const DiagonalizableSystem& sys, const Vector& theta) {
  if (sys.epsilon == 0.0) {
    require_same_size(sys.n(), theta.size(), "diagonalizable_field: theta");
    return sys.omega;
  }
  return sys.omega + sys.epsilon * diagonalizable_interaction(sys, theta);
}

/// Sampled violation of the two structural conditions on f:
/// orthogonality to the uniform direction, and invariance under uniform shifts.
struct ConditionReport {
  int samples = 0;
  double max_uniform_component = 0.0;  // max |1^T f(theta)|
  double max_shift_change = 0.0;       // max |f(theta + c 1) - f(theta)|_inf
};

template <typename Interaction>
ConditionReport check_conditions(Interaction&& f, int n, int samples, std::uint64_t seed) {
  ConditionReport r;
  r.samples = samples;
  CounterRng rng(seed, 0xc0d1);
  const Vector ones = uniform_direction(n);
  for (int s = 0; s < samples; ++s) {
    Vector theta(n);
    for (int i = 0; i < n; ++i) theta(i) = 2.0 * std::numbers::pi * (2.0 * rng.uniform() - 1.0);
    const double c = 20.0 * (2.0 * rng.uniform() - 1.0);
    const Vector f0 = f(theta);
    const Vector shifted = theta + c * ones;
    r.max_uniform_component = std::max(r.max_uniform_component, std::abs(ones.dot(f0)));
    r.max_shift_change = std::max(r.max_shift_change, (f(shifted) - f0).cwiseAbs().maxCoeff());
  }
  return r;
}

/// An odd pairwise coupling h with an optional antiderivative H(x) = int_0^x h.
struct PairFunction {
  std::function<double(double)> h;
  std::function<double(double)> antiderivative;  // empty when unknown
};

/// Kuramoto-form interaction f_i(theta) = sum_j h_ij(theta_j - theta_i).
class KuramotoInteraction {
 public:
  using Handle = std::shared_ptr<const PairFunction>;

  KuramotoInteraction(int n, std::vector<Handle> grid) : n_(n), grid_(std::move(grid)) {
    if (n_ < 1) throw DimensionError("KuramotoInteraction: n must be >= 1");
    require_same_size(static_cast<long>(n_) * n_, static_cast<long>(grid_.size()),
                      "KuramotoInteraction: pair grid");
    for (const auto& h : grid_) {
      if (!h || !h->h) throw std::invalid_argument("KuramotoInteraction: missing pair function");
    }
  }

  /// All pairs share one function.
  static KuramotoInteraction uniform(int n, PairFunction pair) {
    auto handle = std::make_shared<const PairFunction>(std::move(pair));
    return KuramotoInteraction(n, std::vector<Handle>(static_cast<std::size_t>(n) * n, handle));
  }

  /// h_ij(x) = sin(x) / N, H_ij(x) = (1 - cos x) / N.
  static KuramotoInteraction mean_field(int n) {
    const double scale = 1.0 / n;
    return uniform(n, PairFunction{[scale](double x) { return scale * std::sin(x); },
                                   [scale](double x) { return scale * (1.0 - std::cos(x)); }});
  }

  int n() const { return n_; }
  const PairFunction& pair(int i, int j) const { return *grid_[static_cast<std::size_t>(i) * n_ + j]; }
  const Handle& handle(int i, int j) const { return grid_[static_cast<std::size_t>(i) * n_ + j]; }

  /// f_i = sum_j h_ij(theta_j - theta_i), without omega or eps.
  Vector interaction(const Vector& theta) const {
    require_same_size(n_, theta.size(), "KuramotoInteraction: theta");
    Vector f = Vector::Zero(n_);
    for (int i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n_; ++j) acc += pair(i, j).h(theta(j) - theta(i));
      f(i) = acc;
    }
    return f;
  }

  /// Max |h_ij(-x) + h_ij(x)| over `samples` points in [-period, period].
  double oddness_defect(int samples = 64, double period = 2.0 * std::numbers::pi) const {
    double worst = 0.0;
    for (const auto& h : grid_) {
      for (int s = 0; s < samples; ++s) {
        const double x = period * (2.0 * (s + 0.5) / samples - 1.0);
        worst = std::max(worst, std::abs(h->h(-x) + h->h(x)));
      }
    }
    return worst;
  }

  /// Whether h_ij and h_ji are the same handle or agree on samples.
  bool symmetric(int samples = 16, double tol = 1e-12) const {
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        if (handle(i, j) == handle(j, i)) continue;
        for (int s = 0; s < samples; ++s) {
          const double x = 0.37 + 0.91 * s;
          if (std::abs(pair(i, j).h(x) - pair(j, i).h(x)) > tol) return false;
        }
      }
    }
    return true;
  }

 private:
  int n_;
  std::vector<Handle> grid_;
};

inline Vector kuramoto_field(const KuramotoInteraction& k, const Vector& omega, double epsilon,
                             const Vector& theta) {
  require_same_size(k.n(), omega.size(), "kuramoto_field: omega");
  return omega + epsilon * k.interaction(theta);
}

/// Right-hand side of the deviation equation u' = W^T omega + eps W^T f(W u).
inline Vector kuramoto_deviation_rhs(const KuramotoInteraction& k, const Vector& omega,
                                     double epsilon, const Vector& u, const BasisMatrix& w) {
  require_same_size(k.n(), w.n(), "kuramoto_deviation_rhs: basis");
  require_same_size(w.modes(), u.size(), "kuramoto_deviation_rhs: u");
  const Vector theta = w.entries() * u;
  return w.entries().transpose() * (omega + epsilon * k.interaction(theta));
}

struct PotentialValue {
  double value = 0.0;
  bool used_quadrature = false;  // some H_ij came from numerical integration of h_ij
};

/// V(u) = (1/2) sum_i sum_j H_ij(sum_k (W_ik - W_jk) u_k).
///
/// For symmetric odd h_ij this makes u' = -grad(-omega^T W u + eps V(u)) the
/// deviation equation of f_i = sum_j h_ij(theta_j - theta_i). Missing
/// antiderivatives are integrated from 0 by adaptive quadrature.
inline PotentialValue gradient_potential(const KuramotoInteraction& k, const Vector& u,
                                         const BasisMatrix& w) {
  require_same_size(k.n(), w.n(), "gradient_potential: basis");
  require_same_size(w.modes(), u.size(), "gradient_potential: u");
  if (!k.symmetric()) {
    throw std::invalid_argument("gradient_potential: h_ij != h_ji, interaction is not a gradient");
  }
  const Vector theta = w.entries() * u;
  PotentialValue out;
  double acc = 0.0;
  for (int i = 0; i < k.n(); ++i) {
    for (int j = 0; j < k.n(); ++j) {
      const double x = theta(i) - theta(j);
      const PairFunction& p = k.pair(i, j);
      if (p.antiderivative) {
        acc += p.antiderivative(x);
      } else {
        out.used_quadrature = true;
        const auto q = integrate_adaptive(p.h, 0.0, x, {1e-13, 1e-12, 2000});
        acc += q.value;
      }
    }
  }
  out.value = 0.5 * acc;
  return out;
}

inline constexpr int kMaxVcoTerms = 20;

/// sin(sum_l x_l) as a sum of products of phase-shifted cosines: over binary
/// N-tuples b with odd |b| = sum_l b_l, the terms
/// (-1)^((|b|-1)/2) prod_l cos(x_l - b_l pi/2). Enumerated depth-first with
/// shared prefix products.
inline double vco_trig_expansion(std::span<const double> x) {
  if (x.empty()) throw DimensionError("vco_trig_expansion: need at least one angle");
  if (x.size() > kMaxVcoTerms) {
    throw DimensionError("vco_trig_expansion: N = " + std::to_string(x.size()) +
                         " exceeds the cap of " + std::to_string(kMaxVcoTerms));
  }
  std::vector<double> c(x.size()), s(x.size());
  for (std::size_t l = 0; l < x.size(); ++l) {
    c[l] = std::cos(x[l]);
    s[l] = std::cos(x[l] - std::numbers::pi / 2.0);
  }
  // ones = |b| mod 4 over the prefix; odd tuples with ones == 3 enter negated.
  std::function<double(std::size_t, int, double)> walk = [&](std::size_t l, int ones,
                                                             double prefix) -> double {
    if (l == x.size()) return ones == 1 ? prefix : ones == 3 ? -prefix : 0.0;
    return walk(l + 1, ones, prefix * c[l]) + walk(l + 1, (ones + 1) & 3, prefix * s[l]);
  };
  return walk(0, 0, 1.0);
}

/// Input to VCO j for sine modes: eps * sum_k W_jk sin(sum_l W_lk theta_l),
/// with each sine formed from products of the phase-shifted outputs
/// cos(W_lk theta_l - b pi/2) as in vco_trig_expansion. Index j is 0-based.
inline double vco_input_signal(const DiagonalizableSystem& sys, int j, const Vector& theta) {
  require_same_size(sys.n(), theta.size(), "vco_input_signal: theta");
  if (j < 0 || j >= sys.n()) throw DimensionError("vco_input_signal: oscillator index out of range");
  const Matrix& w = sys.basis.entries();
  std::vector<double> x(static_cast<std::size_t>(sys.n()));
  double acc = 0.0;
  for (int k = 0; k < sys.basis.modes(); ++k) {
    for (int l = 0; l < sys.n(); ++l) x[static_cast<std::size_t>(l)] = w(l, k) * theta(l);
    acc += w(j, k) * vco_trig_expansion(x);
  }
  return sys.epsilon * acc;
}

}  // namespace diagosc

#endif  // DIAGOSC_INTERACTION_HPP
