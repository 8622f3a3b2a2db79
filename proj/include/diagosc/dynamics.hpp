#ifndef DIAGOSC_DYNAMICS_HPP
#define DIAGOSC_DYNAMICS_HPP

// Direct simulation of the phase system, empirical output frequencies and the
// coherent / partially coherent / incoherent classification.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "diagosc/basis.hpp"
#include "diagosc/errors.hpp"
#include "diagosc/interaction.hpp"
#include "diagosc/modes.hpp"
#include "diagosc/ode.hpp"

namespace diagosc {

/// Integrates the autonomous system theta' = field(theta) over [0, t_end].
template <typename Field>
Trajectory integrate(Field&& field, const Vector& theta0, double t_end,
                     const StepControl& ctl = {}) {
  return integrate_ode([&field](double, const Vector& y) -> Vector { return field(y); }, 0.0,
                       theta0, t_end, ctl);
}

inline Trajectory integrate_system(const DiagonalizableSystem& sys, const Vector& theta0,
                                   double t_end, const StepControl& ctl = {}) {
  require_same_size(sys.n(), theta0.size(), "integrate_system: theta0");
  return integrate([&sys](const Vector& th) { return diagonalizable_field(sys, th); }, theta0,
                   t_end, ctl);
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  if (traj.empty()) return;
  out << 't';
  for (Eigen::Index i = 0; i < traj.states.front().size(); ++i) out << ",theta_" << i + 1;
  out << '\n';
  std::ostringstream row;
  row.precision(17);
  for (std::size_t r = 0; r < traj.size(); ++r) {
    row.str({});
    row << traj.times[r];
    for (Eigen::Index i = 0; i < traj.states[r].size(); ++i) row << ',' << traj.states[r](i);
    out << row.str() << '\n';
  }
}

struct FrequencyEstimate {
  Vector omega;      // least-squares slope per component
  Vector std_error;  // standard error of each slope
  double window_start = 0.0;
  double window_end = 0.0;
  long points = 0;
};

/// Per-component regression slope of theta_i(t) over the trailing
/// (1 - burn_in_fraction) share of the time span. The regression absorbs the
/// O(1) bounded part of theta(t) - Omega t in the intercept, where theta(t)/t
/// would carry an O(1/t) bias.
inline FrequencyEstimate estimate_output_frequencies(const Trajectory& traj,
                                                     double burn_in_fraction = 0.2) {
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    throw std::invalid_argument("estimate_output_frequencies: burn_in_fraction must be in [0, 1)");
  }
  if (traj.size() < 3) throw std::invalid_argument("estimate_output_frequencies: window too short");
  const double t0 = traj.times.front();
  const double t_start = t0 + burn_in_fraction * (traj.times.back() - t0);
  const auto first = static_cast<std::size_t>(
      std::lower_bound(traj.times.begin(), traj.times.end(), t_start) - traj.times.begin());
  const std::size_t count = traj.size() - first;
  if (count < 3 || !(traj.times.back() > traj.times[first])) {
    throw std::invalid_argument("estimate_output_frequencies: window too short");
  }

  double tbar = 0.0;
  for (std::size_t r = first; r < traj.size(); ++r) tbar += traj.times[r];
  tbar /= static_cast<double>(count);
  double stt = 0.0;
  for (std::size_t r = first; r < traj.size(); ++r) {
    stt += (traj.times[r] - tbar) * (traj.times[r] - tbar);
  }

  const Eigen::Index n = traj.states.front().size();
  Vector ybar = Vector::Zero(n);
  for (std::size_t r = first; r < traj.size(); ++r) ybar += traj.states[r];
  ybar /= static_cast<double>(count);
  Vector sty = Vector::Zero(n);
  for (std::size_t r = first; r < traj.size(); ++r) {
    sty += (traj.times[r] - tbar) * (traj.states[r] - ybar);
  }

  FrequencyEstimate est;
  est.omega = sty / stt;
  Vector rss = Vector::Zero(n);
  for (std::size_t r = first; r < traj.size(); ++r) {
    const Vector resid = traj.states[r] - ybar - est.omega * (traj.times[r] - tbar);
    rss += resid.cwiseProduct(resid);
  }
  est.std_error = (rss / (static_cast<double>(count - 2) * stt)).cwiseSqrt();
  est.window_start = traj.times[first];
  est.window_end = traj.times.back();
  est.points = static_cast<long>(count);
  return est;
}

enum class CoherenceTag { Coherent, PartiallyCoherent, Incoherent };

inline const char* to_string(CoherenceTag tag) {
  switch (tag) {
    case CoherenceTag::Coherent: return "coherent";
    case CoherenceTag::PartiallyCoherent: return "partially_coherent";
    case CoherenceTag::Incoherent: return "incoherent";
  }
  return "unknown";
}

struct CoherenceClass {
  CoherenceTag tag = CoherenceTag::Incoherent;
  std::vector<std::pair<int, int>> locked_pairs;  // 0-based, i < j
};

/// Pair (i, j) is locked iff |Omega_i - Omega_j| <= pair_tol (1 + max |Omega|).
inline CoherenceClass classify(const Vector& Omega, double pair_tol = 1e-3) {
  CoherenceClass c;
  const auto n = static_cast<int>(Omega.size());
  if (n < 2) {
    c.tag = CoherenceTag::Coherent;
    return c;
  }
  const double scale = pair_tol * (1.0 + Omega.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(Omega(i) - Omega(j)) <= scale) c.locked_pairs.emplace_back(i, j);
    }
  }
  const std::size_t all = static_cast<std::size_t>(n) * (n - 1) / 2;
  if (c.locked_pairs.size() == all) {
    c.tag = CoherenceTag::Coherent;
  } else if (c.locked_pairs.empty()) {
    c.tag = CoherenceTag::Incoherent;
  } else {
    c.tag = CoherenceTag::PartiallyCoherent;
  }
  return c;
}

/// Per-mode flag: the mode input sits within `boundary_fraction * eps` of a
/// locking endpoint, or (when `window` > 0) the mode winds fewer than
/// `min_windings` times over the window, so a finite-time slope cannot
/// resolve its frequency.
inline std::vector<bool> marginal_modes(const DiagonalizableSystem& sys, const Vector& a,
                                        const Vector& mu, double boundary_fraction = 1e-3,
                                        double window = 0.0, double min_windings = 20.0) {
  std::vector<bool> flags(static_cast<std::size_t>(a.size()), false);
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const PeriodicFunction& p = sys.modes[j];
    const double near_lo = std::abs(a(j) + sys.epsilon * p.max());
    const double near_hi = std::abs(a(j) + sys.epsilon * p.min());
    bool marginal = sys.epsilon > 0.0 &&
                    std::min(near_lo, near_hi) < boundary_fraction * sys.epsilon;
    if (window > 0.0 && mu(j) != 0.0) {
      marginal = marginal || std::abs(mu(j)) * window < min_windings * p.period();
    }
    flags[static_cast<std::size_t>(j)] = marginal;
  }
  return flags;
}

struct SeparationReport {
  double max_discrepancy = 0.0;   // sup_t |theta(t) - v(t) 1 - W u(t)|_inf
  double max_v_deviation = 0.0;   // sup_t |1^T theta(t) - v(0) - (1^T omega) t|
  std::size_t samples = 0;
};

/// Step control for the separation check: tight tolerances and a shared
/// output grid, so the discrepancy measures integrator error only. The
/// tolerance leaves margin for mode functions with kinks (triangle, sampled),
/// where the local error estimate is least reliable.
inline StepControl separation_step_control() {
  StepControl ctl;
  ctl.rel_tol = 1e-13;
  ctl.abs_tol = 1e-13;
  ctl.output_interval = 0.1;
  return ctl;
}

/// Integrates the full system and, independently, each scalar mode
/// u_j' = a_j + eps p_j(u_j) from u(0) = W^T theta0, then compares the full
/// trajectory to v(t) 1 + W u(t) with v(t) = v(0) + (1^T omega) t.
inline SeparationReport verify_separation(const DiagonalizableSystem& sys, const Vector& theta0,
                                          double t_end,
                                          const StepControl& ctl = separation_step_control()) {
  if (!(ctl.output_interval > 0.0)) {
    throw std::invalid_argument("verify_separation: needs a positive output interval");
  }
  const Trajectory full = integrate_system(sys, theta0, t_end, ctl);
  const PhaseDecomposition start = decompose(theta0, sys.basis);
  const Vector a = mode_inputs(sys);
  const double sqrt_n = std::sqrt(static_cast<double>(sys.n()));
  const double v_rate = sys.omega.sum() / sqrt_n;

  std::vector<Trajectory> modes;
  modes.reserve(static_cast<std::size_t>(a.size()));
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const PeriodicFunction& p = sys.modes[j];
    const double aj = a(j), eps = sys.epsilon;
    Vector u0(1);
    u0(0) = start.u(j);
    modes.push_back(integrate([&p, aj, eps](const Vector& u) -> Vector {
      Vector du(1);
      du(0) = aj + eps * p(u(0));
      return du;
    }, u0, t_end, ctl));
    if (modes.back().size() != full.size()) {
      throw NumericalError("verify_separation: output grids differ");
    }
  }

  SeparationReport rep;
  rep.samples = full.size();
  Vector u(a.size());
  for (std::size_t r = 0; r < full.size(); ++r) {
    const double t = full.times[r];
    for (Eigen::Index j = 0; j < a.size(); ++j) u(j) = modes[static_cast<std::size_t>(j)].states[r](0);
    const PhaseDecomposition composed{start.v + v_rate * t, u};
    const Vector predicted = compose(composed, sys.basis);
    rep.max_discrepancy =
        std::max(rep.max_discrepancy, (full.states[r] - predicted).cwiseAbs().maxCoeff());
    rep.max_v_deviation = std::max(
        rep.max_v_deviation, std::abs(full.states[r].sum() / sqrt_n - start.v - v_rate * t));
  }
  return rep;
}

/// Analytic and simulated output frequencies of one instance.
struct InstanceReport {
  OutputFrequencies analytic;
  FrequencyEstimate empirical;
  CoherenceClass analytic_class;
  CoherenceClass empirical_class;
  std::vector<bool> marginal;
  double max_frequency_error = 0.0;  // |Omega_emp - Omega_analytic|_inf

  bool any_marginal() const {
    return std::any_of(marginal.begin(), marginal.end(), [](bool b) { return b; });
  }
};

/// Step control for long frequency runs: absolute error control dominates
/// so that accuracy does not degrade as unwrapped phases grow.
inline StepControl frequency_step_control() {
  StepControl ctl;
  ctl.rel_tol = 1e-12;
  ctl.abs_tol = 1e-9;
  ctl.output_interval = 0.5;
  return ctl;
}

inline InstanceReport simulate_instance(const DiagonalizableSystem& sys, const Vector& theta0,
                                        double t_end, double burn_in_fraction = 0.2,
                                        double pair_tol = 1e-3,
                                        const StepControl& ctl = frequency_step_control()) {
  InstanceReport rep;
  rep.analytic = output_frequency_vector(sys);
  const Trajectory traj = integrate_system(sys, theta0, t_end, ctl);
  rep.empirical = estimate_output_frequencies(traj, burn_in_fraction);
  rep.analytic_class = classify(rep.analytic.Omega, pair_tol);
  rep.empirical_class = classify(rep.empirical.omega, pair_tol);
  rep.marginal = marginal_modes(sys, rep.analytic.a, rep.analytic.mu, 1e-3,
                                rep.empirical.window_end - rep.empirical.window_start);
  rep.max_frequency_error = (rep.empirical.omega - rep.analytic.Omega).cwiseAbs().maxCoeff();
  return rep;
}

}  // namespace diagosc

#endif  // DIAGOSC_DYNAMICS_HPP
