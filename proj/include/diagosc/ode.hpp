#ifndef DIAGOSC_ODE_HPP
#define DIAGOSC_ODE_HPP

// Explicit adaptive Runge-Kutta 5(4) of Dormand and Prince with FSAL and the
// 4th-order continuous extension (dense output) of Hairer's DOPRI5.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "diagosc/errors.hpp"

namespace diagosc {

using Vector = Eigen::VectorXd;

struct StepControl {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 0.0;   // 0 picks a step from the field scale
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-14;     // relative to max(1, |t|)
  long max_steps = 50'000'000;
  // > 0: record states on the grid t0 + k * output_interval (plus t_end) via
  // dense output. 0: record every accepted step.
  double output_interval = 0.0;
};

/// Unwrapped phase trajectory.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

/// Integration stopped early; carries what was computed up to the failure.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, Trajectory partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

namespace detail {

struct DopriTableau {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b_hat (5th minus embedded 4th order weights)
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  // Dense output
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

}  // namespace detail

/// Stepper holding the current state and the interpolation data of the last
/// accepted step.
template <typename Field>
class DormandPrince {
 public:
  DormandPrince(Field field, double t0, Vector y0, StepControl ctl)
      : field_(std::move(field)), ctl_(ctl), t_(t0), y_(std::move(y0)) {
    k1_ = field_(t_, y_);
    require_same_size(y_.size(), k1_.size(), "DormandPrince: field output");
  }

  double t() const { return t_; }
  const Vector& y() const { return y_; }
  long accepted() const { return accepted_; }
  long rejected() const { return rejected_; }

  /// Advances by one accepted step, not past t_stop. Returns false on
  /// step-size underflow.
  bool step(double t_stop) {
    using T = detail::DopriTableau;
    if (h_ == 0.0) h_ = initial_step(t_stop);
    const long n = y_.size();
    for (;;) {
      double h = std::min({h_, ctl_.max_step, t_stop - t_});
      const double h_floor = ctl_.min_step * std::max(1.0, std::abs(t_));
      if (h < h_floor && t_stop - t_ > h_floor) return false;

      const Vector k2 = field_(t_ + T::c2 * h, y_ + h * (T::a21 * k1_));
      const Vector k3 = field_(t_ + T::c3 * h, y_ + h * (T::a31 * k1_ + T::a32 * k2));
      const Vector k4 = field_(t_ + T::c4 * h, y_ + h * (T::a41 * k1_ + T::a42 * k2 + T::a43 * k3));
      const Vector k5 = field_(t_ + T::c5 * h, y_ + h * (T::a51 * k1_ + T::a52 * k2 +
                                                         T::a53 * k3 + T::a54 * k4));
      const Vector k6 = field_(t_ + h, y_ + h * (T::a61 * k1_ + T::a62 * k2 + T::a63 * k3 +
                                                 T::a64 * k4 + T::a65 * k5));
      Vector y_new = y_ + h * (T::b1 * k1_ + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
      const Vector k7 = field_(t_ + h, y_new);
      const Vector err =
          h * (T::e1 * k1_ + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);

      double norm = 0.0;
      for (long i = 0; i < n; ++i) {
        const double scale =
            ctl_.abs_tol + ctl_.rel_tol * std::max(std::abs(y_(i)), std::abs(y_new(i)));
        const double r = err(i) / scale;
        norm += r * r;
      }
      norm = std::sqrt(norm / static_cast<double>(n));
      if (!std::isfinite(norm)) {
        h_ = 0.25 * h;
        ++rejected_;
        continue;
      }

      // Standard controller with safety 0.9 and step ratio in [0.2, 10].
      const double factor = norm == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 10.0);
      if (norm <= 1.0) {
        // Interpolation data for dense output on [t_, t_ + h].
        const Vector dy = y_new - y_;
        const Vector bspl = h * k1_ - dy;
        rcont_[0] = y_;
        rcont_[1] = dy;
        rcont_[2] = bspl;
        rcont_[3] = dy - h * k7 - bspl;
        rcont_[4] = h * (T::d1 * k1_ + T::d3 * k3 + T::d4 * k4 + T::d5 * k5 + T::d6 * k6 +
                         T::d7 * k7);
        t_prev_ = t_;
        h_prev_ = h;
        t_ = (h == t_stop - t_) ? t_stop : t_ + h;
        y_ = std::move(y_new);
        k1_ = k7;
        h_ = h * (rejected_last_ ? std::min(1.0, factor) : factor);
        rejected_last_ = false;
        ++accepted_;
        return true;
      }
      h_ = h * std::min(1.0, factor);
      rejected_last_ = true;
      ++rejected_;
    }
  }

  /// State at t in [t_prev, t] of the last accepted step.
  Vector dense(double t) const {
    const double s = (t - t_prev_) / h_prev_;
    const double s1 = 1.0 - s;
    return rcont_[0] + s * (rcont_[1] + s1 * (rcont_[2] + s * (rcont_[3] + s1 * rcont_[4])));
  }

 private:
  double initial_step(double t_stop) const {
    if (ctl_.initial_step > 0.0) return ctl_.initial_step;
    const double span = std::abs(t_stop - t_);
    const double d0 = y_.cwiseAbs().maxCoeff();
    const double d1 = k1_.cwiseAbs().maxCoeff();
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-4 : 0.01 * d0 / d1;
    h = std::min({h, 0.01 * span, 0.1});
    const double tol = std::max(ctl_.rel_tol, 1e-14);
    return std::max(h * std::pow(tol / 1e-8, 0.2), 1e-8 * std::max(1.0, span));
  }

  Field field_;
  StepControl ctl_;
  double t_;
  Vector y_;
  Vector k1_;
  double h_ = 0.0;
  double t_prev_ = 0.0;
  double h_prev_ = 1.0;
  Vector rcont_[5];
  long accepted_ = 0;
  long rejected_ = 0;
  bool rejected_last_ = false;
};

/// Integrates y' = field(t, y) from t0 to t_end.
template <typename Field>
Trajectory integrate_ode(Field&& field, double t0, const Vector& y0, double t_end,
                         const StepControl& ctl = {}) {
  if (!(t_end > t0)) throw std::invalid_argument("integrate: t_end must exceed the start time");
  DormandPrince<std::decay_t<Field>> stepper(std::forward<Field>(field), t0, y0, ctl);
  Trajectory traj;
  traj.times.push_back(t0);
  traj.states.push_back(y0);

  long k = 1;
  auto next_output = [&] { return t0 + static_cast<double>(k) * ctl.output_interval; };
  while (stepper.t() < t_end) {
    if (stepper.accepted() + stepper.rejected() >= ctl.max_steps) {
      throw IntegrationError("integrate: step budget exhausted at t = " +
                                 std::to_string(stepper.t()),
                             std::move(traj));
    }
    if (!stepper.step(t_end)) {
      throw IntegrationError("integrate: step size underflow at t = " +
                                 std::to_string(stepper.t()),
                             std::move(traj));
    }
    if (!std::isfinite(stepper.y().cwiseAbs().maxCoeff())) {
      throw IntegrationError("integrate: non-finite state at t = " + std::to_string(stepper.t()),
                             std::move(traj));
    }
    if (ctl.output_interval > 0.0) {
      for (double to = next_output(); to < stepper.t() && to < t_end; to = next_output()) {
        traj.times.push_back(to);
        traj.states.push_back(stepper.dense(to));
        ++k;
      }
      if (stepper.t() >= t_end) {
        traj.times.push_back(stepper.t());
        traj.states.push_back(stepper.y());
      } else if (next_output() == stepper.t()) {
        traj.times.push_back(stepper.t());
        traj.states.push_back(stepper.y());
        ++k;
      }
    } else {
      traj.times.push_back(stepper.t());
      traj.states.push_back(stepper.y());
    }
  }
  return traj;
}

}  // namespace diagosc

#endif  // DIAGOSC_ODE_HPP
