#ifndef DIAGOSC_PERIODIC_FUNCTION_HPP
#define DIAGOSC_PERIODIC_FUNCTION_HPP

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace diagosc {

/// A continuous L-periodic real function with its extrema over one period.
///
/// The extrema are located at construction by dense sampling followed by a
/// golden-section refinement around the best sample. The locking interval of
/// the mode equation u' = a + eps p(u) is [-eps M, -eps m], so m and M are
/// accurate to roughly 1e-9 or better for Lipschitz p.
class PeriodicFunction {
 public:
  using Fn = std::function<double(double)>;

  static constexpr int kDefaultSamples = 4096;

  PeriodicFunction(Fn f, double period, std::string name = "custom",
                   int samples = kDefaultSamples)
      : f_(std::make_shared<const Fn>(std::move(f))), period_(period), name_(std::move(name)) {
    if (!(period_ > 0.0) || !std::isfinite(period_)) {
      throw std::invalid_argument("PeriodicFunction: period must be positive and finite");
    }
    if (samples < 8) throw std::invalid_argument("PeriodicFunction: need at least 8 samples");
    locate_extrema(samples);
  }

  double operator()(double x) const { return (*f_)(x); }

  double period() const { return period_; }
  double min() const { return min_; }
  double max() const { return max_; }
  double argmin() const { return argmin_; }
  double argmax() const { return argmax_; }
  const std::string& name() const { return name_; }

  /// x -> -p(-x). Maps the a < -eps M branch of the mode equation onto the
  /// a > -eps m branch; extrema are carried over without resampling.
  PeriodicFunction reflected() const {
    PeriodicFunction r = *this;
    auto inner = f_;
    r.f_ = std::make_shared<const Fn>([inner](double x) { return -(*inner)(-x); });
    r.min_ = -max_;
    r.max_ = -min_;
    r.argmin_ = wrap(-argmax_);
    r.argmax_ = wrap(-argmin_);
    r.name_ = "reflected(" + name_ + ")";
    return r;
  }

 private:
  double wrap(double x) const {
    double r = std::fmod(x, period_);
    return r < 0.0 ? r + period_ : r;
  }

  // Golden-section search for a local minimum of g on [lo, hi].
  template <typename G>
  static std::pair<double, double> golden_min(G g, double lo, double hi) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double g1 = g(x1), g2 = g(x2);
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * (1.0 + std::abs(lo)); ++it) {
      if (g1 <= g2) {
        hi = x2;
        x2 = x1;
        g2 = g1;
        x1 = hi - inv_phi * (hi - lo);
        g1 = g(x1);
      } else {
        lo = x1;
        x1 = x2;
        g1 = g2;
        x2 = lo + inv_phi * (hi - lo);
        g2 = g(x2);
      }
    }
    return g1 <= g2 ? std::pair{x1, g1} : std::pair{x2, g2};
  }

  void locate_extrema(int samples) {
    const double h = period_ / samples;
    int imin = 0, imax = 0;
    double vmin = (*f_)(0.0), vmax = vmin;
    for (int i = 1; i < samples; ++i) {
      const double v = (*f_)(i * h);
      if (!std::isfinite(v)) throw std::invalid_argument("PeriodicFunction: non-finite value");
      if (v < vmin) vmin = v, imin = i;
      if (v > vmax) vmax = v, imax = i;
    }
    const auto& f = *f_;
    auto [xmin, gmin] = golden_min(f, (imin - 1) * h, (imin + 1) * h);
    min_ = std::min(gmin, vmin);
    argmin_ = wrap(gmin <= vmin ? xmin : imin * h);
    auto [xmax, gmax] = golden_min([&f](double x) { return -f(x); }, (imax - 1) * h, (imax + 1) * h);
    max_ = std::max(-gmax, vmax);
    argmax_ = wrap(-gmax >= vmax ? xmax : imax * h);
  }

  std::shared_ptr<const Fn> f_;
  double period_;
  std::string name_;
  double min_ = 0.0, max_ = 0.0, argmin_ = 0.0, argmax_ = 0.0;
};

inline PeriodicFunction sine_mode() {
  return PeriodicFunction([](double x) { return std::sin(x); }, 2.0 * std::numbers::pi, "sin");
}

/// Triangle wave with the zeros, period and range of sin: (2/pi) asin(sin x).
inline PeriodicFunction triangle_mode() {
  return PeriodicFunction(
      [](double x) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        constexpr double half_pi = 0.5 * std::numbers::pi;
        double r = std::fmod(x + half_pi, two_pi);
        if (r < 0.0) r += two_pi;
        // r in [0, 2pi): rises from -1 at r=0 to 1 at r=pi, then falls.
        return r <= std::numbers::pi ? -1.0 + 2.0 * r / std::numbers::pi
                                     : 3.0 - 2.0 * r / std::numbers::pi;
      },
      2.0 * std::numbers::pi, "triangle");
}

/// Periodic piecewise-linear interpolant through equally spaced samples
/// values[i] = p(i * period / values.size()).
inline PeriodicFunction sampled_mode(std::vector<double> values, double period,
                                     std::string name = "sampled") {
  if (values.size() < 2) throw std::invalid_argument("sampled mode needs >= 2 values");
  auto table = std::make_shared<const std::vector<double>>(std::move(values));
  return PeriodicFunction(
      [table, period](double x) {
        const auto count = static_cast<double>(table->size());
        double s = std::fmod(x / period, 1.0);
        if (s < 0.0) s += 1.0;
        const double pos = s * count;
        auto i = static_cast<std::size_t>(pos);
        if (i >= table->size()) i = table->size() - 1;
        const double frac = pos - static_cast<double>(i);
        const double lo = (*table)[i];
        const double hi = (*table)[(i + 1) % table->size()];
        return lo + frac * (hi - lo);
      },
      period, std::move(name));
}

/// Reads one value per line (blank lines and '#' comments skipped).
inline PeriodicFunction load_sampled_mode(const std::string& path, double period) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open sampled mode file '" + path + "'");
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    double v;
    if (!(ss >> v)) throw std::invalid_argument("bad value in '" + path + "': " + line);
    values.push_back(v);
  }
  return sampled_mode(std::move(values), period, "sampled:" + path);
}

/// "sin", "triangle" or "sampled:<file>" (sampled values span `period`).
inline PeriodicFunction parse_mode_function(const std::string& spec,
                                            double period = 2.0 * std::numbers::pi) {
  if (spec == "sin") return sine_mode();
  if (spec == "triangle") return triangle_mode();
  const std::string prefix = "sampled:";
  if (spec.rfind(prefix, 0) == 0) return load_sampled_mode(spec.substr(prefix.size()), period);
  throw std::invalid_argument("unknown mode function '" + spec +
                              "' (expected sin, triangle or sampled:<file>)");
}

}  // namespace diagosc

#endif  // DIAGOSC_PERIODIC_FUNCTION_HPP
