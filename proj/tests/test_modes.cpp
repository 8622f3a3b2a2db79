#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "diagosc/modes.hpp"
#include "diagosc/quadrature.hpp"
#include "diagosc/random.hpp"

using namespace diagosc;

namespace {

constexpr double kPi = std::numbers::pi;

// Closed-form period for the triangle wave: on each half period p sweeps
// [-1, 1] linearly, so T = (pi / eps) ln((a + eps) / (a - eps)) for a > eps.
double triangle_period(double a, double eps) { return kPi / eps * std::log((a + eps) / (a - eps)); }

}  // namespace

TEST(PeriodIntegral, SineClosedForm) {
  // 2 pi / sqrt(3), cross-checked with mpmath at 30 digits.
  EXPECT_NEAR(period_integral(sine_mode(), 2.0, 1.0), 3.6275987284684357, 1e-12);
}

TEST(PeriodIntegral, WeakCouplingLimit) {
  const PeriodicFunction p = sine_mode();
  for (double eps : {1e-3, 1e-6, 0.0}) {
    EXPECT_NEAR(period_integral(p, 1.5, eps), 2 * kPi / 1.5, 2 * kPi * eps + 1e-12);
  }
}

TEST(PeriodIntegral, NearSingularAgainstClosedForm) {
  for (double a : {1.01, 1.001, 1.0 + 1e-5, 1.0 + 1e-8}) {
    const double exact = 2 * kPi / std::sqrt(a * a - 1.0);
    EXPECT_NEAR(period_integral(sine_mode(), a, 1.0) / exact, 1.0, 1e-6) << a;
  }
  EXPECT_NEAR(period_integral(sine_mode(), 1.01, 1.0) / (2 * kPi / std::sqrt(1.01 * 1.01 - 1.0)), 1.0, 1e-9);
}

TEST(PeriodIntegral, TriangleClosedForm) {
  const PeriodicFunction t = triangle_mode();
  EXPECT_NEAR(period_integral(t, 1.5, 1.0), 5.0561983221118627, 1e-10);
  for (double a : {1.2, 2.0, 5.0, 1.001, 1.0 + 1e-6}) {
    EXPECT_NEAR(period_integral(t, a, 1.0) / triangle_period(a, 1.0), 1.0, 1e-8) << a;
  }
}

TEST(PeriodIntegral, NegativeBranchIsSignedPeriod) {
  EXPECT_NEAR(period_integral(sine_mode(), -2.0, 1.0), -3.6275987284684357, 1e-12);
}

TEST(PeriodIntegral, LockedRegimeThrows) {
  EXPECT_THROW(period_integral(sine_mode(), 0.5, 1.0), LockedRegimeError);
  EXPECT_THROW(period_integral(sine_mode(), 1.0, 1.0), LockedRegimeError);
  EXPECT_THROW(period_integral(sine_mode(), -1.0, 1.0), LockedRegimeError);
}

TEST(ModeFrequency, SineExamples) {
  const PeriodicFunction p = sine_mode();
  const auto locked = mode_frequency(p, 0.5, 1.0);
  EXPECT_TRUE(locked.locked);
  EXPECT_EQ(locked.mu, 0.0);
  EXPECT_FALSE(locked.period.has_value());

  const auto up = mode_frequency(p, 2.0, 1.0);
  EXPECT_FALSE(up.locked);
  EXPECT_NEAR(up.mu, std::sqrt(3.0), 1e-12);
  ASSERT_TRUE(up.period.has_value());
  EXPECT_NEAR(*up.period, 2 * kPi / std::sqrt(3.0), 1e-12);

  EXPECT_NEAR(mode_frequency(p, -2.0, 1.0).mu, -std::sqrt(3.0), 1e-12);
}

TEST(ModeFrequency, ZeroCouplingIsIdentity) {
  EXPECT_EQ(mode_frequency(sine_mode(), 0.7, 0.0).mu, 0.7);
  EXPECT_EQ(mode_frequency(sine_mode(), -0.2, 0.0).mu, -0.2);
}

TEST(ModeFrequency, BoundaryIsLocked) {
  for (double eps : {0.25, 1.0, 2.0}) {
    EXPECT_EQ(mode_frequency(sine_mode(), eps, eps).mu, 0.0);
    EXPECT_EQ(mode_frequency(sine_mode(), -eps, eps).mu, 0.0);
  }
}

TEST(SinClosedForm, Examples) {
  EXPECT_DOUBLE_EQ(mode_frequency_sin_closed_form(2.0, 1.0), std::sqrt(3.0));
  EXPECT_EQ(mode_frequency_sin_closed_form(0.8, 0.8), 0.0);
  EXPECT_EQ(mode_frequency_sin_closed_form(-0.8, 0.8), 0.0);
  EXPECT_DOUBLE_EQ(mode_frequency_sin_closed_form(-3.0, 1.0), -std::sqrt(8.0));
}

TEST(ModeFrequency, OracleEquivalenceSmallGrid) {
  const PeriodicFunction p = sine_mode();
  for (double eps : {0.25, 1.0}) {
    for (int i = -250; i <= 250; i += 3) {
      const double a = i / 50.0;
      EXPECT_NEAR(mode_frequency(p, a, eps).mu, mode_frequency_sin_closed_form(a, eps), 1e-7) << a;
    }
  }
}

TEST(ModeFrequency, MonotoneAndOdd) {
  const PeriodicFunction p = sine_mode();
  const PeriodicFunction t = triangle_mode();
  double prev_s = -1e300, prev_t = -1e300;
  for (int i = -300; i <= 300; ++i) {
    const double a = i / 100.0;
    const double ms = mode_frequency(p, a, 1.0).mu;
    const double mt = mode_frequency(t, a, 1.0).mu;
    EXPECT_GE(ms, prev_s);
    EXPECT_GE(mt, prev_t);
    if (std::abs(a) > 1.0) {
      EXPECT_GT(ms, prev_s);
      EXPECT_GT(mt, prev_t);
    }
    EXPECT_NEAR(ms, -mode_frequency(p, -a, 1.0).mu, 1e-13);
    prev_s = ms;
    prev_t = mt;
  }
}

TEST(ModeFrequency, AsymmetricFunctionUsesBothBranches) {
  // p(u) = sin u + 0.5: locking interval [-1.5 eps, 0.5 eps].
  const PeriodicFunction p([](double x) { return std::sin(x) + 0.5; }, 2 * kPi, "shifted");
  const LockingInterval iv = locking_interval(p, 1.0);
  EXPECT_NEAR(iv.lo, -1.5, 1e-12);
  EXPECT_NEAR(iv.hi, 0.5, 1e-12);
  EXPECT_TRUE(mode_frequency(p, -1.4, 1.0).locked);
  EXPECT_TRUE(mode_frequency(p, 0.4, 1.0).locked);
  // a + 0.5 plays the role of the sine input.
  EXPECT_NEAR(mode_frequency(p, 1.5, 1.0).mu, std::sqrt(3.0), 1e-10);
  EXPECT_NEAR(mode_frequency(p, -2.5, 1.0).mu, -std::sqrt(3.0), 1e-10);
}

TEST(OutputFrequencyVector, UniformOmegaLocksEverything) {
  const int n = 6;
  const DiagonalizableSystem sys = make_system(build_fourier_basis(n), Vector::Constant(n, 1.3), 0.1, sine_mode());
  const OutputFrequencies out = output_frequency_vector(sys);
  EXPECT_LT(out.a.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(out.mu.cwiseAbs().maxCoeff(), 0.0);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(out.Omega(i), 1.3, 1e-14);
}

TEST(OutputFrequencyVector, TwoOscillatorsLocked) {
  Vector omega(2);
  omega << 0.0, 1.0;
  const OutputFrequencies out = output_frequency_vector(make_system(build_fourier_basis(2), omega, 1.0, sine_mode()));
  EXPECT_NEAR(out.a(0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(out.mu(0), 0.0);
  EXPECT_NEAR(out.Omega(0), 0.5, 1e-15);
  EXPECT_NEAR(out.Omega(1), 0.5, 1e-15);
}

TEST(OutputFrequencyVector, TwoOscillatorsDrifting) {
  Vector omega(2);
  omega << 0.0, 2.0;
  const OutputFrequencies out = output_frequency_vector(make_system(build_fourier_basis(2), omega, 1.0, sine_mode()));
  EXPECT_NEAR(out.a(0), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(out.mu(0), 1.0, 1e-12);
  EXPECT_NEAR(out.Omega(0), 1.0 - 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(out.Omega(1), 1.0 + 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(GaussianDensity, AtomWeight) {
  // erf(1/sqrt 2), mpmath at 30 digits.
  EXPECT_NEAR(gaussian_output_density(1.0).atom_weight, 0.68268949213708590, 1e-15);
  EXPECT_THROW(gaussian_output_density(0.0), std::invalid_argument);
  EXPECT_THROW(gaussian_output_density(-1.0), std::invalid_argument);
}

TEST(GaussianDensity, NormalisedAndEven) {
  for (double eps : {0.5, 1.0, 2.0}) {
    const FrequencyDensity g = gaussian_output_density(eps);
    const auto pos = integrate_adaptive([&](double mu) { return g.continuous(mu); }, 0.0, 40.0,
                                        {1e-13, 1e-12, 4000});
    EXPECT_NEAR(g.atom_weight + 2.0 * pos.value, 1.0, 1e-6) << eps;
    for (double mu : {0.1, 0.7, 2.5}) EXPECT_EQ(g.continuous(mu), g.continuous(-mu));
    EXPECT_NEAR(g.continuous_mass(-50.0, 50.0) + g.atom_weight, 1.0, 1e-12);
  }
}

TEST(GaussianDensity, WeakCouplingTendsToGaussian) {
  const FrequencyDensity g = gaussian_output_density(1e-6);
  EXPECT_LT(g.atom_weight, 1e-6);
  for (double mu : {0.3, 1.0, 2.0}) {
    EXPECT_NEAR(g.continuous(mu), std::exp(-0.5 * mu * mu) / std::sqrt(2 * kPi), 1e-6);
  }
}

TEST(GaussianDensity, MonteCarloAtomWithinThreeStandardErrors) {
  CounterRng rng(99, 0);
  const PeriodicFunction p = sine_mode();
  const int n = 200000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += mode_frequency(p, rng.normal(), 1.0).mu == 0.0;
  const double q = gaussian_output_density(1.0).atom_weight;
  EXPECT_NEAR(static_cast<double>(zeros) / n, q, 3.0 * std::sqrt(q * (1 - q) / n));
}
