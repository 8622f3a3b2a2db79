#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "diagosc/dynamics.hpp"
#include "diagosc/random.hpp"

using namespace diagosc;

namespace {

constexpr double kPi = std::numbers::pi;

Vector random_vector(CounterRng& rng, int n, double scale = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

Vector pair(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(Integrate, UncoupledFlowIsLinear) {
  CounterRng rng(1, 0);
  const DiagonalizableSystem sys = make_system(build_fourier_basis(4), random_vector(rng, 4), 0.0, sine_mode());
  const Vector theta0 = random_vector(rng, 4);
  const Trajectory tr = integrate_system(sys, theta0, 50.0);
  const Vector expected = theta0 + 50.0 * sys.omega;
  EXPECT_LT((tr.states.back() - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Integrate, ScalarModeAdvancesOnePeriodPerT) {
  // u' = 2 + sin u winds by 2 pi every T = 2 pi / sqrt(3).
  const double period = 2 * kPi / std::sqrt(3.0);
  StepControl ctl;
  ctl.rel_tol = 1e-12;
  ctl.abs_tol = 1e-12;
  ctl.output_interval = period / 8;
  const Trajectory tr = integrate([](const Vector& u) -> Vector {
    Vector d(1);
    d(0) = 2.0 + std::sin(u(0));
    return d;
  }, Vector::Constant(1, 0.3), 10 * period, ctl);
  for (std::size_t i = 0; i + 8 < tr.size(); ++i) {
    EXPECT_NEAR(tr.states[i + 8](0) - tr.states[i](0), 2 * kPi, 1e-6);
  }
}

TEST(Integrate, TwoOscillatorsLockToConstantDifference) {
  const DiagonalizableSystem sys = make_system(build_fourier_basis(2), pair(0.0, 1.0), 1.0, sine_mode());
  StepControl ctl;
  ctl.rel_tol = 1e-12;
  ctl.abs_tol = 1e-12;
  ctl.output_interval = 1.0;
  const Trajectory tr = integrate_system(sys, pair(0.0, 2.5), 60.0, ctl);
  const auto diff = [&](std::size_t i) { return tr.states[i](1) - tr.states[i](0); };
  EXPECT_NEAR(diff(tr.size() - 1), diff(tr.size() - 10), 1e-8);
  // Equilibrium of the phase difference: a = 1/sqrt2 + sin(u) = 0 with u = diff/sqrt2.
  EXPECT_NEAR(std::sin(diff(tr.size() - 1) / std::sqrt(2.0)), -1.0 / std::sqrt(2.0), 1e-8);
}

TEST(EstimateFrequencies, LinearTrajectoryIsExact) {
  Trajectory tr;
  const Vector omega = pair(0.3, -1.7);
  for (int i = 0; i <= 100; ++i) {
    tr.times.push_back(0.5 * i);
    tr.states.push_back(omega * (0.5 * i) + pair(1.0, 2.0));
  }
  const FrequencyEstimate est = estimate_output_frequencies(tr);
  EXPECT_NEAR(est.omega(0), 0.3, 1e-13);
  EXPECT_NEAR(est.omega(1), -1.7, 1e-13);
  EXPECT_LT(est.std_error.maxCoeff(), 1e-10);
  EXPECT_EQ(est.points, 81);
}

TEST(EstimateFrequencies, WindowTooShort) {
  Trajectory tr;
  tr.times = {0.0, 1.0};
  tr.states = {pair(0, 0), pair(1, 1)};
  EXPECT_THROW(estimate_output_frequencies(tr), std::invalid_argument);
  tr.times.push_back(2.0);
  tr.states.push_back(pair(2, 2));
  EXPECT_THROW(estimate_output_frequencies(tr, 0.9), std::invalid_argument);
  EXPECT_THROW(estimate_output_frequencies(tr, 1.0), std::invalid_argument);
}

TEST(EstimateFrequencies, TwoOscillatorDriftMatchesAnalytic) {
  const DiagonalizableSystem sys = make_system(build_fourier_basis(2), pair(0.0, 2.0), 1.0, sine_mode());
  const InstanceReport rep = simulate_instance(sys, pair(0.1, -0.4), 2000.0);
  EXPECT_NEAR(rep.empirical.omega(0), 1.0 - 1.0 / std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(rep.empirical.omega(1), 1.0 + 1.0 / std::sqrt(2.0), 1e-3);
  EXPECT_EQ(rep.empirical_class.tag, CoherenceTag::Incoherent);
  EXPECT_EQ(rep.analytic_class.tag, CoherenceTag::Incoherent);
}

TEST(EstimateFrequencies, LockedCaseGivesMeanFrequency) {
  const DiagonalizableSystem sys = make_system(build_fourier_basis(2), pair(0.0, 1.0), 1.0, sine_mode());
  const InstanceReport rep = simulate_instance(sys, pair(0.0, 0.0), 2000.0);
  EXPECT_NEAR(rep.empirical.omega(0), 0.5, 1e-3);
  EXPECT_NEAR(rep.empirical.omega(1), 0.5, 1e-3);
  EXPECT_EQ(rep.empirical_class.tag, CoherenceTag::Coherent);
}

TEST(Classify, Trichotomy) {
  EXPECT_EQ(classify(Vector::Constant(5, 0.7)).tag, CoherenceTag::Coherent);
  Vector spread(4);
  spread << 0.0, 1.0, 2.0, 3.5;
  const CoherenceClass inc = classify(spread);
  EXPECT_EQ(inc.tag, CoherenceTag::Incoherent);
  EXPECT_TRUE(inc.locked_pairs.empty());
  Vector partial(3);
  partial << 1.0, 1.0, 2.0;
  const CoherenceClass pc = classify(partial);
  EXPECT_EQ(pc.tag, CoherenceTag::PartiallyCoherent);
  ASSERT_EQ(pc.locked_pairs.size(), 1u);
  EXPECT_EQ(pc.locked_pairs[0], std::make_pair(0, 1));
}

TEST(Classify, ToleranceScalesWithMagnitude) {
  Vector om(2);
  om << 1000.0, 1000.5;
  EXPECT_EQ(classify(om, 1e-3).tag, CoherenceTag::Coherent);
  EXPECT_EQ(classify(om, 1e-4).tag, CoherenceTag::Incoherent);
}

TEST(VerifySeparation, DiscrepancyIsIntegratorError) {
  CounterRng rng(3, 0);
  for (int n : {3, 4}) {
    const DiagonalizableSystem sys = make_system(build_fourier_basis(n), random_vector(rng, n), 1.0, sine_mode());
    const SeparationReport rep = verify_separation(sys, random_vector(rng, n), 100.0);
    EXPECT_LT(rep.max_discrepancy, 1e-6) << n;
    EXPECT_LT(rep.max_v_deviation, 1e-8) << n;
    EXPECT_EQ(rep.samples, 1001u);
  }
}

TEST(VerifySeparation, UncoupledIsAtRoundoff) {
  CounterRng rng(4, 0);
  const DiagonalizableSystem sys = make_system(build_fourier_basis(5), random_vector(rng, 5), 0.0, sine_mode());
  EXPECT_LT(verify_separation(sys, random_vector(rng, 5), 100.0).max_discrepancy, 1e-10);
}

TEST(Dynamics, InitialConditionIndependence) {
  CounterRng rng(5, 0);
  const DiagonalizableSystem sys = make_system(build_fourier_basis(4), random_vector(rng, 4), 0.8, sine_mode());
  std::vector<Vector> estimates;
  for (int rep = 0; rep < 10; ++rep) {
    estimates.push_back(simulate_instance(sys, random_vector(rng, 4, 3.0), 2000.0).empirical.omega);
  }
  for (std::size_t i = 1; i < estimates.size(); ++i) {
    EXPECT_LT((estimates[i] - estimates[0]).cwiseAbs().maxCoeff(), 1e-3);
  }
}

TEST(Dynamics, AnalyticAndSimulatedClassesAgree) {
  CounterRng rng(6, 0);
  int agree = 0, considered = 0;
  for (int rep = 0; rep < 24; ++rep) {
    const int n = 2 + rep % 7;
    const DiagonalizableSystem sys = make_system(build_fourier_basis(n), random_vector(rng, n), 0.5 + 0.25 * (rep % 4), sine_mode());
    const InstanceReport r = simulate_instance(sys, random_vector(rng, n), 2000.0);
    if (r.any_marginal()) continue;
    ++considered;
    agree += r.analytic_class.tag == r.empirical_class.tag;
    EXPECT_LT(r.max_frequency_error, 1e-3);
  }
  EXPECT_EQ(agree, considered);
  EXPECT_GE(considered, 20);
}

TEST(Dynamics, MarginalFlags) {
  const DiagonalizableSystem sys = make_system(build_fourier_basis(2), pair(0.0, std::sqrt(2.0) * 1.0005), 1.0, sine_mode());
  const OutputFrequencies out = output_frequency_vector(sys);
  EXPECT_TRUE(marginal_modes(sys, out.a, out.mu)[0]);
  const DiagonalizableSystem far = make_system(build_fourier_basis(2), pair(0.0, 3.0), 1.0, sine_mode());
  const OutputFrequencies fo = output_frequency_vector(far);
  EXPECT_FALSE(marginal_modes(far, fo.a, fo.mu, 1e-3, 1600.0)[0]);
  // Slow winding: mu ~ 0.05 winds ~13 times over 1600.
  const DiagonalizableSystem slow = make_system(build_fourier_basis(2), pair(0.0, std::sqrt(2.0) * 1.00125), 1.0, sine_mode());
  const OutputFrequencies so = output_frequency_vector(slow);
  EXPECT_FALSE(marginal_modes(slow, so.a, so.mu)[0]);
  EXPECT_TRUE(marginal_modes(slow, so.a, so.mu, 1e-3, 1600.0)[0]);
}

TEST(Trajectory, CsvHasHeaderAndRows) {
  Trajectory tr;
  tr.times = {0.0, 0.5};
  tr.states = {pair(0.0, 1.0), pair(0.25, 1.5)};
  std::ostringstream out;
  write_trajectory_csv(out, tr);
  EXPECT_EQ(out.str(), "t,theta_1,theta_2\n0,0,1\n0.5,0.25,1.5\n");
}
