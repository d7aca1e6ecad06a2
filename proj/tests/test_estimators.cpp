#include <gtest/gtest.h>

#include <json.hpp>
#include <vector>

#include "snls/estimators.hpp"
#include "snls/io.hpp"

namespace {

using namespace snls;

TEST(FitPowerLaw, ExactLawsRecovered) {
  std::vector<double> xs{1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<double> ys = xs;
  FitReport fit = fit_power_law(xs, ys);
  EXPECT_NEAR(fit.exponent_hat, 1.0, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_TRUE(fit.ci_95.contains(fit.exponent_hat));

  std::vector<double> flat(xs.size(), 3.7);
  FitReport zero = fit_power_law(xs, flat);
  EXPECT_NEAR(zero.exponent_hat, 0.0, 1e-12);
}

TEST(FitPowerLaw, NoisySlopeWithinTolerance) {
  Philox4x32 rng(99, 0);
  std::vector<double> xs, ys;
  for (int i = 0; i < 24; ++i) {
    const double x = std::pow(10.0, i / 8.0);
    const double noise = 1.0 + 0.01 * (2.0 * uniform01(rng) - 1.0);
    xs.push_back(x);
    ys.push_back(std::pow(x, 1.5) * noise);
  }
  FitReport fit = fit_power_law(xs, ys);
  EXPECT_NEAR(fit.exponent_hat, 1.5, 0.05);
  EXPECT_TRUE(fit.ci_95.contains(fit.exponent_hat));
  EXPECT_GE(fit.r_squared, 0.99);
}

TEST(FitPowerLaw, RejectsBadInput) {
  std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  std::vector<double> bad{1.0, -2.0, 3.0, 4.0};
  EXPECT_THROW(fit_power_law(xs, bad), config_error);
  std::vector<double> three{1.0, 2.0, 3.0};
  EXPECT_THROW(fit_power_law(three, three), config_error);
}

TrajectorySampler constant_sampler(const GridSpec& g, double value) {
  return [g, value](std::uint64_t) {
    SpectralField f(g, Representation::physical);
    double scale = value;
    for (int i = 0; i < g.d; ++i) scale /= std::sqrt(g.L);
    for (auto& v : f.values()) v = scale;
    return std::vector<SpectralField>(3, f);
  };
}

TEST(McNormMoment, DegenerateSamplers) {
  GridSpec g(1, 2.0, 16);
  const NormSpec norm(0.0, 2.0, 4.0, 1.0);
  MomentEstimate zero = mc_norm_moment(constant_sampler(g, 0.0), norm, 2.0,
                                       40, {1, 0});
  EXPECT_EQ(zero.estimate, 0.0);

  for (double rho : {1.0, 2.0, 7.0}) {
    MomentEstimate c = mc_norm_moment(constant_sampler(g, 1.3), norm, rho, 40,
                                      {1, 0});
    EXPECT_NEAR(c.estimate, 1.3, 1e-12);
    EXPECT_LE(c.stderr_boot, 1e-12);
  }
  EXPECT_THROW(mc_norm_moment(constant_sampler(g, 1.0), norm, 0.5, 40, {1, 0}),
               config_error);
  EXPECT_THROW(mc_norm_moment(constant_sampler(g, 1.0), norm, 2.0, 10, {1, 0}),
               config_error);
}

// Hand integration of the Ito isometry in time: for a single mode,
// E ||Psi||^2_{L^2_T L^2_x} = int_0^T lambda^2 t dt = lambda^2 T^2 / 2,
// and the trapezoidal rule is exact for the linear integrand.
TEST(McNormMoment, SingleModeClosedForm) {
  GridSpec g(1, 2.0, 16);
  const double lambda = 0.9, T = 1.4;
  SmoothingOperator phi =
      SmoothingOperator::single_mode(g, {2, 0, 0}, lambda);
  const NormSpec norm(0.0, 2.0, 2.0, T);
  const int steps = 12;
  TrajectorySampler sampler = [&](std::uint64_t replica) {
    return sample_convolution(phi, steps, T, {5150, replica}).fields;
  };
  MomentEstimate est = mc_norm_moment(sampler, norm, 2.0, 3000, {5150, 77});
  const double closed = std::sqrt(lambda * lambda * T * T / 2.0);
  EXPECT_NEAR(est.estimate, closed, 3.0 * est.stderr_boot);
}

TEST(McNormMoment, MonotoneInRho) {
  GridSpec g(1, 2.0, 16);
  SmoothingOperator phi = SmoothingOperator::power_law(g, 1.0, 0.0);
  const NormSpec norm(0.0, 2.0, 2.0, 1.0);
  TrajectorySampler sampler = [&](std::uint64_t replica) {
    return sample_convolution(phi, 8, 1.0, {31, replica}).fields;
  };
  double prev = 0.0;
  for (double rho : {1.0, 2.0, 4.0, 8.0}) {
    MomentEstimate est = mc_norm_moment(sampler, norm, rho, 200, {31, 99});
    EXPECT_GE(est.estimate, prev - 1e-12);
    prev = est.estimate;
    EXPECT_EQ(est.rho_meets_minkowski, rho >= 2.0);
  }
}

TEST(McNormMoment, BootstrapStderrHalvesWhenQuadruplingSamples) {
  GridSpec g(1, 2.0, 16);
  SmoothingOperator phi = SmoothingOperator::power_law(g, 1.0, 0.0);
  const NormSpec norm(0.0, 2.0, 2.0, 1.0);
  TrajectorySampler sampler = [&](std::uint64_t replica) {
    return sample_convolution(phi, 8, 1.0, {617, replica}).fields;
  };
  MomentEstimate small = mc_norm_moment(sampler, norm, 2.0, 150, {617, 1});
  MomentEstimate big = mc_norm_moment(sampler, norm, 2.0, 600, {617, 2});
  const double ratio = big.stderr_boot / small.stderr_boot;
  EXPECT_GE(ratio, 0.35);
  EXPECT_LE(ratio, 0.7);
}

TEST(VerifyLemma21, HypothesisGate) {
  GridSpec g2(2, 2.0, 16);
  GridSpec g3(3, 2.0, 8);
  const std::vector<double> ladder{0.1, 0.2, 0.4, 0.8};
  SmoothingOperator phi2 = SmoothingOperator::power_law(g2, 2.0, 0.0);
  SmoothingOperator phi3 = SmoothingOperator::power_law(g3, 2.0, 0.0);

  EXPECT_THROW(verify_lemma21(SmoothingOperator::zero(g2), 0.0, 8.0, 4.0,
                              ladder, 2.0, 30, 8, 1),
               hypothesis_error);
  EXPECT_THROW(verify_lemma21(phi2, 0.0, kInf, 4.0, ladder, 2.0, 30, 8, 1),
               hypothesis_error);
  EXPECT_THROW(verify_lemma21(phi2, 0.0, 8.0, kInf, ladder, 2.0, 30, 8, 1),
               hypothesis_error);
  // r <= 2d/(d-2) = 6 required at d = 3
  EXPECT_THROW(verify_lemma21(phi3, 0.0, 8.0, 6.5, ladder, 2.0, 30, 8, 1),
               hypothesis_error);
  EXPECT_NO_THROW(verify_lemma21(phi3, 0.0, 8.0, 6.0, ladder, 2.0, 30, 4, 1));
}

TEST(VerifyLemma21, PositiveThetaAndExactHomogeneity) {
  GridSpec g(2, 2.0, 16);
  SmoothingOperator phi = SmoothingOperator::power_law(g, 2.0, 0.0);
  std::vector<double> ladder;
  for (int i = 0; i < 5; ++i) ladder.push_back(0.1 * std::pow(10.0, i / 4.0));
  Lemma21Report rep =
      verify_lemma21(phi, 0.0, 8.0, 4.0, ladder, 2.0, 60, 12, 4242);
  EXPECT_GT(rep.theta_fit.exponent_hat, 0.0);
  EXPECT_GT(rep.theta_fit.ci_95.lo, 0.0);  // CI excludes 0
  EXPECT_NEAR(rep.homogeneity_ratio, 2.0, 1e-10);  // pathwise linearity
  EXPECT_FALSE(rep.rho_meets_minkowski);  // rho = 2 < max(q, r) = 8
}

TEST(Reports, ByteIdenticalAcrossSeedsAndThreads) {
  GridSpec g(2, 2.0, 16);
  SmoothingOperator phi = SmoothingOperator::power_law(g, 2.0, 0.0);
  const std::vector<double> ladder{0.1, 0.2, 0.4, 0.8};
  auto run = [&](int threads) {
    set_default_threads(threads);
    Lemma21Report rep =
        verify_lemma21(phi, 0.0, 8.0, 4.0, ladder, 2.0, 40, 8, 777);
    nlohmann::json j = io::fit_to_json(rep.theta_fit);
    j["estimates"] = rep.estimates;
    j["stderrs"] = rep.stderrs;
    j["homogeneity"] = rep.homogeneity_ratio;
    return j.dump();
  };
  const std::string a = run(1);
  const std::string b = run(4);
  set_default_threads(0);
  EXPECT_EQ(a, b);
}

}  // namespace
