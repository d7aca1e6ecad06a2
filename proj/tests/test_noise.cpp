#include <gtest/gtest.h>

#include <vector>

#include "snls/noise.hpp"
#include "snls/parallel.hpp"

namespace {

using namespace snls;

TEST(HsNorm, SingleModeAndFlatSpectrum) {
  GridSpec g(1, 2.0, 16);
  SmoothingOperator one = SmoothingOperator::single_mode(g, {0, 0, 0}, 1.0);
  for (double s : {-1.0, 0.0, 2.5}) EXPECT_DOUBLE_EQ(hs_norm(one, s), 1.0);

  // lambda == 1 on all N modes at s = 0 gives sqrt(N)
  SmoothingOperator flat = SmoothingOperator::spectral_cutoff(g, kInf);
  EXPECT_NEAR(hs_norm(flat, 0.0), std::sqrt(static_cast<double>(g.size())),
              1e-12);

  SmoothingOperator cut = SmoothingOperator::spectral_cutoff(g, 2.0);
  // modes with |k|/L <= 2: k in {-4,...,4} -> 9 modes
  EXPECT_NEAR(hs_norm(cut, 0.0), 3.0, 1e-12);
}

TEST(HsNorm, PowerLawMatchesDirectSummation) {
  GridSpec g(2, 1.5, 16);
  const double alpha = 2.0, s = 0.4;
  SmoothingOperator phi = SmoothingOperator::power_law(g, alpha, s);
  double acc = 0.0;
  for_each_mode(g, [&](std::size_t, const std::array<int, 3>& k) {
    const double w = omega_sq(g, k);
    acc += std::pow(1.0 + w, s) * std::pow(1.0 + w, -alpha);
  });
  EXPECT_NEAR(hs_norm(phi, s), std::sqrt(acc), 1e-12 * std::sqrt(acc));
}

TEST(SmoothingOperator, PowerLawEnforcesSummability) {
  GridSpec g(2, 1.0, 16);
  EXPECT_NO_THROW(SmoothingOperator::power_law(g, 1.5, 0.0));
  EXPECT_THROW(SmoothingOperator::power_law(g, 1.0, 0.0), config_error);
  EXPECT_THROW(SmoothingOperator::power_law(g, 1.5, 0.6), config_error);
}

TEST(SampleConvolution, ZeroOperatorGivesZeroPath) {
  GridSpec g(1, 1.0, 16);
  NoisePath path = sample_convolution(SmoothingOperator::zero(g), 8, 1.0,
                                      {123, 0});
  for (const auto& f : path.fields) EXPECT_EQ(l2_norm(f), 0.0);
}

TEST(SampleConvolution, StartsAtZeroAndReplaysBitForBit) {
  GridSpec g(1, 2.0, 32);
  SmoothingOperator phi = SmoothingOperator::power_law(g, 1.0, 0.0);
  NoisePath a = sample_convolution(phi, 16, 0.5, {99, 3});
  NoisePath b = sample_convolution(phi, 16, 0.5, {99, 3});
  EXPECT_EQ(l2_norm(a.fields[0]), 0.0);
  ASSERT_EQ(a.fields.size(), b.fields.size());
  for (std::size_t j = 0; j < a.fields.size(); ++j)
    for (std::size_t i = 0; i < a.fields[j].size(); ++i)
      EXPECT_EQ(a.fields[j][i], b.fields[j][i]);  // bitwise
}

TEST(SampleConvolution, PathsIdenticalAcrossWorkerCounts) {
  GridSpec g(1, 2.0, 32);
  SmoothingOperator phi = SmoothingOperator::power_law(g, 1.0, 0.0);
  auto run = [&](int threads) {
    std::vector<NoisePath> paths(8, NoisePath{});
    parallel_for(paths.size(), [&](std::size_t i) {
      paths[i] = sample_convolution(phi, 8, 0.3, {2024, i});
    }, threads);
    return paths;
  };
  const auto one = run(1);
  const auto four = run(4);
  for (std::size_t p = 0; p < one.size(); ++p)
    for (std::size_t j = 0; j < one[p].fields.size(); ++j)
      for (std::size_t i = 0; i < one[p].fields[j].size(); ++i)
        EXPECT_EQ(one[p].fields[j][i], four[p].fields[j][i]);
}

// Ito isometry: per-mode variance lambda_k^2 t at every stored time, checked
// on 5 modes spanning low to high frequency with 10^4 paths.
TEST(SampleConvolution, ItoIsometryPerMode) {
  GridSpec g(1, 2.0, 64);
  SmoothingOperator phi = SmoothingOperator::power_law(g, 1.0, 0.0);
  const int n_paths = 10000, M = 16;
  const double T = 0.5;
  const std::size_t probes[5] = {0, 1, 8, 16, 32};  // bins: k=0,1,8,16,-32
  const std::size_t times[3] = {4, 9, 16};

  std::vector<std::vector<double>> sq(std::size(probes) * std::size(times));
  for (auto& v : sq) v.assign(n_paths, 0.0);
  parallel_for(n_paths, [&](std::size_t p) {
    NoisePath path = sample_convolution(phi, M, T, {777, p});
    for (std::size_t a = 0; a < std::size(probes); ++a)
      for (std::size_t b = 0; b < std::size(times); ++b)
        sq[a * std::size(times) + b][p] =
            std::norm(path.fields[times[b]][probes[a]]);
  });
  for (std::size_t a = 0; a < std::size(probes); ++a) {
    const double lambda = phi.multipliers[probes[a]];
    for (std::size_t b = 0; b < std::size(times); ++b) {
      const auto& v = sq[a * std::size(times) + b];
      const double expected = lambda * lambda * (T * times[b] / M);
      const double m = mean(v);
      const double se = std::sqrt(sample_variance(v) / n_paths);
      EXPECT_NEAR(m, expected, 3.0 * se)
          << "mode bin " << probes[a] << " time index " << times[b];
    }
  }
}

// Independent fine Euler-Maruyama oracle for the single-mode variance: the
// exact sampler, the hand formula lambda^2 T, and the EM endpoint variance
// must all agree within joint 3 SE.
TEST(SampleConvolution, EulerMaruyamaOracleAgrees) {
  GridSpec g(1, 2.0, 16);
  const std::array<int, 3> mode{1, 0, 0};
  const double lambda = 0.8, T = 0.7;
  SmoothingOperator phi = SmoothingOperator::single_mode(g, mode, lambda);
  const double omega = omega_sq(g, mode);

  const int n_paths = 4000;
  std::vector<double> exact_sq(n_paths), em_sq(n_paths);
  parallel_for(n_paths, [&](std::size_t p) {
    NoisePath path = sample_convolution(phi, 8, T, {31337, p});
    exact_sq[p] = std::norm(path.fields.back()[1]);

    // EM on d c = i omega c dt + lambda d beta. The scheme amplifies the
    // variance by ~exp(omega^2 dt T), so the step count must keep
    // omega^2 dt T well below 1.
    Philox4x32 rng(31338, p);
    const int em_steps = 20000;
    const double dt = T / em_steps;
    cdouble c = 0.0;
    for (int l = 0; l < em_steps; ++l)
      c += cdouble(0.0, omega * dt) * c + lambda * complex_gaussian(rng, dt);
    em_sq[p] = std::norm(c);
  });
  const double expected = lambda * lambda * T;
  const double m_exact = mean(exact_sq);
  const double m_em = mean(em_sq);
  const double se_exact = std::sqrt(sample_variance(exact_sq) / n_paths);
  const double se_em = std::sqrt(sample_variance(em_sq) / n_paths);
  EXPECT_NEAR(m_exact, expected, 3.0 * se_exact);
  EXPECT_NEAR(m_em, expected, 3.0 * se_em + 0.01 * expected);  // EM bias O(dt)
  EXPECT_NEAR(m_exact, m_em, 3.0 * std::hypot(se_exact, se_em) +
                                 0.01 * expected);
}

// Two-time covariance: |E[c(t) conj(c(t'))]| = lambda^2 min(t, t').
TEST(SampleConvolution, TwoTimeCovariance) {
  GridSpec g(1, 2.0, 16);
  const std::array<int, 3> mode{2, 0, 0};
  const double lambda = 1.3, T = 1.0;
  SmoothingOperator phi = SmoothingOperator::single_mode(g, mode, lambda);

  const int n_paths = 20000, M = 10;
  const std::size_t j1 = 4, j2 = 9;  // t = 0.4, t' = 0.9
  std::vector<double> re(n_paths), im(n_paths);
  parallel_for(n_paths, [&](std::size_t p) {
    NoisePath path = sample_convolution(phi, M, T, {5150, p});
    const cdouble prod =
        path.fields[j1][2] * std::conj(path.fields[j2][2]);
    re[p] = prod.real();
    im[p] = prod.imag();
  });
  const cdouble cov(mean(re), mean(im));
  const double expected = lambda * lambda * 0.4;  // min(t, t')
  const double se = std::hypot(std::sqrt(sample_variance(re) / n_paths),
                               std::sqrt(sample_variance(im) / n_paths));
  EXPECT_NEAR(std::abs(cov), expected, 3.0 * se);
}

// Gaussianity of the marginals: kurtosis of Re c within 3 SE of 3, real and
// imaginary parts uncorrelated.
TEST(SampleConvolution, MarginalsAreGaussian) {
  GridSpec g(1, 2.0, 16);
  const std::array<int, 3> mode{5, 0, 0};
  SmoothingOperator phi = SmoothingOperator::single_mode(g, mode, 1.0);
  const int n_paths = 10000;
  std::vector<double> res(n_paths), ims(n_paths);
  parallel_for(n_paths, [&](std::size_t p) {
    NoisePath path = sample_convolution(phi, 8, 1.0, {8888, p});
    res[p] = path.fields.back()[5].real();
    ims[p] = path.fields.back()[5].imag();
  });
  const double v = sample_variance(res);
  std::vector<double> z4(n_paths), cross(n_paths);
  for (int i = 0; i < n_paths; ++i) {
    z4[i] = res[i] * res[i] * res[i] * res[i];
    cross[i] = res[i] * ims[i];
  }
  const double kurt = mean(z4) / (v * v);
  EXPECT_NEAR(kurt, 3.0, 3.0 * std::sqrt(24.0 / n_paths));
  const double corr =
      mean(cross) / std::sqrt(v * sample_variance(ims));
  EXPECT_NEAR(corr, 0.0, 3.0 / std::sqrt(1.0 * n_paths));
}

// The recursion is exact, not a discretization: variance estimates from M and
// 2M step ensembles agree within joint 3 SE.
TEST(SampleConvolution, StepSizeInvariantInDistribution) {
  GridSpec g(1, 2.0, 16);
  const std::array<int, 3> mode{1, 0, 0};
  SmoothingOperator phi = SmoothingOperator::single_mode(g, mode, 1.0);
  const double T = 1.0;
  const int n_paths = 20000;
  auto endpoint_sq = [&](int steps, std::uint64_t master) {
    std::vector<double> sq(n_paths);
    parallel_for(n_paths, [&](std::size_t p) {
      NoisePath path = sample_convolution(phi, steps, T, {master, p});
      sq[p] = std::norm(path.fields.back()[1]);
    });
    return sq;
  };
  const auto coarse = endpoint_sq(8, 101);
  const auto fine = endpoint_sq(16, 202);
  const double mc = mean(coarse), mf = mean(fine);
  const double se = std::hypot(std::sqrt(sample_variance(coarse) / n_paths),
                               std::sqrt(sample_variance(fine) / n_paths));
  EXPECT_NEAR(mc, mf, 3.0 * se);
}

// Parseval sum of the isometry: E ||Psi(t)||_{H^s}^2 = t ||phi||_{HS}^2.
TEST(SampleConvolution, ExpectedSobolevNormMatchesHsNorm) {
  GridSpec g(1, 2.0, 64);
  const double s = 0.3;
  SmoothingOperator phi = SmoothingOperator::power_law(g, 1.5, s);
  const double T = 0.8;
  const int n_paths = 4000, M = 8;
  std::vector<double> sq(n_paths);
  parallel_for(n_paths, [&](std::size_t p) {
    NoisePath path = sample_convolution(phi, M, T, {424242, p});
    const double n = sobolev_norm(path.fields.back(), s, 2.0);
    sq[p] = n * n;
  });
  const double expected = T * hs_norm(phi, s) * hs_norm(phi, s);
  const double se = std::sqrt(sample_variance(sq) / n_paths);
  EXPECT_NEAR(mean(sq), expected, 3.0 * se);
}

TEST(ShiftedConvolution, ReducesToLinearEvolutionAndToPlainPath) {
  GridSpec g(1, 4.0, 32);
  Philox4x32 rng(1, 0);
  SpectralField u0(g, Representation::frequency);
  for (auto& v : u0.values()) v = complex_gaussian(rng, 1.0);

  // phi = 0: pure linear evolution of the data
  NoisePath lin = shifted_convolution(SmoothingOperator::zero(g), u0, 8, 0.5,
                                      {7, 0});
  for (std::size_t j = 0; j < lin.fields.size(); ++j) {
    SpectralField expect = evolve(u0, lin.times[j]);
    EXPECT_LE(l2_norm(lin.fields[j] - expect), 1e-12 * l2_norm(expect));
  }

  // u0 = 0: reduces to the plain stochastic convolution
  SmoothingOperator phi = SmoothingOperator::power_law(g, 1.0, 0.0);
  SpectralField zero(g, Representation::frequency);
  NoisePath a = shifted_convolution(phi, zero, 8, 0.5, {7, 1});
  NoisePath b = sample_convolution(phi, 8, 0.5, {7, 1});
  for (std::size_t j = 0; j < a.fields.size(); ++j)
    EXPECT_LE(l2_norm(a.fields[j] - b.fields[j]), 1e-14);

  // both nonzero: elementwise sum of the separately sampled parts on the
  // same seed lineage
  NoisePath both = shifted_convolution(phi, u0, 8, 0.5, {7, 2});
  NoisePath noise_only = sample_convolution(phi, 8, 0.5, {7, 2});
  EXPECT_LE(l2_norm(both.fields[0] - u0), 1e-12 * l2_norm(u0));
  for (std::size_t j = 0; j < both.fields.size(); ++j) {
    SpectralField expect = noise_only.fields[j] + evolve(u0, both.times[j]);
    EXPECT_LE(l2_norm(both.fields[j] - expect), 1e-12 * l2_norm(expect));
  }
}

TEST(GaussianMomentCheck, IdentityAtJOneAndFactorialGrowth) {
  Philox4x32 rng(2718, 0);
  std::vector<cdouble> samples(100000);
  for (auto& z : samples) z = complex_gaussian(rng, 1.0);

  const MomentReport r1 = gaussian_moment_check(samples, 1);
  EXPECT_NEAR(r1.empirical, r1.predicted, 1e-12);  // identity by construction
  EXPECT_NEAR(r1.z_score, 0.0, 1e-9);

  const MomentReport r2 = gaussian_moment_check(samples, 2);
  EXPECT_NEAR(r2.predicted, 2.0 * r2.sigma_hat * r2.sigma_hat, 1e-12);
  EXPECT_LE(std::abs(r2.z_score), 3.0);

  const MomentReport r3 = gaussian_moment_check(samples, 3);
  EXPECT_LE(std::abs(r3.z_score), 3.0);
  EXPECT_NEAR(r3.empirical, 6.0, 0.3);  // j! sigma^j with sigma = 1

  EXPECT_THROW(gaussian_moment_check(samples, 0), config_error);
}

TEST(NoisePath, IncrementPrefixesAreConsistent) {
  // Solving on [0, T/2] with the first half of the increments reproduces the
  // first half of the full path (the recursion is prefix-stable).
  GridSpec g(1, 2.0, 16);
  SmoothingOperator phi = SmoothingOperator::power_law(g, 1.0, 0.0);
  const SeedRecord seed{555, 0};
  const auto inc = sample_increments(phi, 16, 1.0, seed);
  NoisePath full = accumulate_path(g, 1.0, inc, seed);
  NoisePath half = accumulate_path(
      g, 0.5, std::span<const SpectralField>(inc.data(), 8), seed);
  for (int j = 0; j <= 8; ++j)
    EXPECT_LE(l2_norm(half.fields[j] - full.fields[j]), 1e-15);
}

}  // namespace
