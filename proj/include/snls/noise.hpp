#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "snls/norms.hpp"
#include "snls/propagator.hpp"
#include "snls/rng.hpp"

namespace snls {

// The smoothing operator phi, realized as a diagonal Fourier multiplier
// family {lambda_k >= 0} on the normalized lattice exponentials. Any phase of
// lambda_k is absorbed into the Wiener process (Gaussian rotation
// invariance), so the multipliers are stored nonnegative.
struct SmoothingOperator {
  GridSpec grid;
  std::vector<double> multipliers;
  std::string label;

  static SmoothingOperator zero(const GridSpec& g) {
    return {g, std::vector<double>(g.size(), 0.0), "zero"};
  }

  // lambda_k = 1_{|xi_k| <= K}.
  static SmoothingOperator spectral_cutoff(const GridSpec& g, double K) {
    SmoothingOperator op{g, std::vector<double>(g.size(), 0.0),
                         "cutoff:K=" + std::to_string(K)};
    for_each_mode(g, [&](std::size_t flat, const std::array<int, 3>& k) {
      if (xi_abs(g, k) <= K) op.multipliers[flat] = 1.0;
    });
    return op;
  }

  // lambda_k = (1 + |2 pi xi_k|^2)^{-alpha/2}, optionally truncated at
  // |xi_k| <= K. The construction-time check alpha > s + d/2 is the
  // continuum summability criterion for phi in HS(L^2; H^s) at the declared
  // operating regularity s.
  static SmoothingOperator power_law(const GridSpec& g, double alpha,
                                     double declared_s,
                                     double K = kInf) {
    if (!(alpha > declared_s + 0.5 * g.d))
      throw config_error(
          "SmoothingOperator::power_law: need alpha > s + d/2 for "
          "HS(L^2; H^s); got alpha = " +
          std::to_string(alpha) + ", s = " + std::to_string(declared_s));
    SmoothingOperator op{g, std::vector<double>(g.size(), 0.0),
                         "powerlaw:alpha=" + std::to_string(alpha)};
    for_each_mode(g, [&](std::size_t flat, const std::array<int, 3>& k) {
      if (xi_abs(g, k) <= K)
        op.multipliers[flat] = std::pow(1.0 + omega_sq(g, k), -0.5 * alpha);
    });
    if (K != kInf) op.label += ":K=" + std::to_string(K);
    return op;
  }

  static SmoothingOperator single_mode(const GridSpec& g,
                                       const std::array<int, 3>& mode,
                                       double lambda) {
    SmoothingOperator op{g, std::vector<double>(g.size(), 0.0),
                         "single_mode"};
    bool found = false;
    for_each_mode(g, [&](std::size_t flat, const std::array<int, 3>& k) {
      if (k == mode) {
        op.multipliers[flat] = lambda;
        found = true;
      }
    });
    if (!found) throw config_error("single_mode: mode outside lattice");
    return op;
  }

  SmoothingOperator scaled(double c) const {
    if (!(c >= 0.0))
      throw config_error("SmoothingOperator::scaled: multipliers stay >= 0");
    SmoothingOperator op = *this;
    for (auto& l : op.multipliers) l *= c;
    op.label += ":scaled=" + std::to_string(c);
    return op;
  }
};

// ||phi||_{HS(L^2; H^s)} = (sum_k (1 + |2 pi xi_k|^2)^s lambda_k^2)^{1/2}
// over the truncated lattice.
inline double hs_norm(const SmoothingOperator& phi, double s) {
  double acc = 0.0;
  for_each_mode(phi.grid, [&](std::size_t flat, const std::array<int, 3>& k) {
    const double l = phi.multipliers[flat];
    if (l != 0.0) acc += std::pow(1.0 + omega_sq(phi.grid, k), s) * l * l;
  });
  return std::sqrt(acc);
}

// One sampled trajectory of the stochastic convolution on the uniform grid
// t_j = j T / M. Fields are in frequency representation; Psi(t_0) = 0
// exactly. Replaying the seed record reproduces the path bit-for-bit.
struct NoisePath {
  GridSpec grid;
  double T = 0.0;
  std::vector<double> times;
  std::vector<SpectralField> fields;
  SeedRecord seed;

  int steps() const { return static_cast<int>(times.size()) - 1; }
  double dt() const { return steps() > 0 ? T / steps() : 0.0; }
};

// Per-step stochastic increments lambda_k g_{k,j} with g_{k,j} i.i.d.
// mean-zero complex Gaussians of variance dt. One coefficient is consumed per
// lattice mode per step regardless of lambda, so paths driven by different
// phi share the same underlying noise when given the same seed.
inline std::vector<SpectralField> sample_increments(const SmoothingOperator& phi,
                                                    int steps, double T,
                                                    SeedRecord seed) {
  if (steps < 1) throw config_error("sample_increments: need steps >= 1");
  if (!(T > 0.0)) throw config_error("sample_increments: need T > 0");
  const double dt = T / steps;
  Philox4x32 rng = make_rng(seed);
  std::vector<SpectralField> inc;
  inc.reserve(steps);
  for (int j = 0; j < steps; ++j) {
    SpectralField z(phi.grid, Representation::frequency);
    auto v = z.values();
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = phi.multipliers[i] * complex_gaussian(rng, dt);
    inc.push_back(std::move(z));
  }
  return inc;
}

// Exact-in-distribution recursion per Fourier mode:
//   Psi_k(t_{j+1}) = e^{i dt |2 pi xi_k|^2} Psi_k(t_j) + lambda_k g_{k,j}.
// Each Duhamel increment of the Wiener integral is a Gaussian of variance
// lambda_k^2 dt because the group is a unimodular multiplier, so no time
// discretization error is incurred at the grid times.
inline NoisePath accumulate_path(const GridSpec& grid, double T,
                                 std::span<const SpectralField> increments,
                                 SeedRecord seed) {
  const int steps = static_cast<int>(increments.size());
  if (steps < 1) throw config_error("accumulate_path: need >= 1 increment");
  const double dt = T / steps;

  std::vector<cdouble> rotation(grid.size());
  for_each_mode(grid, [&](std::size_t flat, const std::array<int, 3>& k) {
    rotation[flat] = std::polar(1.0, dt * omega_sq(grid, k));
  });

  NoisePath path;
  path.grid = grid;
  path.T = T;
  path.seed = seed;
  path.times.resize(steps + 1);
  path.fields.reserve(steps + 1);
  path.fields.emplace_back(grid, Representation::frequency);  // Psi(0) = 0
  for (int j = 0; j < steps; ++j) {
    path.times[j] = j * dt;
    SpectralField next(grid, Representation::frequency);
    auto out = next.values();
    auto prev = path.fields.back().values();
    auto z = increments[j].values();
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = rotation[i] * prev[i] + z[i];
    path.fields.push_back(std::move(next));
  }
  path.times[steps] = T;
  return path;
}

inline NoisePath sample_convolution(const SmoothingOperator& phi, int steps,
                                    double T, SeedRecord seed) {
  return accumulate_path(phi.grid, T, sample_increments(phi, steps, T, seed),
                         seed);
}

// A deterministic noise path Psi == 0 on the given grid (phi = 0 shortcut for
// deterministic runs).
inline NoisePath zero_path(const GridSpec& grid, int steps, double T) {
  NoisePath path;
  path.grid = grid;
  path.T = T;
  path.times.resize(steps + 1);
  for (int j = 0; j <= steps; ++j) path.times[j] = T * j / steps;
  path.fields.assign(steps + 1,
                     SpectralField(grid, Representation::frequency));
  return path;
}

// Shifted convolution: Psi~(t_j) = S(t_j) u0_omega + Psi(t_j); solves the
// linear forced equation with initial data u0_omega, so Psi~(0) = u0_omega.
inline NoisePath shifted_convolution(const SmoothingOperator& phi,
                                     const SpectralField& u0_omega, int steps,
                                     double T, SeedRecord seed) {
  NoisePath path = sample_convolution(phi, steps, T, seed);
  const SpectralField u0f = u0_omega.to_frequency();
  for (int j = 0; j <= steps; ++j) {
    SpectralField lin = evolve(u0f, path.times[j]);
    add_scaled(path.fields[j], 1.0, lin);
  }
  return path;
}

// Empirical check of the complex Gaussian moment identity
// E|g|^{2j} = j! sigma^j, with sigma the (empirical) variance E|g|^2.
struct MomentReport {
  int j = 1;
  std::size_t n = 0;
  double sigma_hat = 0.0;
  double empirical = 0.0;
  double predicted = 0.0;
  double z_score = 0.0;
};

inline MomentReport gaussian_moment_check(std::span<const cdouble> samples,
                                          int j) {
  if (j < 1) throw config_error("gaussian_moment_check: need j >= 1");
  if (samples.size() < 2)
    throw config_error("gaussian_moment_check: need >= 2 samples");
  const std::size_t n = samples.size();
  std::vector<double> pow2j(n), pow2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a2 = std::norm(samples[i]);
    pow2[i] = a2;
    pow2j[i] = std::pow(a2, j);
  }
  MomentReport rep;
  rep.j = j;
  rep.n = n;
  rep.sigma_hat = mean(pow2);
  rep.empirical = mean(pow2j);
  double fact = 1.0;
  for (int i = 2; i <= j; ++i) fact *= i;
  rep.predicted = fact * std::pow(rep.sigma_hat, j);
  const double se = std::sqrt(sample_variance(pow2j) / static_cast<double>(n));
  rep.z_score = se > 0.0 ? (rep.empirical - rep.predicted) / se : 0.0;
  return rep;
}

}  // namespace snls
