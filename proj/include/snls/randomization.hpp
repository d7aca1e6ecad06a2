#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "snls/noise.hpp"
#include "snls/norms.hpp"
#include "snls/propagator.hpp"

namespace snls {

enum class CoefficientLaw { complex_gaussian, bernoulli };

enum class Window {
  raised_cosine,  // psi(xi) = prod_i cos^2(pi xi_i / 2) on [-1,1]^d
  constant_one    // diagnostic window: psi == 1 on cube 0, else 0
};

// The unit-scale (Wiener) randomization: window psi forming an exact
// partition of unity on the frequency lattice, plus the law of the i.i.d.
// coefficients g_n. Both built-in laws are mean zero with independent real
// and imaginary parts and sub-Gaussian tails (standard complex Gaussians;
// random signs are bounded), so they satisfy the required exponential moment
// bound.
struct RandomizationSpec {
  Window window = Window::raised_cosine;
  CoefficientLaw law = CoefficientLaw::complex_gaussian;
  double sigma2 = 1.0;  // E|g_n|^2

  void validate() const {
    if (!(sigma2 > 0.0)) throw config_error("RandomizationSpec: sigma2 > 0");
  }
};

// One-dimensional window factor c(x); supp c = [-1, 1] and
// sum_n c(x - n) == 1 exactly for the raised cosine.
inline double window_factor(Window w, double x) {
  if (w == Window::constant_one) return 1.0;
  if (std::abs(x) >= 1.0) return 0.0;
  const double c = std::cos(0.5 * std::numbers::pi * x);
  return c * c;
}

// psi(xi - n) as a product over dimensions.
inline double window_weight(Window w, const GridSpec& g,
                            const std::array<int, 3>& k,
                            const std::array<int, 3>& n) {
  double weight = 1.0;
  for (int i = 0; i < g.d; ++i) {
    const double xi = static_cast<double>(k[i]) / g.L;
    weight *= window_factor(w, xi - n[i]);
    if (weight == 0.0) return 0.0;
  }
  return weight;
}

// The lexicographic box of cube centers n whose windows can intersect the
// grid's frequency range.
struct CubeRange {
  int d = 1;
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};  // inclusive

  std::size_t count() const {
    std::size_t c = 1;
    for (int i = 0; i < d; ++i)
      c *= static_cast<std::size_t>(hi[i] - lo[i] + 1);
    return c;
  }

  std::size_t index_of(const std::array<int, 3>& n) const {
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i)
      idx = idx * static_cast<std::size_t>(hi[i] - lo[i] + 1) +
            static_cast<std::size_t>(n[i] - lo[i]);
    return idx;
  }

  std::array<int, 3> decode(std::size_t idx) const {
    std::array<int, 3> n{0, 0, 0};
    for (int i = d - 1; i >= 0; --i) {
      const int span = hi[i] - lo[i] + 1;
      n[i] = lo[i] + static_cast<int>(idx % span);
      idx /= span;
    }
    return n;
  }
};

inline CubeRange cube_range(const GridSpec& g) {
  CubeRange range;
  range.d = g.d;
  // xi_i in [-N/(2L), (N/2 - 1)/L]; windows reach one unit past each end.
  const double xi_lo = -g.N / (2.0 * g.L);
  const double xi_hi = (g.N / 2.0 - 1.0) / g.L;
  for (int i = 0; i < g.d; ++i) {
    range.lo[i] = static_cast<int>(std::floor(xi_lo)) - 1;
    range.hi[i] = static_cast<int>(std::ceil(xi_hi)) + 1;
  }
  return range;
}

// Largest deviation of sum_n psi(xi - n) from 1 over the frequency lattice.
inline double partition_of_unity_defect(const GridSpec& g, Window w) {
  const CubeRange range = cube_range(g);
  double defect = 0.0;
  for_each_mode(g, [&](std::size_t, const std::array<int, 3>& k) {
    double total = 0.0;
    for (std::size_t c = 0; c < range.count(); ++c)
      total += window_weight(w, g, k, range.decode(c));
    defect = std::max(defect, std::abs(total - 1.0));
  });
  return defect;
}

// Frequency-side multiplication by psi(xi - n): the smoothed projection onto
// the unit cube centered at n.
inline SpectralField cube_project(const SpectralField& u0,
                                  const std::array<int, 3>& n,
                                  const RandomizationSpec& spec) {
  const GridSpec& g = u0.grid();
  return apply_multiplier(u0, [&](std::size_t, const std::array<int, 3>& k) {
    return window_weight(spec.window, g, k, n);
  });
}

// Draws the i.i.d. cube coefficients in the fixed lexicographic enumeration
// order of `range`, one coefficient per cube regardless of occupancy.
inline std::vector<cdouble> draw_cube_coefficients(const RandomizationSpec& spec,
                                                   const CubeRange& range,
                                                   SeedRecord seed) {
  spec.validate();
  Philox4x32 rng = make_rng(seed);
  std::vector<cdouble> g(range.count());
  const double sigma = std::sqrt(spec.sigma2);
  for (auto& v : g) {
    if (spec.law == CoefficientLaw::complex_gaussian) {
      v = complex_gaussian(rng, spec.sigma2);
    } else {
      v = (uniform01(rng) < 0.5) ? cdouble(-sigma, 0.0) : cdouble(sigma, 0.0);
    }
  }
  return g;
}

// sum_n g_n psi(D - n) u0 for a given coefficient vector indexed in the
// cube_range enumeration order. An empty span means g_n == 1, which by the
// partition of unity reproduces u0 exactly (diagnostic mode).
inline SpectralField wiener_combine(const SpectralField& u0,
                                    const RandomizationSpec& spec,
                                    std::span<const cdouble> coeff) {
  const GridSpec& g = u0.grid();
  const CubeRange range = cube_range(g);
  if (!coeff.empty() && coeff.size() != range.count())
    throw config_error("wiener_combine: coefficient count != cube count");

  return apply_multiplier(u0, [&](std::size_t, const std::array<int, 3>& k) {
    // Only the <= 2^d cubes with |xi_i - n_i| < 1 contribute.
    cdouble factor = 0.0;
    std::array<int, 3> n{0, 0, 0};
    std::array<int, 3> base{0, 0, 0};
    for (int i = 0; i < g.d; ++i)
      base[i] = static_cast<int>(
          std::floor(static_cast<double>(k[i]) / g.L));
    const int combos = 1 << g.d;
    for (int c = 0; c < combos; ++c) {
      for (int i = 0; i < g.d; ++i) n[i] = base[i] + ((c >> i) & 1);
      bool inside = true;
      for (int i = 0; i < g.d; ++i)
        inside = inside && n[i] >= range.lo[i] && n[i] <= range.hi[i];
      if (!inside) continue;
      const double w = window_weight(spec.window, g, k, n);
      if (w == 0.0) continue;
      factor += (coeff.empty() ? cdouble(1.0) : coeff[range.index_of(n)]) * w;
    }
    return factor;
  });
}

// u0^omega = sum_n g_n(omega) psi(D - n) u0 over the cubes meeting the grid's
// frequency range, with i.i.d. coefficients drawn from the configured law.
inline SpectralField wiener_randomize(const SpectralField& u0,
                                      const RandomizationSpec& spec,
                                      SeedRecord seed,
                                      bool unit_coefficients = false) {
  if (unit_coefficients) return wiener_combine(u0, spec, {});
  const std::vector<cdouble> coeff =
      draw_cube_coefficients(spec, cube_range(u0.grid()), seed);
  return wiener_combine(u0, spec, coeff);
}

// Closed-form E||u0^omega||_{H^s}^2 = sigma^2 sum_n ||psi(D-n) u0||_{H^s}^2,
// evaluated by direct summation (independence + mean zero).
inline double randomized_expected_sq_norm(const SpectralField& u0,
                                          const RandomizationSpec& spec,
                                          double s) {
  const GridSpec& g = u0.grid();
  const CubeRange range = cube_range(g);
  double total = 0.0;
  for (std::size_t c = 0; c < range.count(); ++c) {
    const SpectralField piece = cube_project(u0, range.decode(c), spec);
    const double ns = sobolev_norm(piece, s, 2.0);
    total += ns * ns;
  }
  return spec.sigma2 * total;
}

struct TailFit {
  double c_hat = 0.0;        // slope of -log P(X > kappa) vs kappa^2
  double ratio_min = 0.0;    // spread of log P / kappa^2 over the top decile
  double ratio_max = 0.0;
  int n_tail = 0;
};

// Sub-Gaussian tail diagnostic on the top decile of a sample: regresses
// log P(X > kappa) on kappa^2 and reports the spread of the pointwise ratio.
inline TailFit subgaussian_tail_fit(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n < 30) throw config_error("subgaussian_tail_fit: need >= 30 samples");
  std::vector<double> k2, logp, ratio;
  const std::size_t start = n - n / 10;
  for (std::size_t i = start; i + 1 < n; ++i) {
    const double kappa = xs[i];
    if (!(kappa > 0.0)) continue;
    const double survival = static_cast<double>(n - 1 - i) / n;
    k2.push_back(kappa * kappa);
    logp.push_back(std::log(survival));
    ratio.push_back(std::log(survival) / (kappa * kappa));
  }
  if (k2.size() < 3) throw config_error("subgaussian_tail_fit: tail too short");
  TailFit fit;
  const LinearFit lf = linear_fit(k2, logp);
  fit.c_hat = -lf.slope;
  fit.ratio_min = *std::min_element(ratio.begin(), ratio.end());
  fit.ratio_max = *std::max_element(ratio.begin(), ratio.end());
  fit.n_tail = static_cast<int>(k2.size());
  return fit;
}

struct StrichartzProbeReport {
  NormSpec norm;
  std::size_t n_samples = 0;
  double median = 0.0;
  double q90 = 0.0;    // upper decile boundary
  double q99 = 0.0;
  TailFit tail;
  std::vector<double> samples;  // sorted
};

// Monte Carlo sample of ||S(t) u0^omega||_{L^q_T W^{s,r}} across
// randomizations. Each replica derives its own stream from the master seed;
// trajectories are evaluated on `time_steps` uniform intervals of [0, T].
inline StrichartzProbeReport randomized_strichartz_probe(
    const SpectralField& u0, const RandomizationSpec& spec,
    const NormSpec& norm, int n_samples, int time_steps, SeedRecord seed) {
  if (norm.q == kInf || norm.r == kInf)
    throw hypothesis_error("randomized_strichartz_probe: q, r must be finite");
  if (n_samples < 30)
    throw config_error("randomized_strichartz_probe: need >= 30 samples");
  if (time_steps < 2)
    throw config_error("randomized_strichartz_probe: need >= 2 time steps");

  std::vector<double> xs(n_samples);
  const SpectralField u0f = u0.to_frequency();
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
    SpectralField sample = wiener_randomize(
        u0f, spec, {seed.master_seed, seed.stream + i});
    std::vector<SpectralField> traj;
    traj.reserve(time_steps + 1);
    for (int j = 0; j <= time_steps; ++j)
      traj.push_back(evolve(sample, norm.T * j / time_steps));
    xs[i] = spacetime_norm(traj, norm);
  });

  StrichartzProbeReport rep;
  rep.norm = norm;
  rep.n_samples = xs.size();
  std::sort(xs.begin(), xs.end());
  rep.median = detail::percentile(xs, 0.5);
  rep.q90 = detail::percentile(xs, 0.9);
  rep.q99 = detail::percentile(xs, 0.99);
  if (xs.back() > 0.0) rep.tail = subgaussian_tail_fit(xs);
  rep.samples = std::move(xs);
  return rep;
}

}  // namespace snls
