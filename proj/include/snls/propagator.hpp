#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "snls/fit.hpp"
#include "snls/norms.hpp"
#include "snls/parallel.hpp"

namespace snls {

// Free Schroedinger group S(t) = e^{-it Laplacian}.
//
// Sign convention (used everywhere in this library): u(t) = S(t) u0 solves
// i du/dt = Laplacian u. On the lattice this is frequency-side multiplication
// by exp(+i t |2 pi xi_k|^2). The group is unitary and S(t1)S(t2) = S(t1+t2)
// holds at floating-point accuracy.
inline SpectralField evolve(const SpectralField& f, double t) {
  if (t == 0.0 && f.representation() == Representation::frequency) return f;
  const GridSpec& g = f.grid();
  return apply_multiplier(f, [&](std::size_t, const std::array<int, 3>& k) {
    return std::polar(1.0, t * omega_sq(g, k));
  });
}

// L^2 defect || S(t1+t2) f - S(t1) S(t2) f ||; contract: <= 1e-12 ||f||.
// The floor is set by the rounding of the phase argument t |2 pi xi|^2, so
// the defect grows like eps * |t| * omega_max; the contract holds on windows
// with |t| * omega_max up to ~4e3.
inline double group_property_check(const SpectralField& f, double t1,
                                   double t2) {
  const SpectralField once = evolve(f, t1 + t2);
  const SpectralField twice = evolve(evolve(f, t2), t1);
  return l2_norm(once - twice);
}

// Schroedinger admissibility: 2/q + d/r = d/2 with 2 <= q, r <= inf and
// (q, r, d) != (2, inf, 2).
inline bool is_admissible(double q, double r, int d) {
  if (!(q >= 2.0) || !(r >= 2.0))
    throw config_error("is_admissible: need 2 <= q, r");
  if (d < 1) throw config_error("is_admissible: need d >= 1");
  if (q == 2.0 && r == kInf && d == 2) return false;
  const double lhs = (q == kInf ? 0.0 : 2.0 / q) + (r == kInf ? 0.0 : d / r);
  return std::abs(lhs - 0.5 * d) <= 1e-12;
}

// Fraction of |f|^2-mass inside the margin band of total width L/8 at the
// box edge (per axis: within L/16 of the periodic boundary). Used as the
// wrap-around fidelity gate for decay fits on R^d-type data.
inline double edge_band_mass_fraction(const SpectralField& f) {
  const SpectralField p = f.to_physical();
  const GridSpec& g = p.grid();
  const double margin = g.L / 16.0;
  double band = 0.0, total = 0.0;
  for_each_point(g, [&](std::size_t flat, const std::array<double, 3>& x) {
    const double m = std::norm(p[flat]);
    total += m;
    for (int i = 0; i < g.d; ++i) {
      if (x[i] < margin || x[i] >= g.L - margin) {
        band += m;
        break;
      }
    }
  });
  return total > 0.0 ? band / total : 0.0;
}

inline constexpr double kWrapMassTolerance = 1e-6;

struct DecaySample {
  double t = 0.0;
  double norm_r = 0.0;   // ||S(t) f||_{L^r}
  double ratio = 0.0;    // ||S(t) f||_{L^r} |t|^{d/2-d/r} / ||f||_{L^{r'}}
};

struct DecayFit {
  FitReport fit;                      // slope of log||S(t)f||_{L^r} vs log t
  std::vector<DecaySample> samples;
  double dual_norm = 0.0;             // ||f||_{L^{r'}}
  double max_ratio = 0.0;
};

// Fit of the dispersive decay exponent: least squares of log||S(t)f||_{L^r}
// against log t over the supplied times; the predicted exponent is
// -(d/2 - d/r). All times must sit inside the wrap-around fidelity window
// (edge-band mass below 1e-6 of the total), otherwise the periodic images
// have already destroyed the decay and the fit is refused.
inline DecayFit dispersive_decay_fit(const SpectralField& f, double r,
                                     std::span<const double> times,
                                     SeedRecord seed = {0x5eed, 0}) {
  if (times.size() < 4)
    throw config_error("dispersive_decay_fit: need >= 4 times");
  const int d = f.grid().d;
  const double rp = (r == kInf) ? 1.0 : r / (r - 1.0);  // Hoelder conjugate
  const double predicted = -(0.5 * d - (r == kInf ? 0.0 : d / r));

  DecayFit out;
  out.dual_norm = sobolev_norm(f, 0.0, rp);
  for (double t : times)
    if (!(t > 0.0))
      throw config_error("dispersive_decay_fit: times must be > 0");

  // evaluations at distinct times are independent; results land in
  // time-ordered slots so the fit never depends on scheduling
  out.samples.assign(times.size(), DecaySample{});
  parallel_for(times.size(), [&](std::size_t i) {
    const double t = times[i];
    SpectralField ut = evolve(f, t);
    const double band = edge_band_mass_fraction(ut);
    if (band > kWrapMassTolerance)
      throw hypothesis_error(
          "dispersive_decay_fit: t outside the wrap-around fidelity window "
          "(edge-band mass fraction " +
          std::to_string(band) + " at t = " + std::to_string(t) + ")");
    DecaySample s;
    s.t = t;
    s.norm_r = sobolev_norm(ut, 0.0, r);
    s.ratio = out.dual_norm > 0.0
                  ? s.norm_r * std::pow(t, -predicted) / out.dual_norm
                  : 0.0;
    out.samples[i] = s;
  });
  std::vector<double> ts, ns;
  for (const DecaySample& s : out.samples) {
    out.max_ratio = std::max(out.max_ratio, s.ratio);
    ts.push_back(s.t);
    ns.push_back(s.norm_r);
  }
  out.fit = fit_power_law(ts, ns, seed);
  out.fit.exponent_predicted = predicted;
  return out;
}

// Geometric time ladder with at least `per_decade` points per decade.
inline std::vector<double> geometric_times(double t_min, double t_max,
                                           int per_decade = 8) {
  if (!(t_min > 0.0) || !(t_max > t_min))
    throw config_error("geometric_times: need 0 < t_min < t_max");
  const double decades = std::log10(t_max / t_min);
  const int n = std::max(4, static_cast<int>(std::ceil(per_decade * decades)) + 1);
  std::vector<double> ts(n);
  for (int i = 0; i < n; ++i)
    ts[i] = t_min * std::pow(t_max / t_min, static_cast<double>(i) / (n - 1));
  return ts;
}

// Trapezoidal Duhamel quadrature of int_0^t S(t - t') F(t') dt' for a forcing
// history stored on the uniform grid t_j = j dt covering [0, t]. Second order
// in dt for smooth F.
inline SpectralField duhamel_integral(const std::vector<SpectralField>& F,
                                      double dt, double t) {
  if (F.size() < 2)
    throw config_error("duhamel_integral: need >= 2 stored slices");
  if (!(dt > 0.0)) throw config_error("duhamel_integral: need dt > 0");
  const double horizon = dt * static_cast<double>(F.size() - 1);
  if (t > horizon * (1.0 + 1e-9))
    throw config_error("duhamel_integral: t beyond stored horizon");
  const double jr = t / dt;
  const auto j = static_cast<std::size_t>(std::llround(jr));
  if (std::abs(jr - static_cast<double>(j)) > 1e-9)
    throw config_error("duhamel_integral: t is not a stored grid time");

  SpectralField acc(F[0].grid(), Representation::frequency);
  if (j == 0) return acc;
  for (std::size_t l = 0; l <= j; ++l) {
    const double w = (l == 0 || l == j) ? 0.5 * dt : dt;
    add_scaled(acc, w, evolve(F[l], t - l * dt));
  }
  return acc;
}

}  // namespace snls
