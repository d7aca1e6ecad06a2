#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "snls/field.hpp"

namespace snls {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// A space-time norm request: L^q([0,T]; W^{s,r}). r = inf and q = inf are
// first-class values and are evaluated as grid/time maxima (lower bounds on
// the continuum suprema).
struct NormSpec {
  double s = 0.0;
  double r = 2.0;
  double q = kInf;
  double T = 1.0;

  NormSpec() = default;
  NormSpec(double s_, double r_, double q_, double T_)
      : s(s_), r(r_), q(q_), T(T_) {
    validate();
  }

  void validate() const {
    if (!(r >= 2.0)) throw config_error("NormSpec: r must satisfy r >= 2");
    if (!(q >= 1.0)) throw config_error("NormSpec: q must satisfy q >= 1");
    if (!(T > 0.0)) throw config_error("NormSpec: T must be > 0");
  }
};

inline double japanese_bracket(double omega_sq_value, double s) {
  return std::pow(1.0 + omega_sq_value, 0.5 * s);
}

// <nabla>^s on the lattice: frequency-side multiplication by
// (1 + |2 pi xi_k|^2)^{s/2}, with the continuum symbol. s = 0 is the identity.
inline SpectralField japanese_bracket_multiplier(const SpectralField& f,
                                                 double s) {
  if (s == 0.0) return f;
  const GridSpec& g = f.grid();
  return apply_multiplier(f, [&](std::size_t, const std::array<int, 3>& k) {
    return japanese_bracket(omega_sq(g, k), s);
  });
}

// || <nabla>^s f ||_{L^r}. The L^r quadrature carries weight (L/N)^d per
// lattice point; r = inf returns the grid max modulus. r >= 1 is accepted so
// the dual exponents r' in [1, 2] needed by the dispersive ratio are
// available.
inline double sobolev_norm(const SpectralField& f, double s, double r) {
  if (!(r >= 1.0)) throw config_error("sobolev_norm: r must satisfy r >= 1");
  SpectralField g = japanese_bracket_multiplier(f.to_frequency(), s);
  if (r == 2.0) {
    return l2_norm(g);  // Plancherel, no synthesis needed
  }
  SpectralField p = g.to_physical();
  if (r == kInf) return max_abs(p);
  double acc = 0.0;
  for (const auto& v : p.values()) acc += std::pow(std::abs(v), r);
  acc *= f.grid().cell_volume();
  return std::pow(acc, 1.0 / r);
}

// Discrete homogeneous Sobolev norm; the k = 0 mode is omitted (for negative
// s its symbol is singular).
inline double homogeneous_sobolev_norm(const SpectralField& f, double s) {
  SpectralField g = f.to_frequency();
  const GridSpec& grid = f.grid();
  double acc = 0.0;
  for_each_mode(grid, [&](std::size_t flat, const std::array<int, 3>& k) {
    double w = omega_sq(grid, k);
    if (w == 0.0) return;
    acc += std::pow(w, s) * std::norm(g[flat]);
  });
  return std::sqrt(acc);
}

// L^q([0,T]; W^{s,r}) of a trajectory sampled on the uniform time grid
// t_j = j T / M, j = 0..M. Composite trapezoidal rule in time on
// sobolev_norm(.)^q; q = inf is the max over grid times.
inline double spacetime_norm(const std::vector<SpectralField>& traj,
                             const NormSpec& spec) {
  spec.validate();
  if (traj.size() < 2)
    throw config_error("spacetime_norm: need at least 2 time points");
  const std::size_t M = traj.size() - 1;
  const double dt = spec.T / static_cast<double>(M);
  if (spec.q == kInf) {
    double m = 0.0;
    for (const auto& f : traj) m = std::max(m, sobolev_norm(f, spec.s, spec.r));
    return m;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j <= M; ++j) {
    double w = (j == 0 || j == M) ? 0.5 : 1.0;
    acc += w * std::pow(sobolev_norm(traj[j], spec.s, spec.r), spec.q);
  }
  return std::pow(acc * dt, 1.0 / spec.q);
}

// s_crit(r) = d/r - 2/(p-1); r = 2 gives the dilation-critical regularity
// d/2 - 2/(p-1).
inline double scaling_critical_regularity(int d, double p, double r) {
  if (!(p > 1.0))
    throw config_error("scaling_critical_regularity: need p > 1");
  if (!(r >= 1.0))
    throw config_error("scaling_critical_regularity: need r >= 1");
  const double dr = (r == kInf) ? 0.0 : d / r;
  return dr - 2.0 / (p - 1.0);
}

}  // namespace snls
