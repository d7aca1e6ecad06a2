#pragma once

#include <cmath>
#include <string>

#include "snls/field.hpp"
#include "snls/norms.hpp"
#include "snls/solver.hpp"

namespace snls {

// Gaussian bump centered in the box: u0(x) = amplitude * exp(-|x - c|^2/(2a)).
// Small width a gives peaked data whose free evolution reaches the asymptotic
// dispersive regime quickly.
inline SpectralField gaussian_profile(const GridSpec& g, double width_a = 0.1,
                                      double amplitude = 1.0) {
  if (!(width_a > 0.0)) throw config_error("gaussian_profile: width > 0");
  SpectralField f(g, Representation::physical);
  const double c = 0.5 * g.L;
  for_each_point(g, [&](std::size_t flat, const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int i = 0; i < g.d; ++i) r2 += (x[i] - c) * (x[i] - c);
    f[flat] = amplitude * std::exp(-r2 / (2.0 * width_a));
  });
  return f;
}

// Rough profile with aligned phases: coefficients c_k proportional to
// (1 + |2 pi xi_k|^2)^{-beta/2}, modulated to center the focal point at the
// middle of the box, filled up to band_limit_xi (default: the grid's full
// range). For s + d/2 < beta <= s + d the H^s norm stays bounded under grid
// refinement while the W^{s,r} peak grows for large r, which is the regime
// the randomization gain is visible in.
inline SpectralField rough_profile(const GridSpec& g, double beta = 1.5,
                                   double amplitude = 1.0,
                                   double band_limit_xi = kInf) {
  SpectralField f(g, Representation::frequency);
  const double c = 0.5 * g.L;
  for_each_mode(g, [&](std::size_t flat, const std::array<int, 3>& k) {
    if (xi_abs(g, k) > band_limit_xi) return;
    double phase = 0.0;
    for (int i = 0; i < g.d; ++i) phase -= two_pi * (k[i] / g.L) * c;
    f[flat] = amplitude * std::pow(1.0 + omega_sq(g, k), -0.5 * beta) *
              std::polar(1.0, phase);
  });
  return f;
}

inline SpectralField zero_profile(const GridSpec& g) {
  return SpectralField(g, Representation::physical);
}

inline SpectralField make_profile(const std::string& name, const GridSpec& g,
                                  double param1 = 0.0, double param2 = 1.0) {
  if (name == "gaussian")
    return gaussian_profile(g, param1 > 0.0 ? param1 : 0.1, param2);
  if (name == "rough")
    return rough_profile(g, param1 > 0.0 ? param1 : 1.5, param2);
  if (name == "zero") return zero_profile(g);
  throw config_error("unknown profile preset: " + name);
}

// Parameter bundle for one of the local well-posedness regimes. Solving
// happens in the space where the contraction closes:
//   ia: C_T L^{p+1}                (energy-subcritical, data above d/2-d/(p+1))
//   ib: L^q_T L^{p+1}              (energy-subcritical, data above s_crit)
//   ii: C_T W^{s1, 2d/(d-2)-delta} (energy-critical/supercritical, odd p)
struct CaseParams {
  std::string name;
  int d = 2;
  double p = 4.0;
  double s0 = 0.0;      // data regularity
  double s = 0.0;       // noise regularity (phi in HS(L^2; H^s))
  double s1 = 0.0;      // residual regularity
  double r = 5.0;       // working spatial exponent
  bool time_lq = false;
  double q_time = kInf;

  void apply(SolverConfig& cfg) const {
    cfg.s1 = s1;
    cfg.r = r;
    cfg.time_lq = time_lq;
    cfg.q_time = q_time;
  }
};

// q for the L^q-in-time class, from 1/q + 1 = (d/2 - d/(p+1) + eps) + p/q.
inline double case_ib_q(int d, double p, double eps = 0.05) {
  const double a = 0.5 * d - d / (p + 1.0) + eps;
  const double denom = 1.0 - a;
  if (!(denom > 0.0)) throw config_error("case_ib_q: exponent relation fails");
  return (p - 1.0) / denom;
}

inline CaseParams make_case(const std::string& which, int d, double p,
                            double s0 = -1.0, double s = -1.0,
                            double delta = 0.1, double eps = 0.05) {
  CaseParams cp;
  cp.name = which;
  cp.d = d;
  cp.p = p;
  const double scrit = scaling_critical_regularity(d, p, 2.0);
  if (which == "ia" || which == "ib") {
    if (!(p > 1.0 + 4.0 / d))
      throw config_error("case " + which + ": needs mass-supercritical p > 1 + 4/d");
    if (d >= 3 && !(p < 1.0 + 4.0 / (d - 2)))
      throw config_error("case " + which + ": needs p < 1 + 4/(d-2) when d >= 3");
    cp.s = (s >= 0.0) ? s : 0.0;
    cp.s1 = 0.0;
    cp.r = p + 1.0;
    if (which == "ia") {
      const double s0_min = 0.5 * d - d / (p + 1.0);
      cp.s0 = (s0 >= 0.0) ? s0 : s0_min;
      if (cp.s0 < s0_min - 1e-12)
        throw config_error("case ia: needs s0 >= d/2 - d/(p+1)");
    } else {
      cp.s0 = (s0 >= 0.0) ? s0 : scrit + 0.1;
      // equality admitted: s0 = s_crit is the endpoint probe, which only
      // reports whether the existence bisection succeeds
      if (!(cp.s0 >= scrit - 1e-12))
        throw config_error("case ib: needs s0 >= s_crit");
      cp.time_lq = true;
      cp.q_time = case_ib_q(d, p, eps);
    }
  } else if (which == "ii") {
    if (d < 3) throw config_error("case ii: needs d >= 3");
    if (!(p >= 1.0 + 4.0 / (d - 2)))
      throw config_error("case ii: needs p >= 1 + 4/(d-2)");
    if (!NonlinearitySpec(p).p_is_odd_integer())
      throw config_error("case ii: needs odd integer p");
    cp.s0 = (s0 >= 0.0) ? s0 : scrit + 0.1;
    cp.s = (s >= 0.0) ? s : scrit - 1.0 + 0.1;
    if (!(cp.s0 > scrit)) throw config_error("case ii: needs s0 > s_crit");
    if (!(cp.s > scrit - 1.0))
      throw config_error("case ii: needs s > s_crit - 1");
    cp.s1 = std::min(cp.s0 - 1.0, cp.s);
    cp.r = 2.0 * d / (d - 2.0) - delta;
  } else {
    throw config_error("unknown case preset: " + which + " (expected ia|ib|ii)");
  }
  return cp;
}

}  // namespace snls
