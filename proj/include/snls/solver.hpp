#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "snls/noise.hpp"
#include "snls/norms.hpp"
#include "snls/propagator.hpp"

namespace snls {

// Defocusing power nonlinearity N(u) = i |u|^{p-1} u, evaluated pointwise in
// physical space. `none()` turns the power term off entirely (linear-only
// runs and diagnostics).
struct NonlinearitySpec {
  double p = 3.0;
  bool enabled = true;

  NonlinearitySpec() = default;
  explicit NonlinearitySpec(double p_) : p(p_) {
    if (!(p >= 1.0)) throw config_error("NonlinearitySpec: need p >= 1");
  }

  static NonlinearitySpec none() {
    NonlinearitySpec spec;
    spec.enabled = false;
    return spec;
  }

  bool p_is_odd_integer() const {
    const double r = std::round(p);
    return std::abs(p - r) < 1e-12 && static_cast<long long>(r) % 2 == 1;
  }
};

// 2/3-rule dealiasing: zero every mode with |k_i| > N/3 in some dimension.
inline SpectralField dealias_two_thirds(const SpectralField& f) {
  const GridSpec& g = f.grid();
  const int kmax = g.N / 3;
  return apply_multiplier(f, [&](std::size_t, const std::array<int, 3>& k) {
    for (int i = 0; i < g.d; ++i)
      if (std::abs(k[i]) > kmax) return 0.0;
    return 1.0;
  });
}

// N(u) = i |u|^{p-1} u in physical space; returns the frequency
// representation, optionally dealiased by the 2/3 rule.
inline SpectralField nonlinearity(const SpectralField& u,
                                  const NonlinearitySpec& spec,
                                  bool dealias = false) {
  if (!spec.enabled)
    return SpectralField(u.grid(), Representation::frequency);
  SpectralField phys = u.to_physical();
  const cdouble iunit(0.0, 1.0);
  for (auto& v : phys.values()) {
    const double a = std::abs(v);
    v = iunit * std::pow(a, spec.p - 1.0) * v;
  }
  SpectralField out = phys.to_frequency();
  return dealias ? dealias_two_thirds(out) : out;
}

// Working space for the contraction metric and the fixed-point loop. The
// working norm is C_T W^{s1,r} by default, or L^q_T W^{s1,r} when time_lq is
// set (the L^q-in-time solution class).
struct SolverConfig {
  double T = 0.1;
  int steps = 64;
  int max_iters = 40;
  double tol = 1e-8;
  bool dealias = true;

  double s1 = 0.0;
  double r = 4.0;
  bool time_lq = false;
  double q_time = kInf;

  void validate() const {
    if (!(T > 0.0)) throw config_error("SolverConfig: T > 0");
    if (steps < 2) throw config_error("SolverConfig: steps >= 2");
    if (!(tol > 0.0)) throw config_error("SolverConfig: tol > 0");
    if (max_iters < 1) throw config_error("SolverConfig: max_iters >= 1");
  }

  NormSpec working_norm() const {
    return NormSpec(s1, r, time_lq ? q_time : kInf, T);
  }
};

using Trajectory = std::vector<SpectralField>;

inline Trajectory zero_trajectory(const GridSpec& g, int steps) {
  return Trajectory(steps + 1, SpectralField(g, Representation::frequency));
}

inline double trajectory_norm(const Trajectory& traj, const SolverConfig& cfg) {
  return spacetime_norm(traj, cfg.working_norm());
}

inline double trajectory_distance(const Trajectory& a, const Trajectory& b,
                                  const SolverConfig& cfg) {
  if (a.size() != b.size())
    throw config_error("trajectory_distance: length mismatch");
  Trajectory diff;
  diff.reserve(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) diff.push_back(a[j] - b[j]);
  return spacetime_norm(diff, cfg.working_norm());
}

// The Duhamel map of the residual equation:
//   (Gamma v)(t_j) = S(t_j) u0 + int_0^{t_j} S(t_j - t') N(v + Psi)(t') dt'.
//
// Using S(t_j - t') = S(t_j) S(-t'), the trapezoidal quadrature of all t_j
// prefixes is accumulated in one sweep: I_j = I_{j-1} + (dt/2)(A_{j-1} + A_j)
// with A_l = S(-t_l) N(v + Psi)(t_l), and Gamma_j = S(t_j)(u0 + I_j). This is
// algebraically identical to calling duhamel_integral at every t_j.
inline Trajectory gamma_map(const Trajectory& v, const NoisePath& psi,
                            const SpectralField& u0,
                            const NonlinearitySpec& nl,
                            const SolverConfig& cfg) {
  cfg.validate();
  if (psi.fields.size() < 2)
    throw config_error("gamma_map: noise path needs >= 2 time points");
  const std::size_t M = psi.fields.size() - 1;
  if (v.size() != psi.fields.size())
    throw config_error("gamma_map: trajectory/noise time grid mismatch");
  if (!(v.empty() || v[0].grid() == psi.grid))
    throw config_error("gamma_map: trajectory/noise grid mismatch");
  if (!(u0.grid() == psi.grid))
    throw config_error("gamma_map: data/noise grid mismatch");
  const double dt = psi.T / static_cast<double>(M);

  const SpectralField u0f = u0.to_frequency();
  Trajectory out;
  out.reserve(M + 1);
  SpectralField prefix(psi.grid, Representation::frequency);  // I_j
  SpectralField prev_a(psi.grid, Representation::frequency);  // A_{j-1}
  for (std::size_t j = 0; j <= M; ++j) {
    const double tj = psi.times[j];
    SpectralField a = evolve(nonlinearity(v[j] + psi.fields[j], nl,
                                          cfg.dealias),
                             -tj);
    if (j > 0) {
      add_scaled(prefix, 0.5 * dt, prev_a);
      add_scaled(prefix, 0.5 * dt, a);
    }
    SpectralField gamma_j = u0f + prefix;
    out.push_back(evolve(gamma_j, tj));
    prev_a = std::move(a);
  }
  return out;
}

enum class SolveStatus { converged, horizon_exceeded };

struct PicardResult {
  Trajectory v;
  int iterations = 0;
  std::vector<double> update_norms;        // ||v^{n+1} - v^n|| per iteration
  std::vector<double> contraction_ratios;  // successive update ratios
  SolveStatus status = SolveStatus::converged;
  double last_ratio = 0.0;
};

// Picard iteration of Gamma from v^0 = 0 until the relative update in the
// working norm drops below tol. Three consecutive non-contracting updates
// (ratio >= 1), or running out of iterations, raise the "existence horizon
// exceeded" signal on the result status: small enough T must succeed, and
// the caller (e.g. the existence-time probe) treats the signal as data.
inline PicardResult picard_solve(const SpectralField& u0, const NoisePath& psi,
                                 const NonlinearitySpec& nl,
                                 const SolverConfig& cfg) {
  cfg.validate();
  PicardResult res;
  res.v = zero_trajectory(psi.grid, psi.steps());
  for (int it = 0; it < cfg.max_iters; ++it) {
    Trajectory next = gamma_map(res.v, psi, u0, nl, cfg);
    const double update = trajectory_distance(next, res.v, cfg);
    res.update_norms.push_back(update);
    res.v = std::move(next);
    res.iterations = it + 1;
    if (res.update_norms.size() >= 2) {
      const double prev = res.update_norms[res.update_norms.size() - 2];
      if (prev > 0.0) {
        res.contraction_ratios.push_back(update / prev);
        res.last_ratio = res.contraction_ratios.back();
      }
    }
    const double scale = std::max(trajectory_norm(res.v, cfg), 1e-14);
    if (update <= cfg.tol * scale) {
      res.status = SolveStatus::converged;
      return res;
    }
    const auto& ratios = res.contraction_ratios;
    if (ratios.size() >= 3 &&
        ratios[ratios.size() - 1] >= 1.0 &&
        ratios[ratios.size() - 2] >= 1.0 &&
        ratios[ratios.size() - 3] >= 1.0) {
      res.status = SolveStatus::horizon_exceeded;
      return res;
    }
  }
  res.status = SolveStatus::horizon_exceeded;
  return res;
}

// First n_ratios contraction ratios without any convergence requirement:
// ratio_m = ||v^{m+1} - v^m|| / ||v^m - v^{m-1}|| starting from v^0 = 0.
inline std::vector<double> contraction_probe(const SpectralField& u0,
                                             const NoisePath& psi,
                                             const NonlinearitySpec& nl,
                                             const SolverConfig& cfg,
                                             int n_ratios = 1) {
  Trajectory v = zero_trajectory(psi.grid, psi.steps());
  std::vector<double> updates, ratios;
  for (int it = 0; it <= n_ratios; ++it) {
    Trajectory next = gamma_map(v, psi, u0, nl, cfg);
    updates.push_back(trajectory_distance(next, v, cfg));
    v = std::move(next);
    if (updates.size() >= 2) {
      const double prev = updates[updates.size() - 2];
      ratios.push_back(prev > 0.0 ? updates.back() / prev : 0.0);
    }
  }
  return ratios;
}

// Independent oracle integrator: Strang splitting. Per step of size dt:
// half-step of the exact pointwise nonlinear flow u <- u e^{i (dt/2)|u|^{p-1}},
// full linear step S(dt), half nonlinear step, then the same per-mode
// Gaussian increment the noise module would add over the step (shared seed
// lineage), so Picard and split-step integrate one identical Psi path.
inline Trajectory splitstep_solve(
    const SpectralField& u0, const NonlinearitySpec& nl,
    const SolverConfig& cfg,
    const std::vector<SpectralField>* noise_increments = nullptr) {
  cfg.validate();
  if (noise_increments &&
      static_cast<int>(noise_increments->size()) != cfg.steps)
    throw config_error("splitstep_solve: increment count != steps");
  const double dt = cfg.T / cfg.steps;

  auto nonlinear_half = [&](SpectralField freq) {
    if (!nl.enabled) return freq;
    SpectralField phys = freq.to_physical();
    for (auto& v : phys.values()) {
      const double a = std::abs(v);
      v *= std::polar(1.0, 0.5 * dt * std::pow(a, nl.p - 1.0));
    }
    return phys.to_frequency();
  };

  Trajectory traj;
  traj.reserve(cfg.steps + 1);
  SpectralField u = u0.to_frequency();
  traj.push_back(u);
  for (int j = 0; j < cfg.steps; ++j) {
    u = nonlinear_half(std::move(u));
    u = evolve(u, dt);
    u = nonlinear_half(std::move(u));
    if (noise_increments) add_scaled(u, 1.0, (*noise_increments)[j]);
    traj.push_back(u);
  }
  return traj;
}

struct ExistenceProbeResult {
  std::vector<double> ladder;        // descending horizons, dyadic
  std::vector<double> t_est;         // per path; 0 if no rung converged
  std::vector<int> iterations_used;  // at the accepted rung (0 if none)
};

// Bisection over a dyadic horizon ladder T_max, T_max/2, ..., T_max/2^{rungs-1}
// on a fixed sample path: the path is drawn once on the full grid and each
// shorter horizon solves on a prefix of the same increments (the recursion is
// prefix-stable), so T_est is a per-path quantity.
inline ExistenceProbeResult local_existence_probe(
    const SpectralField& u0, const SmoothingOperator& phi,
    const NonlinearitySpec& nl, const SolverConfig& cfg, int rungs,
    int n_paths, std::uint64_t master_seed) {
  cfg.validate();
  if (rungs < 2) throw config_error("local_existence_probe: rungs >= 2");
  if ((cfg.steps >> (rungs - 1)) < 2)
    throw config_error(
        "local_existence_probe: steps too small for ladder depth");

  ExistenceProbeResult out;
  for (int j = 0; j < rungs; ++j) out.ladder.push_back(cfg.T / (1 << j));
  out.t_est.assign(n_paths, 0.0);
  out.iterations_used.assign(n_paths, 0);

  parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t path_idx) {
    const SeedRecord seed{master_seed, path_idx};
    const std::vector<SpectralField> increments =
        sample_increments(phi, cfg.steps, cfg.T, seed);

    auto converges_at = [&](int rung, int* iters) {
      const int steps_r = cfg.steps >> rung;
      const double T_r = cfg.T / (1 << rung);
      std::span<const SpectralField> prefix(increments.data(), steps_r);
      NoisePath psi = accumulate_path(phi.grid, T_r, prefix, seed);
      SolverConfig local = cfg;
      local.T = T_r;
      local.steps = steps_r;
      PicardResult res = picard_solve(u0, psi, nl, local);
      if (iters) *iters = res.iterations;
      return res.status == SolveStatus::converged;
    };

    // rung 0 = largest horizon; feasibility is monotone in the rung under
    // the bisection assumption.
    int lo = 0, hi = rungs - 1;  // search for the smallest converging rung
    int iters = 0;
    if (converges_at(0, &iters)) {
      out.t_est[path_idx] = out.ladder[0];
      out.iterations_used[path_idx] = iters;
      return;
    }
    if (!converges_at(hi, &iters)) return;  // t_est stays 0
    // invariant: rung lo fails, rung hi converges
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (converges_at(mid, nullptr))
        hi = mid;
      else
        lo = mid;
    }
    converges_at(hi, &iters);
    out.t_est[path_idx] = out.ladder[hi];
    out.iterations_used[path_idx] = iters;
  });
  return out;
}

}  // namespace snls
