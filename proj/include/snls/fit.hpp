#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snls/errors.hpp"
#include "snls/parallel.hpp"
#include "snls/rng.hpp"

namespace snls {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return lo <= x && x <= hi; }
};

// Result of a least-squares power-law (or decay-exponent) fit plus the
// bootstrap confidence data the verification reports are built from.
struct FitReport {
  double exponent_hat = 0.0;
  std::optional<double> exponent_predicted;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
  Interval ci_95;
  std::map<std::string, std::string> metadata;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LinearFit linear_fit(std::span<const double> xs,
                            std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n)
    throw config_error("linear_fit: need >= 2 matching points");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw config_error("linear_fit: degenerate abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = fit.intercept + fit.slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - my) * (ys[i] - my);
  }
  fit.r_squared =
      ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return fit;
}

namespace detail {
inline double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double idx = p * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = idx - lo;
  return v[lo] * (1.0 - w) + v[hi] * w;
}
}  // namespace detail

// Least squares on logs: ys ~ C * xs^slope. Requires >= 4 strictly positive
// points. The 95% CI comes from a pairs bootstrap on a stream derived from
// `seed`, so the point estimate never depends on the bootstrap draws.
inline FitReport fit_power_law(std::span<const double> xs,
                               std::span<const double> ys,
                               SeedRecord seed = {0x5eed, 0},
                               int n_boot = 400) {
  const std::size_t n = xs.size();
  if (n < 4 || ys.size() != n)
    throw config_error("fit_power_law: need >= 4 points");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw config_error("fit_power_law: data must be strictly positive");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const LinearFit base = linear_fit(lx, ly);

  Philox4x32 rng = make_rng({seed.master_seed, seed.stream ^ 0x626f6f74ull});
  std::vector<double> slopes;
  slopes.reserve(n_boot);
  std::vector<double> bx(n), by(n);
  for (int b = 0; b < n_boot; ++b) {
    bool distinct = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = static_cast<std::size_t>(uniform01(rng) * n);
      bx[i] = lx[std::min(j, n - 1)];
      by[i] = ly[std::min(j, n - 1)];
      if (bx[i] != bx[0]) distinct = true;
    }
    if (!distinct) continue;  // resample produced a single abscissa
    slopes.push_back(linear_fit(bx, by).slope);
  }

  FitReport report;
  report.exponent_hat = base.slope;
  report.intercept = base.intercept;
  report.r_squared = base.r_squared;
  report.n_points = static_cast<int>(n);
  if (slopes.size() >= 8) {
    report.ci_95 = {detail::percentile(slopes, 0.025),
                    detail::percentile(slopes, 0.975)};
  } else {
    report.ci_95 = {base.slope, base.slope};
  }
  // Widening the CI to cover the point estimate only ever weakens claims
  // made from it (a CI excluding 0 stays excluded or becomes not-excluded).
  report.ci_95.lo = std::min(report.ci_95.lo, base.slope);
  report.ci_95.hi = std::max(report.ci_95.hi, base.slope);
  return report;
}

// Bootstrap standard error of a statistic of an i.i.d. sample.
template <class Stat>
inline double bootstrap_stderr(std::span<const double> sample, Stat&& stat,
                               SeedRecord seed, int n_boot = 200) {
  if (sample.size() < 2) return 0.0;
  Philox4x32 rng = make_rng(seed);
  std::vector<double> stats;
  stats.reserve(n_boot);
  std::vector<double> draw(sample.size());
  for (int b = 0; b < n_boot; ++b) {
    for (auto& v : draw) {
      const std::size_t j =
          static_cast<std::size_t>(uniform01(rng) * sample.size());
      v = sample[std::min(j, sample.size() - 1)];
    }
    stats.push_back(stat(std::span<const double>(draw)));
  }
  return std::sqrt(sample_variance(stats));
}

}  // namespace snls
