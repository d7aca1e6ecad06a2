// snls: reproducible experiment driver for the stochastic NLS laboratory.
//
// Subcommands: sample-noise, randomize, solve, probe-existence,
// verify-dispersive, verify-lemma21, verify-pstrichartz, verify-contraction,
// report. Every run writes a manifest (resolved config + master seed +
// artifact hashes) into its output directory so results can be replayed
// bit-for-bit. Exit codes: 0 ok, 2 config error, 3 hypothesis violation,
// 4 non-contraction / existence horizon exceeded.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snls/snls.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace snls;

namespace {

double parse_exponent(const std::string& s, const char* what) {
  if (s == "inf" || s == "Inf" || s == "INF") return kInf;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error(std::string(what) + ": cannot parse '" + s +
                       "' (number or 'inf')");
  }
}

// phi spec strings: zero | cutoff:K=8 | powerlaw:alpha=2[:K=8] |
// single:k0=1[,k1=0,k2=0],lambda=1 ; any family accepts :scale=c.
SmoothingOperator parse_phi(const std::string& spec, const GridSpec& grid,
                            double declared_s) {
  std::vector<std::string> parts;
  std::string token;
  for (char c : spec) {
    if (c == ':' || c == ',') {
      if (!token.empty()) parts.push_back(token);
      token.clear();
    } else {
      token += c;
    }
  }
  if (!token.empty()) parts.push_back(token);
  if (parts.empty()) throw config_error("phi: empty spec");
  const std::string family = parts[0];

  std::map<std::string, double> kv;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos)
      throw config_error("phi: expected key=value, got '" + parts[i] + "'");
    kv[parts[i].substr(0, eq)] =
        parse_exponent(parts[i].substr(eq + 1), "phi parameter");
  }
  auto take = [&](const std::string& key,
                  std::optional<double> fallback = {}) {
    auto it = kv.find(key);
    if (it != kv.end()) {
      double v = it->second;
      kv.erase(it);
      return v;
    }
    if (fallback) return *fallback;
    throw config_error("phi: missing required parameter '" + key +
                       "' for family " + family);
  };

  SmoothingOperator op = SmoothingOperator::zero(grid);
  const double scale = take("scale", 1.0);
  if (family == "zero") {
    // nothing to do
  } else if (family == "cutoff") {
    const double K = take("K");
    if (K * K >= grid.nyquist() * grid.nyquist() * grid.d)
      std::cerr << "warning: cutoff K=" << K
                << " covers the whole lattice; phi acts as the identity on "
                   "the truncated grid and is not Hilbert-Schmidt on the "
                   "continuum\n";
    op = SmoothingOperator::spectral_cutoff(grid, K);
  } else if (family == "powerlaw") {
    op = SmoothingOperator::power_law(grid, take("alpha"), declared_s,
                                      take("K", kInf));
  } else if (family == "single") {
    std::array<int, 3> k{static_cast<int>(take("k0")),
                         static_cast<int>(take("k1", 0.0)),
                         static_cast<int>(take("k2", 0.0))};
    op = SmoothingOperator::single_mode(grid, k, take("lambda", 1.0));
  } else {
    throw config_error("phi: unknown family '" + family +
                       "' (zero|cutoff|powerlaw|single)");
  }
  if (!kv.empty())
    throw config_error("phi: unused parameter '" + kv.begin()->first + "'");
  return scale == 1.0 ? op : op.scaled(scale);
}

fs::path ensure_outdir(const std::string& out) {
  if (out.empty()) throw config_error("--out is required");
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

std::string fmt(double v) { return io::format_double(v); }

// Shared grid / data / noise flags.
struct GridOpts {
  int d = 2;
  int N = 64;
  double L = 1.0;
  GridSpec grid() const { return GridSpec(d, L, N); }
  void attach(CLI::App* cmd) {
    cmd->add_option("--d", d, "spatial dimension (1-3)");
    cmd->add_option("--N", N, "lattice points per dimension (power of two)");
    cmd->add_option("--L", L, "box side length");
  }
};

struct ProfileOpts {
  std::string u0 = "gaussian";
  double width = 0.05;
  double beta = 1.5;
  double amplitude = 0.5;
  void attach(CLI::App* cmd, const char* flag = "--u0") {
    cmd->add_option(flag, u0, "initial data: gaussian|rough|zero or a .fld file");
    cmd->add_option("--width", width, "gaussian profile width a");
    cmd->add_option("--beta", beta, "rough profile spectral decay exponent");
    cmd->add_option("--amplitude", amplitude, "profile amplitude");
  }
  SpectralField resolve(const GridSpec& g) const {
    if (fs::exists(u0) && fs::is_regular_file(u0)) return io::read_field(u0);
    if (u0 == "gaussian") return gaussian_profile(g, width, amplitude);
    if (u0 == "rough") return rough_profile(g, beta, amplitude);
    if (u0 == "zero") return zero_profile(g);
    throw config_error("--u0: no such file or preset: " + u0);
  }
  json to_json() const {
    return {{"u0", u0}, {"width", width}, {"beta", beta},
            {"amplitude", amplitude}};
  }
};

// ---------------------------------------------------------------------------
// sample-noise

struct SampleNoiseOpts {
  GridOpts grid;
  std::string phi = "powerlaw:alpha=2";
  double T = 1.0;
  int steps = 32;
  int replicas = 1;
  double s = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_sample_noise(const SampleNoiseOpts& o) {
  const fs::path dir = ensure_outdir(o.out);
  const GridSpec grid = o.grid.grid();
  const SmoothingOperator phi = parse_phi(o.phi, grid, o.s);
  std::vector<std::string> artifacts;
  for (int rep = 0; rep < o.replicas; ++rep) {
    const SeedRecord seed{o.seed, static_cast<std::uint64_t>(rep)};
    NoisePath path = sample_convolution(phi, o.steps, o.T, seed);
    char name[64];
    std::snprintf(name, sizeof(name), "replica_%04d", rep);
    fs::create_directories(dir / name);
    for (int j = 0; j <= o.steps; ++j) {
      char fname[64];
      std::snprintf(fname, sizeof(fname), "%s/psi_%05d.fld", name, j);
      io::write_field(dir / fname, path.fields[j]);
      artifacts.push_back(fname);
    }
    json pj{{"grid", {{"d", grid.d}, {"L", grid.L}, {"N", grid.N}}},
            {"T", o.T},
            {"steps", o.steps},
            {"phi", phi.label},
            {"hs_norm_L2", hs_norm(phi, 0.0)},
            {"master_seed", seed.master_seed},
            {"replica", rep},
            {"stream", seed.stream}};
    io::write_json(dir / name / "path.json", pj);
    artifacts.push_back(std::string(name) + "/path.json");
  }
  json cfg{{"d", grid.d},       {"N", grid.N},         {"L", grid.L},
           {"phi", o.phi},      {"T", o.T},            {"steps", o.steps},
           {"replicas", o.replicas}, {"s", o.s}};
  io::write_run_manifest(dir, cfg, o.seed, artifacts);
  std::cout << "sampled " << o.replicas << " noise path(s) into " << dir
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// randomize

struct RandomizeOpts {
  GridOpts grid;
  ProfileOpts profile;
  std::string input;
  std::string dist = "gaussian";
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_randomize(const RandomizeOpts& o) {
  const fs::path dir = ensure_outdir(o.out);
  SpectralField u0 = o.input.empty() ? o.profile.resolve(o.grid.grid())
                                     : io::read_field(o.input);
  RandomizationSpec spec;
  spec.sigma2 = o.sigma * o.sigma;
  if (o.dist == "gaussian")
    spec.law = CoefficientLaw::complex_gaussian;
  else if (o.dist == "bernoulli")
    spec.law = CoefficientLaw::bernoulli;
  else
    throw config_error("--dist must be gaussian or bernoulli");

  const SeedRecord seed{o.seed, 0};
  SpectralField randomized = wiener_randomize(u0, spec, seed);
  io::write_field(dir / "randomized.fld", randomized);

  const CubeRange range = cube_range(u0.grid());
  json coeff{{"master_seed", seed.master_seed},
             {"stream", seed.stream},
             {"dist", o.dist},
             {"sigma2", spec.sigma2},
             {"cube_count", range.count()},
             {"cube_lo", {range.lo[0], range.lo[1], range.lo[2]}},
             {"cube_hi", {range.hi[0], range.hi[1], range.hi[2]}},
             {"enumeration", "lexicographic"},
             {"draws_per_cube", o.dist == "gaussian" ? 2 : 1}};
  io::write_json(dir / "coefficients.json", coeff);

  json cfg{{"input", o.input.empty() ? "(preset)" : o.input},
           {"dist", o.dist},
           {"sigma", o.sigma},
           {"profile", o.profile.to_json()},
           {"d", u0.grid().d},
           {"N", u0.grid().N},
           {"L", u0.grid().L}};
  io::write_run_manifest(dir, cfg, o.seed,
                         {"randomized.fld", "coefficients.json"});
  std::cout << "randomized field written to " << (dir / "randomized.fld")
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// solve / probe-existence / verify-contraction share solver setup

struct SolveOpts {
  GridOpts grid;
  ProfileOpts profile;
  std::string case_name = "ia";
  double p = 4.0;
  double s0 = -1.0;  // negative = case default
  double s = -1.0;
  double delta = 0.1;
  double eps = 0.05;
  std::string phi = "powerlaw:alpha=2:scale=0.25";
  double T = 0.1;
  int steps = 32;
  double tol = 1e-8;
  int max_iters = 40;
  bool no_dealias = false;
  std::uint64_t seed = 0;
  std::string out;

  CaseParams case_params() const {
    return make_case(case_name, grid.d, p, s0, s, delta, eps);
  }

  SolverConfig solver_config(const CaseParams& cp) const {
    SolverConfig cfg;
    cfg.T = T;
    cfg.steps = steps;
    cfg.tol = tol;
    cfg.max_iters = max_iters;
    cfg.dealias = !no_dealias;
    cp.apply(cfg);
    return cfg;
  }

  json to_json(const CaseParams& cp) const {
    return {{"case", case_name}, {"d", grid.d},     {"N", grid.N},
            {"L", grid.L},       {"p", p},          {"s0", cp.s0},
            {"s", cp.s},         {"s1", cp.s1},     {"r", cp.r},
            {"delta", delta},    {"eps", eps},      {"phi", phi},
            {"T", T},            {"steps", steps},  {"tol", tol},
            {"max_iters", max_iters},               {"dealias", !no_dealias},
            {"profile", profile.to_json()},
            {"q_time", cp.time_lq ? fmt(cp.q_time) : "inf"}};
  }

  void attach(CLI::App* cmd) {
    grid.attach(cmd);
    profile.attach(cmd);
    cmd->add_option("--case", case_name, "well-posedness regime preset: ia|ib|ii");
    cmd->add_option("--p", p, "nonlinearity power");
    cmd->add_option("--s0", s0, "data regularity (default: case minimum)");
    cmd->add_option("--s", s, "noise regularity (default: case choice)");
    cmd->add_option("--delta", delta, "case ii: r = 2d/(d-2) - delta");
    cmd->add_option("--eps", eps, "case ib: epsilon in the q relation");
    cmd->add_option("--phi", phi, "smoothing operator spec");
    cmd->add_option("--T", T, "time horizon");
    cmd->add_option("--steps", steps, "time steps");
    cmd->add_option("--tol", tol, "fixed-point relative tolerance");
    cmd->add_option("--max-iters", max_iters, "Picard iteration cap");
    cmd->add_flag("--no-dealias", no_dealias, "disable the 2/3 rule");
  }
};

int run_solve(const SolveOpts& o) {
  const fs::path dir = ensure_outdir(o.out);
  const CaseParams cp = o.case_params();
  const GridSpec grid = o.grid.grid();
  const SolverConfig cfg = o.solver_config(cp);
  const NonlinearitySpec nl(o.p);
  const SpectralField u0 = o.profile.resolve(grid);
  const SmoothingOperator phi = parse_phi(o.phi, grid, cp.s);
  const NoisePath psi =
      hs_norm(phi, 0.0) > 0.0
          ? sample_convolution(phi, cfg.steps, cfg.T, {o.seed, 0})
          : zero_path(grid, cfg.steps, cfg.T);

  const PicardResult res = picard_solve(u0, psi, nl, cfg);

  // Per-time norms of the solution u = v + Psi.
  std::vector<std::vector<std::string>> rows;
  for (std::size_t j = 0; j < res.v.size(); ++j) {
    const SpectralField u = res.v[j] + psi.fields[j];
    std::vector<std::string> row{
        fmt(psi.times[j]), fmt(l2_norm(u)),
        fmt(sobolev_norm(u, cfg.s1, 2.0)),
        fmt(sobolev_norm(u, cfg.s1, cfg.r))};
    row.push_back(j < res.contraction_ratios.size()
                      ? fmt(res.contraction_ratios[j])
                      : "");
    rows.push_back(std::move(row));
  }
  io::write_csv(dir / "norms.csv",
                {"t", "L2", "Hs1", "Ws1r", "contraction_ratio"}, rows);
  io::write_field(dir / "final_v.fld", res.v.back());
  io::write_field(dir / "final_u.fld", res.v.back() + psi.fields.back());

  json result{{"status", res.status == SolveStatus::converged
                             ? "converged"
                             : "existence horizon exceeded"},
              {"iterations", res.iterations},
              {"last_ratio", res.last_ratio},
              {"contraction_ratios", res.contraction_ratios},
              {"update_norms", res.update_norms}};
  io::write_json(dir / "result.json", result);
  io::write_run_manifest(dir, o.to_json(cp), o.seed,
                         {"norms.csv", "final_v.fld", "final_u.fld",
                          "result.json"});
  if (res.status != SolveStatus::converged) {
    std::cerr << "existence horizon exceeded: last contraction ratio "
              << res.last_ratio << "\n";
    return 4;
  }
  std::cout << "converged in " << res.iterations << " iterations\n";
  return 0;
}

struct ProbeExistenceOpts {
  SolveOpts solve;
  int rungs = 6;
  int paths = 100;
};

int run_probe_existence(const ProbeExistenceOpts& o) {
  const fs::path dir = ensure_outdir(o.solve.out);
  const CaseParams cp = o.solve.case_params();
  const GridSpec grid = o.solve.grid.grid();
  const SolverConfig cfg = o.solve.solver_config(cp);
  const NonlinearitySpec nl(o.solve.p);
  const SpectralField u0 = o.solve.profile.resolve(grid);
  const SmoothingOperator phi = parse_phi(o.solve.phi, grid, cp.s);

  const ExistenceProbeResult res = local_existence_probe(
      u0, phi, nl, cfg, o.rungs, o.paths, o.solve.seed);

  std::vector<std::vector<std::string>> rows;
  int positive = 0, above_min = 0;
  for (std::size_t i = 0; i < res.t_est.size(); ++i) {
    rows.push_back({std::to_string(i), fmt(res.t_est[i]),
                    std::to_string(res.iterations_used[i])});
    if (res.t_est[i] > 0.0) ++positive;
    if (res.t_est[i] > res.ladder.back()) ++above_min;
  }
  io::write_csv(dir / "existence.csv", {"path", "T_est", "iterations"}, rows);
  json summary{{"ladder", res.ladder},
               {"paths", o.paths},
               {"positive", positive},
               {"above_ladder_minimum", above_min}};
  io::write_json(dir / "summary.json", summary);
  json cfgj = o.solve.to_json(cp);
  cfgj["rungs"] = o.rungs;
  cfgj["paths"] = o.paths;
  io::write_run_manifest(dir, cfgj, o.solve.seed,
                         {"existence.csv", "summary.json"});
  std::cout << positive << "/" << o.paths << " paths with T_est > 0, "
            << above_min << " above the ladder minimum\n";
  return 0;
}

struct ContractionOpts {
  SolveOpts solve;
  int halvings = 4;
};

int run_verify_contraction(const ContractionOpts& o) {
  const fs::path dir = ensure_outdir(o.solve.out);
  const CaseParams cp = o.solve.case_params();
  const GridSpec grid = o.solve.grid.grid();
  const NonlinearitySpec nl(o.solve.p);
  const SpectralField u0 = o.solve.profile.resolve(grid);
  const SmoothingOperator phi = parse_phi(o.solve.phi, grid, cp.s);
  if ((o.solve.steps >> (o.halvings - 1)) < 2)
    throw config_error("verify-contraction: steps too small for halvings");

  // One sample path on the full horizon; shorter horizons reuse prefixes.
  const SeedRecord seed{o.solve.seed, 0};
  const std::vector<SpectralField> increments =
      sample_increments(phi, o.solve.steps, o.solve.T, seed);

  std::vector<double> ladder, ratios;
  for (int h = 0; h < o.halvings; ++h) {
    const double T = o.solve.T / (1 << h);
    const int steps = o.solve.steps >> h;
    std::span<const SpectralField> prefix(increments.data(), steps);
    const NoisePath psi = accumulate_path(grid, T, prefix, seed);
    SolverConfig cfg = o.solve.solver_config(cp);
    cfg.T = T;
    cfg.steps = steps;
    ladder.push_back(T);
    ratios.push_back(contraction_probe(u0, psi, nl, cfg, 1).at(0));
  }

  FitReport fit = fit_power_law(ladder, ratios, {o.solve.seed, 0xC0DE});
  bool strictly_decreasing = true;
  for (std::size_t i = 1; i < ratios.size(); ++i)
    strictly_decreasing = strictly_decreasing && ratios[i] < ratios[i - 1];

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < ladder.size(); ++i)
    rows.push_back({fmt(ladder[i]), fmt(ratios[i])});
  io::write_csv(dir / "contraction.csv", {"T", "first_iteration_ratio"},
                rows);
  json rep{{"theta_hat", fit.exponent_hat},
           {"ci_lo", fit.ci_95.lo},
           {"ci_hi", fit.ci_95.hi},
           {"r_squared", fit.r_squared},
           {"strictly_decreasing_in_T", strictly_decreasing}};
  io::write_json(dir / "contraction.json", rep);
  io::write_loglog_svg(dir / "contraction.svg", ladder, ratios, &fit,
                       "first Picard contraction ratio vs T", "T", "ratio");
  json cfgj = o.solve.to_json(cp);
  cfgj["halvings"] = o.halvings;
  io::write_run_manifest(dir, cfgj, o.solve.seed,
                         {"contraction.csv", "contraction.json",
                          "contraction.svg"});
  std::cout << "theta_hat = " << fit.exponent_hat << " (ci "
            << fit.ci_95.lo << ", " << fit.ci_95.hi << "), decreasing = "
            << (strictly_decreasing ? "yes" : "no") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify-dispersive

struct DispersiveOpts {
  GridOpts grid{1, 4096, 200.0};
  ProfileOpts profile;
  std::string r = "inf";
  double tmin = 0.5;
  double tmax = 5.0;
  int per_decade = 12;
  std::uint64_t seed = 0;
  std::string out;
};

int run_verify_dispersive(const DispersiveOpts& o) {
  const fs::path dir = ensure_outdir(o.out);
  const GridSpec grid = o.grid.grid();
  const double r = parse_exponent(o.r, "--r");
  const SpectralField u0 = o.profile.resolve(grid);
  const std::vector<double> times =
      geometric_times(o.tmin, o.tmax, o.per_decade);
  const DecayFit decay = dispersive_decay_fit(u0, r, times, {o.seed, 0});

  std::vector<std::vector<std::string>> rows;
  std::vector<double> xs, ys;
  for (const auto& s : decay.samples) {
    rows.push_back({fmt(s.t), fmt(s.norm_r), fmt(s.ratio)});
    xs.push_back(s.t);
    ys.push_back(s.norm_r);
  }
  io::write_csv(dir / "decay_samples.csv", {"t", "norm_r", "ratio"}, rows);

  // FitReport row schema: (d, r, fitted_exponent, predicted_exponent,
  // residual, n_points, T_window), mirrored as a JSON object.
  const double residual = 1.0 - decay.fit.r_squared;
  io::write_csv(dir / "dispersive.csv",
                {"d", "r", "fitted_exponent", "predicted_exponent",
                 "residual", "n_points", "T_window"},
                {{std::to_string(grid.d), o.r, fmt(decay.fit.exponent_hat),
                  fmt(*decay.fit.exponent_predicted), fmt(residual),
                  std::to_string(decay.fit.n_points), fmt(o.tmax)}});
  json j{{"d", grid.d},
         {"r", o.r},
         {"fitted_exponent", decay.fit.exponent_hat},
         {"predicted_exponent", *decay.fit.exponent_predicted},
         {"residual", residual},
         {"n_points", decay.fit.n_points},
         {"T_window", o.tmax},
         {"ci_lo", decay.fit.ci_95.lo},
         {"ci_hi", decay.fit.ci_95.hi},
         {"dual_norm", decay.dual_norm},
         {"max_ratio", decay.max_ratio}};
  io::write_json(dir / "dispersive.json", j);
  io::write_loglog_svg(dir / "dispersive.svg", xs, ys, &decay.fit,
                       "free-evolution decay ||S(t)u0||_{L^r}", "t",
                       "norm");
  json cfg{{"d", grid.d},   {"N", grid.N},    {"L", grid.L},
           {"r", o.r},      {"tmin", o.tmin}, {"tmax", o.tmax},
           {"per_decade", o.per_decade},      {"profile", o.profile.to_json()}};
  io::write_run_manifest(dir, cfg, o.seed,
                         {"decay_samples.csv", "dispersive.csv",
                          "dispersive.json", "dispersive.svg"});
  std::cout << "fitted exponent " << decay.fit.exponent_hat << " (predicted "
            << *decay.fit.exponent_predicted << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify-lemma21

struct Lemma21Opts {
  GridOpts grid;
  std::string phi = "powerlaw:alpha=2";
  double s = 0.0;
  double q = 8.0;
  std::string r = "4";
  double T_min = 0.1;
  double T_max = 1.0;
  int points = 8;
  double rho = 2.0;
  int paths = 200;
  int steps = 32;
  std::uint64_t seed = 0;
  std::string out;
};

int run_verify_lemma21(const Lemma21Opts& o) {
  const fs::path dir = ensure_outdir(o.out);
  const GridSpec grid = o.grid.grid();
  const SmoothingOperator phi = parse_phi(o.phi, grid, o.s);
  const double r = parse_exponent(o.r, "--r");
  std::vector<double> ladder(o.points);
  for (int i = 0; i < o.points; ++i)
    ladder[i] =
        o.T_min * std::pow(o.T_max / o.T_min,
                           static_cast<double>(i) / (o.points - 1));

  const Lemma21Report rep = verify_lemma21(phi, o.s, o.q, r, ladder, o.rho,
                                           o.paths, o.steps, o.seed);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < rep.T_ladder.size(); ++i)
    rows.push_back({fmt(rep.T_ladder[i]), fmt(rep.estimates[i]),
                    fmt(rep.stderrs[i])});
  io::write_csv(dir / "ladder.csv", {"T", "estimate", "stderr"}, rows);
  io::write_csv(
      dir / "report.csv",
      {"d", "s", "q", "r", "rho", "paths", "theta_hat", "ci_lo", "ci_hi",
       "r_squared", "homogeneity_ratio", "rho_meets_minkowski"},
      {{std::to_string(grid.d), fmt(o.s), fmt(o.q), fmt(r), fmt(o.rho),
        std::to_string(o.paths), fmt(rep.theta_fit.exponent_hat),
        fmt(rep.theta_fit.ci_95.lo), fmt(rep.theta_fit.ci_95.hi),
        fmt(rep.theta_fit.r_squared), fmt(rep.homogeneity_ratio),
        rep.rho_meets_minkowski ? "1" : "0"}});
  json j = io::fit_to_json(rep.theta_fit);
  j["homogeneity_ratio"] = rep.homogeneity_ratio;
  j["phi_hs_norm"] = rep.phi_hs_norm;
  j["rho_meets_minkowski"] = rep.rho_meets_minkowski;
  j["T_ladder"] = rep.T_ladder;
  j["estimates"] = rep.estimates;
  j["stderrs"] = rep.stderrs;
  io::write_json(dir / "report.json", j);
  io::write_loglog_svg(dir / "lemma21.svg", rep.T_ladder, rep.estimates,
                       &rep.theta_fit,
                       "moment of ||Psi||_{L^q_T W^{s,r}} vs T", "T",
                       "estimate");
  json cfg{{"d", grid.d}, {"N", grid.N}, {"L", grid.L},   {"phi", o.phi},
           {"s", o.s},    {"q", o.q},    {"r", o.r},      {"rho", o.rho},
           {"T_min", o.T_min},           {"T_max", o.T_max},
           {"points", o.points},         {"paths", o.paths},
           {"steps", o.steps}};
  io::write_run_manifest(dir, cfg, o.seed,
                         {"ladder.csv", "report.csv", "report.json",
                          "lemma21.svg"});
  std::cout << "theta_hat = " << rep.theta_fit.exponent_hat << " (ci "
            << rep.theta_fit.ci_95.lo << ", " << rep.theta_fit.ci_95.hi
            << "), homogeneity ratio " << rep.homogeneity_ratio << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify-pstrichartz

struct PStrichartzOpts {
  GridOpts grid;
  ProfileOpts profile{.u0 = "rough"};
  double s = 0.0;
  double q = 20.0;
  std::string r = "20";
  double T = 1.0;
  int samples = 500;
  int steps = 16;
  std::uint64_t seed = 0;
  std::string out;
};

int run_verify_pstrichartz(const PStrichartzOpts& o) {
  const fs::path dir = ensure_outdir(o.out);
  const GridSpec grid = o.grid.grid();
  const double r = parse_exponent(o.r, "--r");
  const NormSpec norm(o.s, r, o.q, o.T);
  RandomizationSpec spec;

  auto profile_fn = [&](const GridSpec& g) { return o.profile.resolve(g); };
  const PStrichartzReport rep = verify_probabilistic_strichartz(
      profile_fn, grid, spec, std::span<const NormSpec>(&norm, 1), o.samples,
      o.steps, o.seed);
  const PStrichartzEntry& e = rep.entries.at(0);

  io::write_csv(
      dir / "pstrichartz.csv",
      {"d", "s", "q", "r", "T", "samples", "median", "q90", "q99", "tail_c",
       "refined_q90", "decile_ratio", "flagged_growth",
       "deterministic_coarse", "deterministic_refined"},
      {{std::to_string(grid.d), fmt(o.s), fmt(o.q), fmt(r), fmt(o.T),
        std::to_string(o.samples), fmt(e.coarse.median), fmt(e.coarse.q90),
        fmt(e.coarse.q99), fmt(e.coarse.tail.c_hat), fmt(e.refined.q90),
        fmt(e.upper_decile_ratio), e.flagged_growth ? "1" : "0",
        fmt(rep.deterministic_coarse), fmt(rep.deterministic_refined)}});
  json j{{"median", e.coarse.median},
         {"q90", e.coarse.q90},
         {"q99", e.coarse.q99},
         {"tail_c", e.coarse.tail.c_hat},
         {"tail_ratio_min", e.coarse.tail.ratio_min},
         {"tail_ratio_max", e.coarse.tail.ratio_max},
         {"refined_q90", e.refined.q90},
         {"decile_ratio", e.upper_decile_ratio},
         {"flagged_growth", e.flagged_growth},
         {"deterministic_coarse", rep.deterministic_coarse},
         {"deterministic_refined", rep.deterministic_refined}};
  io::write_json(dir / "pstrichartz.json", j);
  // top-decile survival curve of the sampled norms
  std::vector<double> kappa, survival;
  const auto& xs = e.coarse.samples;
  for (std::size_t i = xs.size() - xs.size() / 10; i + 1 < xs.size(); ++i) {
    if (!(xs[i] > 0.0)) continue;
    kappa.push_back(xs[i]);
    survival.push_back(static_cast<double>(xs.size() - 1 - i) / xs.size());
  }
  std::vector<std::string> artifacts{"pstrichartz.csv", "pstrichartz.json"};
  if (kappa.size() >= 2) {
    io::write_loglog_svg(dir / "tail.svg", kappa, survival, nullptr,
                         "upper-decile survival of ||S(t)u0^w||", "kappa",
                         "P(X > kappa)");
    artifacts.push_back("tail.svg");
  }
  json cfg{{"d", grid.d}, {"N", grid.N}, {"L", grid.L}, {"s", o.s},
           {"q", o.q},    {"r", o.r},    {"T", o.T},
           {"samples", o.samples},       {"steps", o.steps},
           {"profile", o.profile.to_json()}};
  io::write_run_manifest(dir, cfg, o.seed, artifacts);
  std::cout << "median " << e.coarse.median << ", upper decile ratio "
            << e.upper_decile_ratio
            << (e.flagged_growth ? " (FLAGGED)" : "") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report

int run_report(const std::string& dir_str) {
  const fs::path dir(dir_str);
  const fs::path manifest = dir / "manifest.json";
  if (!fs::exists(manifest))
    throw config_error("no manifest.json in " + dir_str);
  std::ifstream in(manifest);
  json j = json::parse(in);
  std::cout << "run manifest: " << manifest << "\n";
  std::cout << "master seed: " << j["master_seed"] << "\n";
  std::cout << "config: " << j["config"].dump() << "\n";
  bool ok = true;
  for (const auto& a : j["artifacts"]) {
    const std::string rel = a["path"];
    const std::string recorded = a["fnv1a64"];
    std::string status;
    if (!fs::exists(dir / rel)) {
      status = "MISSING";
      ok = false;
    } else {
      const std::string now = io::hex64(io::fnv1a64_file(dir / rel));
      status = (now == recorded) ? "ok" : "HASH MISMATCH";
      ok = ok && (now == recorded);
    }
    std::cout << "  " << rel << "  " << status << "\n";
  }
  if (!ok) throw config_error("artifact verification failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "snls: spectral laboratory for the stochastic nonlinear Schroedinger "
      "equation with additive noise"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "key=value config file with [subcommand] sections; flags "
                 "override file values");
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (default: SNLS_THREADS env or hardware)");

  int rc = 0;
  auto guard = [&](auto&& fn) {
    return [&rc, fn, &threads]() {
      set_default_threads(threads);
      rc = fn();
    };
  };

  SampleNoiseOpts sn;
  auto* c_sn = app.add_subcommand("sample-noise",
                                  "sample stochastic convolution paths");
  sn.grid.attach(c_sn);
  c_sn->add_option("--phi", sn.phi, "smoothing operator spec");
  c_sn->add_option("--T", sn.T, "horizon");
  c_sn->add_option("--steps", sn.steps, "time steps");
  c_sn->add_option("--replicas", sn.replicas, "number of paths");
  c_sn->add_option("--s", sn.s, "declared noise regularity");
  c_sn->add_option("--seed", sn.seed, "master seed")->required();
  c_sn->add_option("--out", sn.out, "output directory")->required();
  c_sn->callback(guard([&]() { return run_sample_noise(sn); }));

  RandomizeOpts rz;
  auto* c_rz = app.add_subcommand("randomize",
                                  "Wiener (unit-scale) randomization of data");
  rz.grid.attach(c_rz);
  rz.profile.attach(c_rz, "--preset");
  c_rz->add_option("--input", rz.input, "input field (.fld) to randomize");
  c_rz->add_option("--dist", rz.dist, "coefficient law: gaussian|bernoulli");
  c_rz->add_option("--sigma", rz.sigma, "coefficient scale sigma");
  c_rz->add_option("--seed", rz.seed, "master seed")->required();
  c_rz->add_option("--out", rz.out, "output directory")->required();
  c_rz->callback(guard([&]() { return run_randomize(rz); }));

  SolveOpts so;
  auto* c_so = app.add_subcommand("solve",
                                  "Picard solve of the residual equation");
  so.attach(c_so);
  c_so->add_option("--seed", so.seed, "master seed")->required();
  c_so->add_option("--out", so.out, "output directory")->required();
  c_so->callback(guard([&]() { return run_solve(so); }));

  ProbeExistenceOpts pe;
  auto* c_pe = app.add_subcommand("probe-existence",
                                  "per-path existence horizon bisection");
  pe.solve.attach(c_pe);
  c_pe->add_option("--rungs", pe.rungs, "dyadic ladder depth");
  c_pe->add_option("--paths", pe.paths, "sample paths");
  c_pe->add_option("--seed", pe.solve.seed, "master seed")->required();
  c_pe->add_option("--out", pe.solve.out, "output directory")->required();
  c_pe->callback(guard([&]() { return run_probe_existence(pe); }));

  ContractionOpts vc;
  auto* c_vc = app.add_subcommand(
      "verify-contraction", "first-iteration contraction ratio vs horizon");
  vc.solve.attach(c_vc);
  c_vc->add_option("--halvings", vc.halvings, "number of horizon halvings");
  c_vc->add_option("--seed", vc.solve.seed, "master seed")->required();
  c_vc->add_option("--out", vc.solve.out, "output directory")->required();
  c_vc->callback(guard([&]() { return run_verify_contraction(vc); }));

  DispersiveOpts dv;
  auto* c_dv = app.add_subcommand("verify-dispersive",
                                  "fit the free-evolution decay exponent");
  dv.grid.attach(c_dv);
  dv.profile.attach(c_dv, "--preset");
  c_dv->add_option("--r", dv.r, "Lebesgue exponent (number or inf)");
  c_dv->add_option("--tmin", dv.tmin, "first fit time");
  c_dv->add_option("--tmax", dv.tmax, "last fit time");
  c_dv->add_option("--points-per-decade", dv.per_decade,
                   "geometric ladder density");
  c_dv->add_option("--seed", dv.seed, "bootstrap seed");
  c_dv->add_option("--out", dv.out, "output directory")->required();
  c_dv->callback(guard([&]() { return run_verify_dispersive(dv); }));

  Lemma21Opts l21;
  auto* c_l21 = app.add_subcommand(
      "verify-lemma21", "T-scaling of the stochastic convolution moment");
  l21.grid.attach(c_l21);
  c_l21->add_option("--phi", l21.phi, "smoothing operator spec");
  c_l21->add_option("--s", l21.s, "Sobolev regularity");
  c_l21->add_option("--q", l21.q, "temporal exponent (finite)");
  c_l21->add_option("--r", l21.r, "spatial exponent (finite)");
  c_l21->add_option("--T-min", l21.T_min, "ladder minimum");
  c_l21->add_option("--T-max", l21.T_max, "ladder maximum");
  c_l21->add_option("--points", l21.points, "ladder points");
  c_l21->add_option("--rho", l21.rho, "moment order");
  c_l21->add_option("--paths", l21.paths, "paths per ladder point");
  c_l21->add_option("--steps", l21.steps, "time steps per path");
  c_l21->add_option("--seed", l21.seed, "master seed")->required();
  c_l21->add_option("--out", l21.out, "output directory")->required();
  c_l21->callback(guard([&]() { return run_verify_lemma21(l21); }));

  PStrichartzOpts ps;
  auto* c_ps = app.add_subcommand(
      "verify-pstrichartz",
      "randomized space-time integrability at non-admissible (q, r)");
  ps.grid.attach(c_ps);
  ps.profile.attach(c_ps, "--preset");
  c_ps->add_option("--s", ps.s, "Sobolev regularity");
  c_ps->add_option("--q", ps.q, "temporal exponent (finite)");
  c_ps->add_option("--r", ps.r, "spatial exponent (finite)");
  c_ps->add_option("--T", ps.T, "horizon");
  c_ps->add_option("--samples", ps.samples, "Monte Carlo samples");
  c_ps->add_option("--steps", ps.steps, "time steps per trajectory");
  c_ps->add_option("--seed", ps.seed, "master seed")->required();
  c_ps->add_option("--out", ps.out, "output directory")->required();
  c_ps->callback(guard([&]() { return run_verify_pstrichartz(ps); }));

  std::string report_dir;
  auto* c_rp = app.add_subcommand("report",
                                  "verify and summarize a run directory");
  c_rp->add_option("--dir", report_dir, "run directory")->required();
  c_rp->callback(guard([&]() { return run_report(report_dir); }));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const hypothesis_error& e) {
    std::cerr << "hypothesis violation: " << e.what() << "\n";
    return 3;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
