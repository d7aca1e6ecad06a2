#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("snls_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args, std::string* output = nullptr) {
    const fs::path log = dir_ / "cli_output.log";
    const std::string cmd =
        std::string(SNLS_CLI_BIN) + " " + args + " > " + log.string() +
        " 2>&1";
    const int status = std::system(cmd.c_str());
    if (output) {
      std::ifstream in(log);
      output->assign(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in),
            std::istreambuf_iterator<char>()};
  }

  fs::path dir_;
};

TEST_F(CliTest, DispersiveFitNearMinusHalf) {
  const fs::path out = dir_ / "disp";
  std::string log;
  const int rc = run("verify-dispersive --d 1 --N 2048 --L 200 --r inf "
                     "--preset gaussian --width 0.3 --amplitude 1.0 "
                     "--out " + out.string(),
                     &log);
  EXPECT_EQ(rc, 0) << log;
  ASSERT_TRUE(fs::exists(out / "dispersive.json"));
  ASSERT_TRUE(fs::exists(out / "dispersive.csv"));
  ASSERT_TRUE(fs::exists(out / "dispersive.svg"));
  std::ifstream in(out / "dispersive.json");
  nlohmann::json j = nlohmann::json::parse(in);
  EXPECT_NEAR(j["fitted_exponent"].get<double>(), -0.5, 0.05);
  EXPECT_EQ(j["predicted_exponent"].get<double>(), -0.5);
}

TEST_F(CliTest, SolveIsByteForByteDeterministic) {
  const std::string common =
      "solve --case ia --d 2 --p 4 --s0 1 --phi cutoff:K=8 --T 0.1 "
      "--steps 16 --N 32 --seed 7 --out ";
  const fs::path a = dir_ / "run_a";
  const fs::path b = dir_ / "run_b";
  std::string log_a, log_b;
  const int rc_a = run(common + a.string(), &log_a);
  const int rc_b = run(common + b.string(), &log_b);
  EXPECT_EQ(rc_a, rc_b);
  for (const char* name :
       {"norms.csv", "result.json", "final_u.fld", "final_v.fld",
        "manifest.json"}) {
    ASSERT_TRUE(fs::exists(a / name)) << name << "\n" << log_a;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
}

TEST_F(CliTest, ThreadCountNeverChangesNumbers) {
  const std::string common =
      "verify-lemma21 --d 2 --N 16 --L 2 --s 0 --q 8 --r 4 "
      "--phi powerlaw:alpha=2 --T-min 0.1 --T-max 0.8 --points 4 "
      "--paths 40 --steps 8 --seed 99 --out ";
  const fs::path a = dir_ / "t1";
  const fs::path b = dir_ / "t4";
  std::string log;
  EXPECT_EQ(run("--threads 1 " + common + a.string(), &log), 0) << log;
  EXPECT_EQ(run("--threads 4 " + common + b.string(), &log), 0) << log;
  for (const char* name :
       {"ladder.csv", "report.csv", "report.json", "lemma21.svg"})
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
}

TEST_F(CliTest, DegeneratePhiIsRefusedWithExitThree) {
  std::string log;
  const int rc = run("verify-lemma21 --d 2 --N 16 --phi zero --paths 40 "
                     "--steps 8 --seed 1 --out " +
                         (dir_ / "zero").string(),
                     &log);
  EXPECT_EQ(rc, 3);
  EXPECT_NE(log.find("degenerate"), std::string::npos) << log;
}

TEST_F(CliTest, HypothesisViolationSurfacedVerbatim) {
  std::string log;
  // r > 2d/(d-2) = 6 at d = 3
  const int rc = run("verify-lemma21 --d 3 --N 8 --r 6.5 "
                     "--phi powerlaw:alpha=2 --paths 40 --steps 8 --seed 1 "
                     "--out " + (dir_ / "hyp").string(),
                     &log);
  EXPECT_EQ(rc, 3);
  EXPECT_NE(log.find("2d/(d-2)"), std::string::npos) << log;
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  std::string log;
  EXPECT_EQ(run("no-such-subcommand", &log), 2);
  EXPECT_EQ(run("solve --case ia --d 2 --p 4 --seed 1", &log), 2);  // no --out
  EXPECT_EQ(run("solve --case bogus --seed 1 --out " + dir_.string(), &log),
            2);
  EXPECT_EQ(run("randomize --dist trinary --seed 1 --out " +
                    (dir_ / "r").string(),
                &log),
            2);
  // case ia requires mass-supercritical p
  EXPECT_EQ(run("solve --case ia --d 1 --p 3 --seed 1 --out " +
                    (dir_ / "x").string(),
                &log),
            2);
}

TEST_F(CliTest, HorizonExceededExitsFour) {
  std::string log;
  const int rc = run("solve --case ia --d 2 --p 4 --u0 gaussian "
                     "--width 0.2 --amplitude 8 --phi zero --T 2.0 "
                     "--steps 16 --N 32 --max-iters 12 --seed 3 --out " +
                         (dir_ / "blow").string(),
                     &log);
  EXPECT_EQ(rc, 4) << log;
  EXPECT_NE(log.find("existence horizon exceeded"), std::string::npos);
}

TEST_F(CliTest, RandomizePipelineAndManifestVerification) {
  const fs::path noise = dir_ / "noise";
  std::string log;
  EXPECT_EQ(run("sample-noise --d 1 --N 32 --L 2 --phi powerlaw:alpha=1.5 "
                "--T 0.5 --steps 4 --seed 11 --out " + noise.string(),
                &log),
            0)
      << log;
  ASSERT_TRUE(fs::exists(noise / "replica_0000" / "psi_00004.fld"));

  const fs::path rz = dir_ / "rand";
  EXPECT_EQ(run("randomize --input " +
                    (noise / "replica_0000" / "psi_00004.fld").string() +
                    " --dist bernoulli --sigma 1 --seed 5 --out " +
                    rz.string(),
                &log),
            0)
      << log;
  ASSERT_TRUE(fs::exists(rz / "randomized.fld"));
  ASSERT_TRUE(fs::exists(rz / "coefficients.json"));

  EXPECT_EQ(run("report --dir " + rz.string(), &log), 0) << log;
  EXPECT_NE(log.find("randomized.fld  ok"), std::string::npos) << log;

  // tampering is detected
  std::ofstream(rz / "randomized.fld", std::ios::app) << "x";
  EXPECT_EQ(run("report --dir " + rz.string(), &log), 2);
  EXPECT_NE(log.find("HASH MISMATCH"), std::string::npos) << log;
}

TEST_F(CliTest, ConfigFileValuesAndFlagOverrides) {
  const fs::path cfg = dir_ / "exp.cfg";
  {
    std::ofstream out(cfg);
    out << "# experiment configuration\n"
        << "[verify-dispersive]\n"
        << "d = 1\n"
        << "N = 1024\n"
        << "L = 200\n"
        << "r = inf\n"
        << "width = 0.3\n"
        << "tmax = 4\n";
  }
  const fs::path out_dir = dir_ / "cfg_run";
  std::string log;
  const int rc = run("--config " + cfg.string() +
                         " verify-dispersive --N 2048 --out " +
                         out_dir.string(),
                     &log);
  EXPECT_EQ(rc, 0) << log;
  std::ifstream in(out_dir / "manifest.json");
  nlohmann::json j = nlohmann::json::parse(in);
  EXPECT_EQ(j["config"]["N"], 2048);     // flag overrides file
  EXPECT_EQ(j["config"]["L"], 200.0);    // file value applied
  EXPECT_EQ(j["config"]["tmax"], 4.0);
}

TEST_F(CliTest, ProbeExistenceEmitsPerPathHorizons) {
  const fs::path out = dir_ / "exist";
  std::string log;
  const int rc = run("probe-existence --case ia --d 2 --p 4 --N 16 --L 2 "
                     "--u0 gaussian --width 0.3 --amplitude 0.5 "
                     "--phi powerlaw:alpha=2:scale=0.5 --T 0.2 --steps 16 "
                     "--rungs 3 --paths 3 --seed 555 --out " + out.string(),
                     &log);
  EXPECT_EQ(rc, 0) << log;
  std::ifstream in(out / "summary.json");
  nlohmann::json j = nlohmann::json::parse(in);
  EXPECT_EQ(j["paths"], 3);
  EXPECT_EQ(j["positive"], 3);
  ASSERT_TRUE(fs::exists(out / "existence.csv"));
}

TEST_F(CliTest, FullLatticeCutoffWarnsAboutIdentity) {
  const fs::path out = dir_ / "warn";
  std::string log;
  const int rc = run("sample-noise --d 1 --N 16 --L 2 --phi cutoff:K=99 "
                     "--T 0.1 --steps 2 --seed 1 --out " + out.string(),
                     &log);
  EXPECT_EQ(rc, 0);
  EXPECT_NE(log.find("not Hilbert-Schmidt on the continuum"),
            std::string::npos)
      << log;
}

TEST_F(CliTest, PStrichartzEmitsReportAndTailPlot) {
  const fs::path out = dir_ / "pstr";
  std::string log;
  const int rc = run("verify-pstrichartz --d 2 --N 16 --L 1 --preset rough "
                     "--beta 1.5 --q 20 --r 20 --T 0.5 --samples 60 "
                     "--steps 4 --seed 13 --out " + out.string(),
                     &log);
  EXPECT_EQ(rc, 0) << log;
  EXPECT_TRUE(fs::exists(out / "pstrichartz.csv"));
  EXPECT_TRUE(fs::exists(out / "pstrichartz.json"));
  EXPECT_TRUE(fs::exists(out / "tail.svg"));
  std::ifstream in(out / "pstrichartz.json");
  nlohmann::json j = nlohmann::json::parse(in);
  EXPECT_GT(j["median"].get<double>(), 0.0);
}

TEST_F(CliTest, ContractionProbeReportsDecreasingRatios) {
  const fs::path out = dir_ / "contr";
  std::string log;
  const int rc = run("verify-contraction --case ia --d 2 --p 4 --N 32 --L 2 "
                     "--u0 gaussian --width 0.3 --amplitude 0.8 "
                     "--phi powerlaw:alpha=2:scale=0.5 --T 0.2 --steps 32 "
                     "--halvings 4 --seed 2468 --out " + out.string(),
                     &log);
  EXPECT_EQ(rc, 0) << log;
  std::ifstream in(out / "contraction.json");
  nlohmann::json j = nlohmann::json::parse(in);
  EXPECT_TRUE(j["strictly_decreasing_in_T"].get<bool>());
  EXPECT_GT(j["theta_hat"].get<double>(), 0.0);
}

}  // namespace
