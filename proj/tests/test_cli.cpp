#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "config.hpp"
#include "diagosc/stochastic.hpp"
#include "schema.hpp"

namespace fs = std::filesystem;
using namespace diagosc;

namespace {

struct RunResult {
  int status = -1;
  std::string out;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("diagosc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  RunResult run(const std::string& args) const {
    const std::string stdout_path = path("stdout.txt");
    const std::string cmd = std::string(DIAGOSC_CLI_PATH) + " " + args + " > " + stdout_path +
                            " 2> " + path("stderr.txt");
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(stdout_path);
    return r;
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  /// Data rows of a schema-tagged CSV (skips the schema and header lines).
  static std::vector<std::vector<double>> rows(const std::string& text) {
    std::vector<std::vector<double>> out;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::vector<double> row;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
      out.push_back(row);
    }
    return out;
  }

  fs::path dir_;
};

}  // namespace

TEST(Config, ParsesSectionsListsAndComments) {
  const std::string text =
      "# experiment\n"
      "seed = 7\n"
      "epsilon = 1.5   # inline comment\n"
      "mode = \"triangle\"\n"
      "[qc-scan]\n"
      "n_list = [4, 8, 16]\n"
      "epsilon = 2\n"
      "[simulate]\n"
      "t_end = 10\n";
  const cli::ConfigReader scan(cli::parse_config_text(text, "qc-scan"));
  EXPECT_EQ(scan.seed("seed", 0), 7u);
  EXPECT_EQ(scan.real("epsilon", 0), 2.0);
  EXPECT_EQ(scan.text("mode", ""), "triangle");
  EXPECT_EQ(scan.integer_list("n_list", {}, 2), (std::vector<long>{4, 8, 16}));
  EXPECT_FALSE(scan.has("t_end"));
  const cli::ConfigReader sim(cli::parse_config_text(text, "simulate"));
  EXPECT_EQ(sim.real("epsilon", 0), 1.5);
  EXPECT_EQ(sim.positive("t_end", 1), 10.0);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(cli::parse_config_text("colour = red\n", "simulate"), cli::ConfigError);
  EXPECT_THROW(cli::parse_config_text("[plot]\n", "simulate"), cli::ConfigError);
  EXPECT_THROW(cli::parse_config_text("seed 3\n", "simulate"), cli::ConfigError);
  EXPECT_THROW(cli::parse_config_text("seed = 3\nseed = 4\n", "simulate"), cli::ConfigError);
  EXPECT_THROW(cli::parse_config_text("seed =\n", "simulate"), cli::ConfigError);
  const cli::ConfigReader cfg(cli::parse_config_text("n = 2.5\nsigma = -1\nseed = -3\nepsilon = abc\n", "x"));
  EXPECT_THROW(cfg.integer("n", 0, 2), cli::ConfigError);
  EXPECT_THROW(cfg.positive("sigma", 1), cli::ConfigError);
  EXPECT_THROW(cfg.seed("seed", 1), cli::ConfigError);
  EXPECT_THROW(cfg.real("epsilon", 1), cli::ConfigError);
}

TEST_F(CliTest, ModeCurveDefaultShape) {
  const RunResult r = run("mode-curve");
  ASSERT_EQ(r.status, 0);
  const auto data = rows(r.out);
  ASSERT_EQ(data.size(), 601u);
  for (const auto& row : data) {
    const double a = row[0], mu = row[1];
    if (std::abs(a) <= 1.0) {
      EXPECT_EQ(mu, 0.0) << a;
    } else {
      EXPECT_NEAR(mu, std::copysign(std::sqrt(a * a - 1.0), a), 1e-9) << a;
    }
  }
}

TEST_F(CliTest, ModeCurveUncoupledIsIdentity) {
  const RunResult r = run("mode-curve --epsilon 0");
  ASSERT_EQ(r.status, 0);
  for (const auto& row : rows(r.out)) EXPECT_EQ(row[1], row[0]);
}

TEST_F(CliTest, ModeCurveTriangleMatchesClosedForm) {
  write("tri.toml", "mode = triangle\na_min = 1.5\na_max = 3\na_step = 0.5\n");
  const RunResult r = run("mode-curve --config " + path("tri.toml"));
  ASSERT_EQ(r.status, 0);
  const auto data = rows(r.out);
  ASSERT_EQ(data.size(), 4u);
  for (const auto& row : data) {
    // Period of u' = a + tri(u): (pi) ln((a + 1) / (a - 1)).
    const double a = row[0];
    EXPECT_NEAR(row[1], 2.0 / std::log((a + 1.0) / (a - 1.0)), 1e-9) << a;
  }
}

TEST_F(CliTest, DensityFilesAndMass) {
  write("d.toml", "samples = 200000\nbins = 40\n");
  const std::string out = path("density.csv");
  ASSERT_EQ(run("density --config " + path("d.toml") + " --out " + out).status, 0);
  for (const auto& f : {out, out + ".atom.csv", out + ".hist.csv"}) {
    EXPECT_EQ(run("--schema-check " + f).status, 0) << f;
  }
  const auto atom = rows(slurp(out + ".atom.csv"));
  ASSERT_EQ(atom.size(), 1u);
  EXPECT_NEAR(atom[0][1], 0.682689492137085897, 1e-12);
  EXPECT_NEAR(atom[0][3], 1.0, 1e-12);
  EXPECT_NEAR(atom[0][4], 1.0, 1e-3);  // grid truncated at |mu| = 4
  EXPECT_NEAR(atom[0][6], atom[0][1], 4.0 * atom[0][7]);
  double chi2 = 0.0;
  const auto hist = rows(slurp(out + ".hist.csv"));
  ASSERT_EQ(hist.size(), 40u);
  for (const auto& row : hist) {
    if (row[3] > 0.0) chi2 += (row[2] - row[3]) * (row[2] - row[3]) / row[3];
  }
  EXPECT_LT(chi2, stats::chi_square_quantile(0.999, 40));
}

TEST_F(CliTest, QcScanColumnsAndCrossings) {
  write("q.toml", "n_list = [100, 1000, 10000]\ntrials = 0\nepsilon_max = 8\nepsilon_steps = 81\n");
  const std::string out = path("qc.csv");
  ASSERT_EQ(run("qc-scan --config " + path("q.toml") + " --out " + out).status, 0);
  EXPECT_EQ(run("--schema-check " + out).status, 0);
  const auto data = rows(slurp(out));
  ASSERT_EQ(data.size(), 3u * 81u);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i][1] == 0.0) {
      EXPECT_EQ(data[i][6], 0.0);
    }
    if (i % 81) {
      EXPECT_GE(data[i][6], data[i - 1][6]);
    }
    EXPECT_TRUE(std::isnan(data[i][4]));
  }
  // Curves shift right with N at every interior epsilon.
  for (std::size_t k = 1; k + 1 < 81; ++k) {
    EXPECT_GE(data[k][6], data[81 + k][6]);
    EXPECT_GE(data[81 + k][6], data[162 + k][6]);
  }
  const auto cross = rows(slurp(out + ".crossings.csv"));
  ASSERT_EQ(cross.size(), 3u);
  for (const auto& row : cross) {
    // Independent bisection of erf(e / sqrt 2)^(N - 1) = 1/2.
    double lo = 0.0, hi = 20.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (std::pow(std::erf(mid / std::numbers::sqrt2), row[0] - 1.0) < 0.5 ? lo : hi) = mid;
    }
    EXPECT_NEAR(row[3], 0.5 * (lo + hi), 1e-8);
  }
}

TEST_F(CliTest, QcScanMonteCarloIsSeeded) {
  const std::string args = "qc-scan --n 4 --epsilon 1.5 --trials 5000 --seed 3";
  const RunResult a = run(args), b = run(args), c = run(args + " --threads 3");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  const auto data = rows(a.out);
  ASSERT_EQ(data.size(), 1u);
  EXPECT_NEAR(data[0][4], data[0][6], data[0][5]);
}

TEST_F(CliTest, SimulateTwoOscillators) {
  write("s.toml", "omega = [0, 2]\ntheta0 = [0.1, -0.4]\n");
  const std::string out = path("sim.json");
  ASSERT_EQ(run("simulate --config " + path("s.toml") + " --out " + out).status, 0);
  EXPECT_EQ(run("--schema-check " + out).status, 0);
  EXPECT_EQ(run("--schema-check " + out + ".trajectory.csv").status, 0);
  const auto doc = nlohmann::json::parse(slurp(out));
  EXPECT_NEAR(doc["Omega_analytic"][0].get<double>(), 1.0 - 1.0 / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(doc["Omega_analytic"][1].get<double>(), 1.0 + 1.0 / std::sqrt(2.0), 1e-9);
  EXPECT_LT(doc["max_frequency_error"].get<double>(), 1e-3);
  EXPECT_EQ(doc["empirical_class"]["tag"], "incoherent");
  EXPECT_LT(doc["separation"]["max_discrepancy"].get<double>(), 1e-6);
}

TEST_F(CliTest, SimulateIsByteIdenticalUnderSeed) {
  const std::string args = "simulate --n 5 --seed 11 --t-end 300";
  const RunResult a = run(args + " --out " + path("a.json"));
  const RunResult b = run(args + " --out " + path("b.json"));
  ASSERT_EQ(a.status, 0);
  ASSERT_EQ(b.status, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  EXPECT_EQ(slurp(path("a.json.trajectory.csv")), slurp(path("b.json.trajectory.csv")));
  const RunResult c = run("simulate --n 5 --seed 12 --t-end 300");
  EXPECT_NE(c.out, slurp(path("a.json")));
}

TEST_F(CliTest, SimulateUncoupledIsIncoherent) {
  const RunResult r = run("simulate --n 4 --epsilon 0 --t-end 100");
  ASSERT_EQ(r.status, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["analytic_class"]["tag"], "incoherent");
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(doc["Omega_analytic"][i].get<double>(), doc["omega"][i].get<double>(), 1e-12);
    EXPECT_NEAR(doc["Omega_empirical"][i].get<double>(), doc["omega"][i].get<double>(), 1e-9);
  }
}

TEST_F(CliTest, VerifyPassesWithRandomBasis) {
  write("v.toml", "trials = 2000\ntrend_trials = 5000\nclt_n = 200\nclt_samples = 4000\ndistribution = uniform\n");
  const std::string out = path("verify.json");
  const RunResult r = run("verify --config " + path("v.toml") + " --out " + out);
  EXPECT_EQ(r.status, 0) << slurp(out);
  EXPECT_EQ(run("--schema-check " + out).status, 0);
  const auto doc = nlohmann::json::parse(slurp(out));
  EXPECT_TRUE(doc["passed"].get<bool>());
  EXPECT_EQ(doc["checks"].size(), 6u);
}

TEST_F(CliTest, VerifyFailsWithFourierBasis) {
  write("v.toml", "basis = fourier\ntrials = 2000\ntrend_trials = 2000\nclt_n = 100\nclt_samples = 2000\n");
  const RunResult r = run("verify --config " + path("v.toml"));
  EXPECT_EQ(r.status, 3);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_FALSE(doc["passed"].get<bool>());
}

TEST_F(CliTest, ValidateBasis) {
  RunResult r = run("validate-basis --n 64");
  ASSERT_EQ(r.status, 0);
  auto doc = nlohmann::json::parse(r.out);
  EXPECT_TRUE(doc["valid"].get<bool>());
  EXPECT_FALSE(doc["row_distinct"].get<bool>());
  EXPECT_LT(doc["orthonormality_error"].get<double>(), 1e-12);

  write("bad.csv", "3,2\n1,0\n0,1\n0,0\n");
  write("b.toml", "basis = \"" + path("bad.csv") + "\"\n");
  r = run("validate-basis --config " + path("b.toml"));
  EXPECT_EQ(r.status, 3);
  doc = nlohmann::json::parse(r.out);
  EXPECT_FALSE(doc["valid"].get<bool>());

  write("short.csv", "3,2\n1,0\n");
  write("s.toml", "basis = \"" + path("short.csv") + "\"\n");
  EXPECT_EQ(run("validate-basis --config " + path("s.toml")).status, 1);
}

TEST_F(CliTest, ExitCodeForInvalidConfig) {
  write("unknown.toml", "colour = red\n");
  EXPECT_EQ(run("simulate --config " + path("unknown.toml")).status, 1);
  EXPECT_EQ(run("simulate --config " + path("missing.toml")).status, 1);
  EXPECT_EQ(run("mode-curve --epsilon -1").status, 1);
  EXPECT_EQ(run("qc-scan --sigma 0").status, 1);
  EXPECT_EQ(run("simulate --n 1").status, 1);
  EXPECT_EQ(run("frobnicate").status, 1);
  EXPECT_EQ(run("").status, 1);
  EXPECT_EQ(run("mode-curve --out " + path("no/such/dir/x.csv")).status, 1);
}

TEST_F(CliTest, ExitCodeForNumericalFailure) {
  write("huge.txt", "1e300\n-1e300\n1e300\n-1e300\n");
  write("h.toml", "mode = \"sampled:" + path("huge.txt") + "\"\nomega = [0, 1]\nt_end = 10\n");
  EXPECT_EQ(run("simulate --config " + path("h.toml")).status, 2);
}

TEST_F(CliTest, FlagsOverrideConfig) {
  write("o.toml", "epsilon = 0\na_min = 2\na_max = 2\n");
  const auto from_file = rows(run("mode-curve --config " + path("o.toml")).out);
  const auto overridden = rows(run("mode-curve --config " + path("o.toml") + " --epsilon 1").out);
  ASSERT_EQ(from_file.size(), 1u);
  ASSERT_EQ(overridden.size(), 1u);
  EXPECT_EQ(from_file[0][1], 2.0);
  EXPECT_NEAR(overridden[0][1], std::sqrt(3.0), 1e-9);
}

TEST_F(CliTest, SchemaCheckRejectsDamagedFiles) {
  const std::string out = path("curve.csv");
  ASSERT_EQ(run("mode-curve --out " + out).status, 0);
  EXPECT_EQ(run("--schema-check " + out).status, 0);
  std::string text = slurp(out);
  write("cut.csv", text.substr(0, text.size() - 3) + "x\n");
  EXPECT_EQ(run("--schema-check " + path("cut.csv")).status, 3);
  write("noschema.csv", "a,mu\n1,2\n");
  EXPECT_EQ(run("--schema-check " + path("noschema.csv")).status, 3);
  write("j.json", "{\"schema\": \"diagosc.simulate\", \"schema_version\": 1}");
  EXPECT_EQ(run("--schema-check " + path("j.json")).status, 3);
}
