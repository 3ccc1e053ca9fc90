#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracle/bessel_series.hpp"
#include "tumor/cli.hpp"

using namespace tumor;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "tumorsim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tumorsim_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream f(p);
  std::string line;
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  return rows;
}

const std::string A_unit = [] {
  std::ostringstream s;
  s.precision(17);
  s << oracle::steady_A_identity(1.0);
  return s.str();
}();

}  // namespace

TEST_CASE("steady command") {
  const fs::path dir = scratch("steady");
  const Run r = run({"steady", "--A", A_unit, "--out", dir.string()});
  REQUIRE(r.code == exit_ok);
  const json rep = json::parse(slurp(dir / "steady.json"));
  CHECK(rep["R_A"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  const double RA = rep["R_A"], A = rep["A"];
  CHECK(rep["alpha_A"].get<double>() == doctest::Approx(RA * RA * (1.0 - A / 2.0)).epsilon(1e-12));
  CHECK(csv(dir / "v0_profile.csv").front() == std::vector<std::string>{"r", "v0", "v0_prime"});

  // the 5-digit rounded A still lands within a few 1e-5 of R = 1
  const Run rounded = run({"steady", "--A", "0.89279", "--out", dir.string()});
  CHECK(rounded.code == exit_ok);
  CHECK(json::parse(slurp(dir / "steady.json"))["R_A"].get<double>() == doctest::Approx(1.0).epsilon(1e-3));

  CHECK(run({"steady", "--A", "1.0"}).code == exit_validation);
  CHECK(run({"steady", "--A", "2", "--model", "poly:1,1", "--out", dir.string()}).code == exit_validation);
  CHECK(run({"steady"}).code == exit_validation);
  CHECK(run({"nonsense"}).code == exit_validation);
}

TEST_CASE("spectrum command") {
  const fs::path dir = scratch("spectrum");
  const Run r = run({"spectrum", "--A", A_unit, "--G", "10", "--kmax", "64", "--out", dir.string()});
  REQUIRE(r.code == exit_ok);
  const json rep = json::parse(slurp(dir / "report.json"));
  CHECK(std::abs(rep["mu"]["1"].get<double>()) <= 1e-8);
  CHECK(rep["g_star"].get<double>() == doctest::Approx(174.8157).epsilon(1e-4));
  CHECK(rep["k0"].get<int>() == 2);
  CHECK(rep["classification"]["regime"] == "inconclusive_below_threshold");
  CHECK(rep["l_G"].get<int>() >= 2);
  const auto rows = csv(dir / "spectrum.csv");
  CHECK(rows.front() == std::vector<std::string>{"k", "lambda_k", "ratio_k", "mu_k", "g_threshold_k"});
  CHECK(rows.size() == 66);
  CHECK(rows[2][4].empty());  // G_1 undefined

  const fs::path hs = scratch("spectrum_hs");
  REQUIRE(run({"spectrum", "--A", "0.5", "--G", "0", "--kmax", "12", "--out", hs.string()}).code == exit_ok);
  const json hrep = json::parse(slurp(hs / "report.json"));
  const double R = hrep["R"];
  for (const auto& row : csv(hs / "spectrum.csv")) {
    if (row[0] == "k") continue;
    const double k = std::stod(row[0]);
    CHECK(std::stod(row[3]) == (-k * k * k + k) / (R * R * R));
  }
}

TEST_CASE("evolve command, linear and nonlinear") {
  const fs::path dir = scratch("evolve_lin");
  const Run r = run({"evolve", "--A", A_unit, "--G", "5", "--mode", "linear", "--seed-shape", "1:1e-3", "--t-end",
                     "2", "--kmax", "8", "--out", dir.string()});
  REQUIRE(r.code == exit_ok);
  const auto rows = csv(dir / "trajectory.csv");
  CHECK(rows.front()[0] == "t");
  CHECK(rows.front()[1] == "sup_norm");
  CHECK(rows.front()[3] == "amp_1");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::abs(std::stod(rows[i][3]) - 5e-4) <= 1e-12);

  // a small grid keeps the nonlinear runs quick
  const fs::path cfg_dir = scratch("evolve_cfg");
  fs::create_directories(cfg_dir);
  {
    std::ofstream f(cfg_dir / "run.json");
    f << R"({"model": "identity", "A": )" << A_unit
      << R"(, "grid": {"n_theta": 48, "n_r": 24}, "stepper": {"record_interval": 0.02}})";
  }
  const fs::path zero = scratch("evolve_zero");
  REQUIRE(run({"evolve", "--config", (cfg_dir / "run.json").string(), "--G", "1", "--mode", "nonlinear",
               "--t-end", "0.1", "--out", zero.string()})
              .code == exit_ok);
  for (const auto& row : csv(zero / "trajectory.csv")) {
    if (row[0] == "t") continue;
    for (std::size_t c = 2; c < row.size(); ++c) CHECK(std::stod(row[c]) <= 1e-8);
  }

  const fs::path grow = scratch("evolve_grow");
  const double Gs = 174.81572124701398;
  const Run g = run({"evolve", "--config", (cfg_dir / "run.json").string(), "--G", std::to_string(1.5 * Gs),
                     "--mode", "nonlinear", "--seed-shape", "2:1e-3", "--t-end", "0.5", "--out", grow.string()});
  REQUIRE(g.code == exit_ok);
  const json rep = json::parse(slurp(grow / "report.json"));
  const json& e = rep["growth_rates"][0];
  CHECK(e["k"] == 2);
  CHECK(e["mu_k"].get<double>() > 0.0);
  CHECK(std::abs(e["fitted_rate"].get<double>() / e["mu_k"].get<double>() - 1.0) <= 0.05);
  const json snaps = json::parse(slurp(grow / "snapshots.json"));
  CHECK(snaps["rho"].size() == snaps["times"].size());
}

TEST_CASE("evolve reports leaving the neighbourhood") {
  const fs::path dir = scratch("evolve_exit");
  const Run r = run({"evolve", "--A", A_unit, "--G", "600", "--mode", "linear", "--seed-shape", "2:0.2",
                     "--t-end", "5", "--kmax", "4", "--out", dir.string()});
  CHECK(r.code == exit_left_neighbourhood);
  CHECK(json::parse(slurp(dir / "report.json"))["left_neighbourhood"] == true);
  CHECK(run({"evolve", "--A", A_unit, "--seed-shape", "2:0.3", "--out", dir.string()}).code == exit_validation);
  CHECK(run({"evolve", "--A", A_unit, "--mode", "sideways", "--out", dir.string()}).code == exit_validation);
}

TEST_CASE("outputs are deterministic") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const fs::path& d : {a, b}) {
    REQUIRE(run({"spectrum", "--A", "0.6", "--G", "50", "--kmax", "20", "--out", d.string()}).code == exit_ok);
    REQUIRE(run({"evolve", "--A", "0.6", "--G", "50", "--kmax", "6", "--seed-shape", "2:1e-3:0.3,3:5e-4",
                 "--t-end", "0.3", "--out", d.string()})
                .code == exit_ok);
  }
  CHECK(slurp(a / "spectrum.csv") == slurp(b / "spectrum.csv"));
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
}

TEST_CASE("config handling, appendix-check and sweep") {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"A": 0.5, "colour": "blue"})";
  }
  {
    std::ofstream f(dir / "sweep.json");
    f << R"({"A": 0.5, "kmax": 16, "sweep": {"A": [0.4, 0.8], "G": [-1, 0, 10, 1000]}})";
  }
  {
    std::ofstream f(dir / "broken.json");
    f << "{ not json";
  }
  CHECK(run({"spectrum", "--config", (dir / "bad.json").string()}).code == exit_validation);
  CHECK(run({"spectrum", "--config", (dir / "broken.json").string()}).code == exit_validation);
  CHECK(run({"spectrum", "--config", (dir / "missing.json").string()}).code == exit_validation);

  const Run ap = run({"appendix-check", "--out", dir.string()});
  CHECK(ap.code == exit_ok);
  CHECK(ap.out.find("0.446") != std::string::npos);
  CHECK(ap.out.find("0.240") != std::string::npos);

  REQUIRE(run({"sweep", "--config", (dir / "sweep.json").string(), "--out", dir.string()}).code == exit_ok);
  const auto rows = csv(dir / "sweep.csv");
  CHECK(rows.size() == 9);
  CHECK(rows[1].back() == "unstable_high_vascularisation");
  CHECK(rows[2].back() == "hele_shaw");
  CHECK(rows[4].back() == "unstable_above_threshold");
}
