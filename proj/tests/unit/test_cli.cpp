#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eqlab/cli/commands.hpp"
#include "eqlab/cli/config.hpp"
#include "eqlab/error.hpp"

using namespace eqlab;
using namespace eqlab::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "eqlab_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "eqlab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json monopole_doc() {
  return json::parse(R"({
    "field": {"type": "ensemble", "charges": [{"position": [0,0,0], "strength": 1.0}]},
    "levels": [0.02, 0.04, 0.08, 0.12, 0.2],
    "grid": {"n_theta": 12, "n_phi": 24, "bracket": [0.01, 1000]},
    "identities": {"points": 100}
  })");
}

json dipole_doc() {
  return json::parse(R"({
    "field": {"type": "dipole", "c00": 1.0, "c10": 0.2},
    "levels": {"geometric": {"min": 0.02, "max": 0.2, "count": 6}},
    "grid": {"n_theta": 20, "n_phi": 40, "bracket": [0.5, 10000]},
    "identities": {"points": 100}
  })");
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  Overrides ov;
  ov.seed = 42;
  ov.n_theta = 10;
  ov.tolerances = {{"closed_form", 1e-9}};
  const RunConfig c = parse_config(monopole_doc(), ov);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.grid.n_theta, 10);
  EXPECT_EQ(c.grid.n_phi, 24);
  EXPECT_EQ(c.tol.get("closed_form"), 1e-9);
  EXPECT_EQ(c.tol.get("finite_difference"), 1e-4);
  EXPECT_EQ(c.kind, "exterior");
  EXPECT_EQ(c.levels.size(), 5u);
  const json r = c.to_json();
  EXPECT_EQ(r["seed"], 42);
  EXPECT_EQ(r["tolerances"]["closed_form"], 1e-9);
}

TEST(Config, CavityDefaultsToInterior) {
  const RunConfig c = parse_config(json::parse(R"({"field": {"type": "cavity_green", "center": [0,0,0.3], "radius": 1}})"));
  EXPECT_EQ(c.kind, "interior");
}

TEST(Config, LevelRanges) {
  const auto g = parse_levels(json::parse(R"({"geometric": {"min": 0.01, "max": 1, "count": 3}})"), "levels", true);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g[1], 0.1, 1e-15);
  const auto l = parse_levels(json::parse(R"({"linear": {"min": -1, "max": 1, "count": 5}})"), "planar.levels", false);
  EXPECT_EQ(l[2], 0.0);
  const auto s = parse_levels(json::parse("[0.3, 0.1, 0.2]"), "levels", true);
  EXPECT_EQ(s, (std::vector<double>{0.1, 0.2, 0.3}));
}

TEST(Config, ErrorsNameTheField) {
  const auto message = [](const json& doc) {
    try {
      parse_config(doc);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  json d = monopole_doc();
  d["levels"] = {0.1, -0.2};
  EXPECT_NE(message(d).find("levels[1]"), std::string::npos);
  d = monopole_doc();
  d["grid"]["n_phi"] = 23;
  EXPECT_NE(message(d).find("n_phi"), std::string::npos);
  d = monopole_doc();
  d["tolerances"] = {{"no_such_key", 1.0}};
  EXPECT_NE(message(d).find("no_such_key"), std::string::npos);
  d = monopole_doc();
  d["typo"] = 1;
  EXPECT_NE(message(d).find("typo"), std::string::npos);
  d = monopole_doc();
  d["levels"] = {0.1, 0.1};
  EXPECT_NE(message(d).find("levels"), std::string::npos);
}

TEST(Cli, MonopoleIdentitiesExitZero) {
  const auto dir = scratch("mono_ids");
  EXPECT_EQ(run({"identities", "--config", write_config(dir, monopole_doc()).string(), "--out", (dir / "out").string()}), 0);
  const json r = json::parse(slurp(dir / "out" / "identities.json"));
  EXPECT_EQ(r["exit_code"], 0);
  EXPECT_LE(r["points"]["suite"]["normal_logE"]["max"].get<double>(), 1e-12);
  EXPECT_LE(r["points"]["suite"]["laplacian_logE"]["max"].get<double>(), 1e-12);
  EXPECT_NE(r["convention"].get<std::string>().find("flux 1"), std::string::npos);
  EXPECT_TRUE(r.contains("config"));
  EXPECT_TRUE(r.contains("seed"));
}

TEST(Cli, DipoleIdentitiesExitZero) {
  const auto dir = scratch("dip_ids");
  EXPECT_EQ(run({"identities", "--config", write_config(dir, dipole_doc()).string(), "--out", (dir / "out").string()}), 0);
}

TEST(Cli, NonPositiveLevelIsConfigError) {
  const auto dir = scratch("bad_levels");
  json d = monopole_doc();
  d["levels"] = {0.1, 0.0};
  EXPECT_EQ(run({"identities", "--config", write_config(dir, d).string(), "--out", (dir / "out").string()}), 2);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const auto dir = scratch("cfg_errors");
  const auto cfg = write_config(dir, monopole_doc()).string();
  const auto out = (dir / "out").string();
  EXPECT_EQ(run({"identities", "--config", (dir / "missing.json").string(), "--out", out}), 2);
  EXPECT_EQ(run({"identities", "--config", cfg, "--out", out, "--tol-bogus=1"}), 2);
  EXPECT_EQ(run({"identities", "--config", cfg, "--out", out, "--tol-closed-form=abc"}), 2);
  EXPECT_EQ(run({"identities", "--config", cfg, "--out", out, "--n-phi", "7"}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
  json d = monopole_doc();
  d["grid"]["bracket"] = {1.0, 2.0};  // levels not bracketed
  EXPECT_EQ(run({"sweep", "--config", write_config(dir, d).string(), "--out", out}), 2);
}

TEST(Cli, BadFieldExitThree) {
  const auto dir = scratch("bad_field");
  json d = monopole_doc();
  d["field"] = json::parse(R"({"type": "cavity_green", "center": [0, 0, 2], "radius": 1})");
  EXPECT_EQ(run({"identities", "--config", write_config(dir, d).string(), "--out", (dir / "out").string()}), 3);
  d["field"] = json::parse(R"({"type": "multipole", "degree": 12})");
  EXPECT_EQ(run({"identities", "--config", write_config(dir, d).string(), "--out", (dir / "out").string()}), 3);
}

TEST(Cli, ToleranceFailureExitOne) {
  const auto dir = scratch("tol_fail");
  EXPECT_EQ(run({"identities", "--config", write_config(dir, dipole_doc()).string(), "--out",
                 (dir / "out").string(), "--tol-finite-difference=1e-15"}),
            1);
  const json r = json::parse(slurp(dir / "out" / "identities.json"));
  EXPECT_EQ(r["config"]["tolerances"]["finite_difference"], 1e-15);
}

TEST(Cli, NonConvexSweepExitFourAndStillWrites) {
  const auto dir = scratch("nonconvex");
  json d = json::parse(R"({
    "field": {"type": "dipole", "c00": 1.0, "c10": 1.0},
    "levels": [0.20, 0.21, 0.22, 0.23, 0.24],
    "grid": {"n_theta": 16, "n_phi": 32, "bracket": [2.0, 10000]},
    "sweep": {"refine": false}
  })");
  EXPECT_EQ(run({"sweep", "--config", write_config(dir, d).string(), "--out", (dir / "out").string()}), 4);
  const json r = json::parse(slurp(dir / "out" / "sweep.json"));
  EXPECT_FALSE(r["convex"].get<bool>());
  EXPECT_TRUE(r["sweep"]["monotone"].is_null());
  EXPECT_TRUE(fs::exists(dir / "out" / "sweep.csv"));
}

TEST(Cli, SweepWritesCsvAndGrids) {
  const auto dir = scratch("sweep");
  json d = monopole_doc();
  d["sweep"] = {{"export_grids", true}};
  EXPECT_EQ(run({"sweep", "--config", write_config(dir, d).string(), "--out", (dir / "out").string()}), 0);
  const std::string csv = slurp(dir / "out" / "sweep.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "level,flux,gauss_bonnet,W,F,beta,dW_fd,rhs,convex");
  const std::string grid = slurp(dir / "out" / "grid_0.csv");
  EXPECT_EQ(grid.substr(0, grid.find('\n')), "theta,phi,x,y,z,E,H,K,dS,dlogE_norm");
  EXPECT_TRUE(fs::exists(dir / "out" / "grid_4.json"));
}

TEST(Cli, AsymptoticsMonopoleIdenticallyZero) {
  const auto dir = scratch("asym_zero");
  json d = monopole_doc();
  d["levels"] = {0.005, 0.01, 0.02, 0.05, 0.1, 0.2};
  EXPECT_EQ(run({"asymptotics", "--config", write_config(dir, d).string(), "--out", (dir / "out").string()}), 0);
  const json r = json::parse(slurp(dir / "out" / "asymptotics.json"));
  EXPECT_EQ(r["status"], "identically zero, slope undefined");
  EXPECT_TRUE(r["slope"].is_null());
}

TEST(Cli, AsymptoticsNeedsDecadeAndAHalf) {
  const auto dir = scratch("asym_span");
  json d = dipole_doc();
  d["levels"] = {0.1, 0.11, 0.12, 0.13, 0.14, 0.15};
  EXPECT_EQ(run({"asymptotics", "--config", write_config(dir, d).string(), "--out", (dir / "out").string()}), 2);
}

TEST(Cli, FlowMonopoleTwoLevelTrace) {
  const auto dir = scratch("flow");
  json d = monopole_doc();
  d["levels"] = {0.05, 0.1};
  EXPECT_EQ(run({"flow", "--config", write_config(dir, d).string(), "--out", (dir / "out").string()}), 0);
  const json r = json::parse(slurp(dir / "out" / "flow.json"));
  EXPECT_LE(r["max_terminal_defect"].get<double>(), 1e-10);
  EXPECT_LE(r["max_radial_error"].get<double>(), 1e-10);
}

TEST(Cli, PlanarEllipse) {
  const auto dir = scratch("planar");
  const json d = json::parse(R"({"planar": {"field": {"type": "ellipse_exterior", "m": 0.3},
      "levels": {"linear": {"min": -1.1, "max": -0.05, "count": 8}}, "n_nodes": 512}})");
  EXPECT_EQ(run({"planar", "--config", write_config(dir, d).string(), "--out", (dir / "out").string()}), 0);
  const json r = json::parse(slurp(dir / "out" / "planar.json"));
  EXPECT_LE(r["sweep"]["conserved_spread"].get<double>(), 1e-6);
  const std::string csv = slurp(dir / "out" / "planar_curve_0.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "theta,x,y,E,kappa,ds");
}

TEST(Cli, DeterministicReports) {
  const auto dir = scratch("determinism");
  const json d = json::parse(R"({"mfs": {"shape": {"semi_axes": [1.0, 0.8, 0.7]}, "sources": 200,
      "check_points": 500}, "grid": {"n_theta": 12, "n_phi": 24}})");
  const auto cfg = write_config(dir, d).string();
  run({"mfs", "--config", cfg, "--out", (dir / "a").string(), "--seed", "9", "--threads", "1"});
  run({"mfs", "--config", cfg, "--out", (dir / "b").string(), "--seed", "9", "--threads", "2"});
  EXPECT_EQ(slurp(dir / "a" / "mfs.json"), slurp(dir / "b" / "mfs.json"));
  EXPECT_EQ(json::parse(slurp(dir / "a" / "mfs.json"))["seed"], 9);
  run({"mfs", "--config", cfg, "--out", (dir / "c").string(), "--seed", "10"});
  EXPECT_NE(slurp(dir / "a" / "mfs.json"), slurp(dir / "c" / "mfs.json"));
}

TEST(Cli, InvalidLogLevelIsConfigError) {
  setenv("EQLAB_LOG", "loud", 1);
  EXPECT_EQ(run({"identities"}), 2);
  setenv("EQLAB_LOG", "error", 1);
}
