#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "avgspde/config.hpp"
#include "avgspde/errors.hpp"
#include "avgspde/report_io.hpp"
#include "avgspde/svg.hpp"

using namespace avgspde;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("avg_spde_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& args, const fs::path& err = {}) {
  std::string cmd = std::string(AVG_SPDE_EXE) + " " + args + " > /dev/null";
  cmd += err.empty() ? " 2>/dev/null" : " 2>" + err.string();
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string error_of(const std::string& path, const std::string& sub = "simulate") {
  try {
    parse_config(path, sub);
  } catch (const ParameterError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("flag overrides beat file values") {
  const auto dir = scratch("override");
  write(dir / "a.cfg", "# comment\nL=1.0   # trailing comment\n\n  N = 8\n");
  const auto cfg = parse_config((dir / "a.cfg").string(), "simulate", {{"L", "1.5"}});
  CHECK(cfg.L == 1.5);
  CHECK(cfg.N == 8);
}

TEST_CASE("config errors name the key and the line") {
  const auto dir = scratch("errors");
  write(dir / "eps.cfg", "N=4\nepsilon=0\n");
  const auto e1 = error_of((dir / "eps.cfg").string());
  CHECK(e1.find(":2:") != std::string::npos);
  CHECK(e1.find("epsilon") != std::string::npos);

  write(dir / "unknown.cfg", "bogus=1\n");
  CHECK(error_of((dir / "unknown.cfg").string()).find("unknown key 'bogus'") != std::string::npos);
  write(dir / "malformed.cfg", "L 1.0\n");
  CHECK(error_of((dir / "malformed.cfg").string()).find(":1: malformed") != std::string::npos);
  write(dir / "range.cfg", "q2_kind=pink\n");
  CHECK(error_of((dir / "range.cfg").string()).find("q2_kind") != std::string::npos);
  write(dir / "burn.cfg", "T=1\nt_burn=2\n");
  CHECK(error_of((dir / "burn.cfg").string()).find("t_burn") != std::string::npos);
  CHECK(error_of((dir / "missing.cfg").string()).find("cannot open") != std::string::npos);
  CHECK_THROWS_AS(parse_config("", "simulate", {{"replicas", "0"}}), ParameterError);
  CHECK_THROWS_AS(parse_config("", "simulate", {{"sigma2", "0"}}), ParameterError);
  CHECK_THROWS_AS(parse_config("", "teleport"), ParameterError);
}

TEST_CASE("empty file gives the documented defaults") {
  const auto dir = scratch("empty");
  write(dir / "empty.cfg", "");
  for (const auto& sub : subcommands()) CHECK(parse_config((dir / "empty.cfg").string(), sub) == default_config(sub));
  const auto c = default_config("convergence");
  CHECK(c.T == 2.0);
  CHECK(c.dt == 2e-4);
  CHECK(c.replicas == 64);
  CHECK(c.epsilons == std::vector<double>{0.4, 0.2, 0.1, 0.05, 0.025});
  const auto b = default_config("bifurcation");
  REQUIRE(b.L_grid.size() == 13);
  CHECK(b.L_grid[5] == 1.3);
  CHECK(b.L_grid[12] == 2.0);
}

TEST_CASE("lists and ranges") {
  auto c = default_config("variance");
  set_config_value(c, "epsilons", "0.3, 0.1,0.05");
  CHECK(c.epsilons == std::vector<double>{0.3, 0.1, 0.05});
  set_config_value(c, "L_grid", "1:0.25:2");
  CHECK(c.L_grid == std::vector<double>{1.0, 1.25, 1.5, 1.75, 2.0});
  CHECK_THROWS_AS(set_config_value(c, "epsilons", "0.1,-1"), ParameterError);
  CHECK_THROWS_AS(set_config_value(c, "L_grid", "2:0.1:1"), ParameterError);
}

TEST_CASE("manifest round-trips through parse_config") {
  const auto dir = scratch("manifest");
  auto cfg = parse_config("", "variance", {{"L", "1.25"}, {"epsilons", "0.2,0.1"}, {"seed", "77"}});
  io::RunManifest m;
  m.subcommand = cfg.subcommand;
  m.config = cfg;
  io::write_outputs(dir.string(), {{"x.csv", "a\n"}}, m);
  CHECK(parse_config((dir / "manifest.json").string(), "variance") == cfg);
  CHECK(slurp(dir / "x.csv") == "a\n");
  CHECK(slurp(dir / "manifest.json").find("\"files\": [\n    \"x.csv\"\n  ]") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "manifest.json.tmp"));

  CHECK(config_hash(cfg) == config_hash(cfg));
  auto other = cfg;
  other.seed = 78;
  CHECK(config_hash(cfg) != config_hash(other));
  CHECK(config_hash(cfg).size() == 16);
}

TEST_CASE("csv formatting") {
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::format_double(2.0) == "2");
  CHECK(io::format_double(1e-20) == "9.9999999999999995e-21");
  CHECK(io::format_double(std::nan("")) == "nan");
  CHECK(io::trajectory_csv(Trajectory{}) == "t,u_mid,v_mid,u_h_norm,v_h_norm\n");
  CHECK(io::trajectory_csv(Trajectory{}, 3) == "t,u_mid,v_mid,u_h_norm,v_h_norm,c_1,c_2,c_3\n");
  CHECK(io::convergence_csv({}) == "epsilon,replica,sup_error\n");
  CHECK(io::bifurcation_csv({}) == "L,rms_direct,amp_averaged\n");
  CHECK(io::variance_csv({}) == "epsilon,var_direct,var_surrogate\n");
  CHECK(io::mixing_csv({}) == "mode,measured,exact,bound,satisfied\n");
  CHECK(io::bench_csv({}) == "epsilon,t_direct_s,t_surrogate_s,ratio\n");

  const EigenGrid g(1.0, 2);
  Trajectory tr;
  tr.record(0.5, g.mode(1, 0.25), nullptr, g);
  CHECK(io::trajectory_csv(tr, 2) == "t,u_mid,v_mid,u_h_norm,v_h_norm,c_1,c_2\n0.5,0.25,nan,0.25,nan,0.25,0\n");
}

TEST_CASE("variance plot is log-log with the fitted overlay") {
  ScalingReport r;
  r.rows = {{0.025, 0.0023, 0.0018}, {0.05, 0.0042, 0.0034}, {0.1, 0.0082, 0.0075}, {0.2, 0.016, 0.014}};
  r.c_direct = 0.267, r.beta_direct = 0.468, r.c_surrogate = 0.270, r.beta_surrogate = 0.506;
  const auto s = svg::variance_plot(r);
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("(c eps^b)^2 direct") != std::string::npos);
  CHECK(s.find("<polyline") != std::string::npos);
  CHECK(s.find(">0.01</text>") != std::string::npos);  // decade tick
  CHECK(s.find("nan") == std::string::npos);
}

TEST_CASE("cli: determinism, exit codes, audit warnings") {
  const auto dir = scratch("cli");
  write(dir / "fhn.cfg", "T=0.5\nstride=5\ncoeffs=3\n");
  const std::string cfg = (dir / "fhn.cfg").string();
  REQUIRE(run("simulate --config " + cfg + " --seed 42 --out " + (dir / "a").string()) == 0);
  REQUIRE(run("simulate --config " + cfg + " --seed 42 --out " + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a/trajectory.csv") == slurp(dir / "b/trajectory.csv"));
  CHECK(slurp(dir / "a/manifest.json") == slurp(dir / "b/manifest.json"));
  CHECK(slurp(dir / "a/trajectory.csv").rfind("t,u_mid,v_mid,u_h_norm,v_h_norm,c_1,c_2,c_3\n", 0) == 0);
  REQUIRE(run("simulate --config " + cfg + " --seed 43 --out " + (dir / "c").string()) == 0);
  CHECK(slurp(dir / "a/trajectory.csv") != slurp(dir / "c/trajectory.csv"));

  // replay from the manifest
  REQUIRE(run("simulate --config " + (dir / "a/manifest.json").string() + " --out " + (dir / "d").string()) == 0);
  CHECK(slurp(dir / "a/trajectory.csv") == slurp(dir / "d/trajectory.csv"));

  CHECK(run("audit --L 1.8 --out " + (dir / "audit").string(), dir / "audit.err") == 0);
  CHECK(slurp(dir / "audit.err").find("H3 warn: C_g < lambda_1 fails") != std::string::npos);
  CHECK(slurp(dir / "audit/audit.csv").rfind("hypothesis,check,pass,detail\n", 0) == 0);

  CHECK(run("simulate --epsilon 0 --out " + (dir / "bad").string()) == 2);
  CHECK(run("simulate --config " + (dir / "nope.cfg").string()) == 2);
  CHECK(run("teleport") == 2);
  CHECK(run("simulate --bogus 1") == 2);
  CHECK(run("mixing --check --plot --out " + (dir / "mix").string()) == 0);
  CHECK(fs::exists(dir / "mix/mixing.svg"));
  CHECK(run("gaussianity --replicas 64 --out " + (dir / "g").string()) == 2);

  REQUIRE(run("simulate --config " + cfg + " --timestamps --out " + (dir / "ts").string()) == 0);
  CHECK(slurp(dir / "ts/manifest.json").find("\"timestamps\"") != std::string::npos);
  CHECK(slurp(dir / "a/manifest.json").find("\"timestamps\"") == std::string::npos);
}

TEST_CASE("cli: bifurcation --check brackets the threshold") {
  const auto dir = scratch("bif");
  REQUIRE(run("bifurcation --check --out " + dir.string()) == 0);
  const auto csv = slurp(dir / "bifurcation.csv");
  CHECK(csv.rfind("L,rms_direct,amp_averaged\n", 0) == 0);
  CHECK(csv.find("\n1.3,") != std::string::npos);
  CHECK(csv.find("\n1.3999999999999999,") != std::string::npos);
}
