#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sten/cli.hpp"
#include "sten/io.hpp"
#include "testutil.hpp"

using namespace sten;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path write_config(const testutil::TempDir& tmp, const std::string& name,
                                   const json& cfg) {
  const auto path = tmp.path() / name;
  write_text_atomic(path, cfg.dump(2));
  return path;
}

json front_solve_config() {
  return json{{"potential", {{"name", "double_well"}, {"dim", 1}}},
              {"grid", {{"dim", 1}, {"origin", {-8.0}}, {"spacing", 0.05}, {"cells", {320}}}},
              {"boundary", "dirichlet"},
              {"init", "front"},
              {"solver", {{"dt", 0.0}, {"tol", 1e-8}, {"max_iters", 200000},
                          {"energy_check_interval", 10}}}};
}

int run_cli(std::initializer_list<std::string> args) {
  return cli::run(std::vector<std::string>(args));
}

}  // namespace

TEST_CASE("solve writes snapshot, histories, and metadata; exit 0") {
  testutil::TempDir tmp;
  const auto cfg = write_config(tmp, "run.json", front_solve_config());
  const auto out = tmp.path() / "out";
  CHECK(run_cli({"solve", "--config", cfg.string(), "--out", out.string()}) == cli::kExitOk);
  CHECK(std::filesystem::exists(out / "u.fld"));
  CHECK(std::filesystem::exists(out / "u.json"));
  CHECK(std::filesystem::exists(out / "residuals.csv"));
  json rep = json::parse(slurp(out / "solve.json"));
  CHECK(rep["converged"].get<bool>());
  CHECK(rep["final_residual"].get<double>() <= 1e-8);
  CHECK(rep["tool"].get<std::string>() == std::string(kToolVersion));
  CHECK(rep["config_hash"].get<std::string>().size() == 16);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  testutil::TempDir tmp;
  const auto cfg = write_config(tmp, "run.json", front_solve_config());
  const auto out1 = tmp.path() / "a", out2 = tmp.path() / "b";
  REQUIRE(run_cli({"solve", "--config", cfg.string(), "--out", out1.string()}) == 0);
  REQUIRE(run_cli({"solve", "--config", cfg.string(), "--out", out2.string()}) == 0);
  for (const char* name : {"u.fld", "u.json", "residuals.csv", "energies.csv", "solve.json"})
    CHECK(slurp(out1 / name) == slurp(out2 / name));
}

TEST_CASE("exit-code contract") {
  testutil::TempDir tmp;

  SUBCASE("stability-violating dt is a config error (3)") {
    json cfg = front_solve_config();
    cfg["solver"]["dt"] = 1.0;
    const auto path = write_config(tmp, "bad.json", cfg);
    CHECK(run_cli({"solve", "--config", path.string(), "--out", (tmp.path() / "o").string()}) ==
          cli::kExitConfigError);
  }
  SUBCASE("missing config file is a config error (3)") {
    CHECK(run_cli({"solve", "--config", (tmp.path() / "nope.json").string()}) ==
          cli::kExitConfigError);
  }
  SUBCASE("malformed json is a config error (3)") {
    const auto path = tmp.path() / "broken.json";
    write_text_atomic(path, "{not json");
    CHECK(run_cli({"solve", "--config", path.string()}) == cli::kExitConfigError);
  }
  SUBCASE("corrupted snapshot fails validation (2)") {
    // write a good snapshot then inject a NaN
    Grid g = Grid::make(2, Vec::Constant(2, -1.0), 0.125, {16, 16, 0});
    write_field_snapshot(manufactured_field("front", g), tmp.path() / "u");
    {
      std::fstream raw(tmp.path() / "u.fld", std::ios::binary | std::ios::in | std::ios::out);
      raw.seekp(-16, std::ios::end);
      const double nan = std::numeric_limits<double>::quiet_NaN();
      raw.write(reinterpret_cast<const char*>(&nan), 8);
    }
    json cfg = {{"potential", {{"name", "double_well"}, {"dim", 2}}},
                {"snapshot", (tmp.path() / "u").string()}};
    const auto path = write_config(tmp, "snap.json", cfg);
    CHECK(run_cli({"verify-tensor", "--config", path.string(),
                   "--out", (tmp.path() / "o2").string()}) == cli::kExitCheckFailed);
  }
  SUBCASE("connection for a continuum-minima potential fails validation (2)") {
    json cfg = {{"potential", {{"name", "ginzburg_landau"}, {"dim", 2}}},
                {"connection", {{"pair", {0, 1}}, {"spacing", 0.02}, {"half_length", 8.0}}}};
    const auto path = write_config(tmp, "conn.json", cfg);
    CHECK(run_cli({"connection", "--config", path.string(),
                   "--out", (tmp.path() / "o3").string()}) == cli::kExitCheckFailed);
  }
  SUBCASE("starved connection iteration budget diverges (4)") {
    json cfg = {{"potential", {{"name", "triple_well"}}},
                {"connection", {{"pair", {0, 1}}, {"spacing", 0.02}, {"half_length", 6.0},
                                {"max_iters", 10}}}};
    const auto path = write_config(tmp, "stall.json", cfg);
    CHECK(run_cli({"connection", "--config", path.string(),
                   "--out", (tmp.path() / "o4").string()}) == cli::kExitDiverged);
  }
}

TEST_CASE("verify-tensor refinement study on manufactured fields") {
  testutil::TempDir tmp;
  json cfg = {{"potential", {{"name", "ginzburg_landau"}, {"dim", 2}}},
              {"tensor",
               {{"fields", {"trig", "front"}},
                {"boundary", "dirichlet"},
                {"box", {{"origin", {0.0, 0.0}}, {"lengths", {1.0, 1.0}}}},
                {"h_sequence", {0.04, 0.02, 0.01}}}}};
  const auto path = write_config(tmp, "vt.json", cfg);
  const auto out = tmp.path() / "out";
  CHECK(run_cli({"verify-tensor", "--config", path.string(), "--out", out.string()}) == 0);
  json rep = json::parse(slurp(out / "verify_tensor.json"));
  CHECK(rep["pass"].get<bool>());
  for (const auto& f : rep["fields"]) {
    CHECK(f["divergence_pass"].get<bool>());
    CHECK(f["algebra"]["pass"].get<bool>());
  }
  CHECK(std::filesystem::exists(out / "divergence_convergence.csv"));
}

TEST_CASE("monotonicity command on the manufactured vortex") {
  testutil::TempDir tmp;
  json cfg = {{"potential", {{"name", "ginzburg_landau"}, {"dim", 2}}},
              {"grid", {{"dim", 2}, {"origin", {-8.0, -8.0}}, {"spacing", 0.125},
                        {"cells", {128, 128}}}},
              {"boundary", "dirichlet"},
              {"init", "vortex"},
              {"center", {0.0, 0.0}},
              {"radii", {{"min", 0.5}, {"max", 7.0}}}};
  const auto path = write_config(tmp, "mono.json", cfg);
  const auto out = tmp.path() / "out";
  CHECK(run_cli({"monotonicity", "--config", path.string(), "--out", out.string()}) == 0);
  json rep = json::parse(slurp(out / "monotonicity.json"));
  CHECK(rep["weak"]["pass"].get<bool>());
  CHECK(!rep["strong"]["pass"].get<bool>());  // vortex: strong fails, recorded
  CHECK(rep["liouville_bound_holds"].get<bool>());
  const double c = rep["growth_log_coefficient"].get<double>();
  CHECK(std::abs(c - M_PI) / M_PI <= 0.15);
  CHECK(std::filesystem::exists(out / "ball_energy.csv"));
}

TEST_CASE("modica command flags the vortex far field") {
  testutil::TempDir tmp;
  json cfg = {{"potential", {{"name", "ginzburg_landau"}, {"dim", 2}}},
              {"grid", {{"dim", 2}, {"origin", {-8.0, -8.0}}, {"spacing", 0.125},
                        {"cells", {128, 128}}}},
              {"boundary", "dirichlet"},
              {"init", "vortex"}};
  const auto path = write_config(tmp, "mod.json", cfg);
  const auto out = tmp.path() / "out";
  CHECK(run_cli({"modica", "--config", path.string(), "--out", out.string()}) == 0);
  json rep = json::parse(slurp(out / "modica.json"));
  CHECK(rep["min_slack"].get<double>() < 0.0);
  CHECK(rep["strengthened_trace_ok"].get<bool>());
}

TEST_CASE("connection command emits the sigma table and the triangle verdict") {
  testutil::TempDir tmp;
  json cfg = {{"potential", {{"name", "triple_well"}}},
              {"connection",
               {{"all_pairs", true}, {"spacing", 0.02}, {"half_length", 6.0}}}};
  const auto path = write_config(tmp, "tri.json", cfg);
  const auto out = tmp.path() / "out";
  CHECK(run_cli({"connection", "--config", path.string(), "--out", out.string()}) == 0);
  json rep = json::parse(slurp(out / "sigma_table.json"));
  CHECK(rep["pass"].get<bool>());
  CHECK(rep["sigma_table"].size() == 3);
  CHECK(rep["max_pair_spread"].get<double>() <= 1e-6);
}

TEST_CASE("surface command: catenoid ratio list is monotone") {
  testutil::TempDir tmp;
  json cfg = {{"surface",
               {{"name", "catenoid"}, {"v_extent", 2.8}, {"elements", 256},
                {"elements_axial", 128}, {"point", {1.0, 0.0, 0.0}},
                {"radii", {{"min", 0.4}, {"max", 2.4}}}}}};
  const auto path = write_config(tmp, "surf.json", cfg);
  const auto out = tmp.path() / "out";
  CHECK(run_cli({"surface", "--config", path.string(), "--out", out.string()}) == 0);
  json rep = json::parse(slurp(out / "surface.json"));
  CHECK(rep["monotonicity"]["pass"].get<bool>());
  CHECK(std::filesystem::exists(out / "surface_area.csv"));
}

TEST_CASE("report-all fans out the configured sections") {
  testutil::TempDir tmp;
  json cfg = {{"potential", {{"name", "double_well"}, {"dim", 2}}},
              {"gradient_check", {{"points", 50}}},
              {"tensor",
               {{"fields", {"trig"}},
                {"boundary", "dirichlet"},
                {"box", {{"origin", {0.0, 0.0}}, {"lengths", {1.0, 1.0}}}},
                {"h_sequence", {0.04, 0.02}}}}};
  const auto path = write_config(tmp, "all.json", cfg);
  const auto out = tmp.path() / "out";
  CHECK(run_cli({"report-all", "--config", path.string(), "--out", out.string(), "--jobs", "2"}) ==
        0);
  json rep = json::parse(slurp(out / "report.json"));
  CHECK(rep["pass"].get<bool>());
  CHECK(rep["sections"].size() == 2);
  CHECK(std::filesystem::exists(out / "gradient_check" / "gradient_check.json"));
  CHECK(std::filesystem::exists(out / "tensor" / "verify_tensor.json"));
}

TEST_CASE("csv doubles use full round-trip precision") {
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
  CHECK(format_double(2.0) == "2");
}
