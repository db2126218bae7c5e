#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fb/cli.hpp"

using namespace fb;
namespace fs = std::filesystem;

namespace {

const char* kMiniScenario =
    "# comment line\n"
    "name = mini\n"
    "backend = symbolic\n"
    "seed = 7\n"
    "trials = 2\n"
    "\n"
    "[checks]\n"
    "jacobi-A\n"
    "jacobi-Q-P12\n"
    "R-perm\n"
    "R-perm-minus\n"
    "rank-BC\n";

std::string write_temp(const std::string& name, const std::string& body) {
  fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << body;
  return p.string();
}

}  // namespace

TEST_CASE("catalog listing: families, sorted checks, identity entries") {
  std::string a = list_catalog();
  CHECK(a.find("AB(ii)") != std::string::npos);
  CHECK(a.find("YB-MN") != std::string::npos);
  CHECK(a.find("jacobi-Q-P12") != std::string::npos);
  CHECK(a.find("(expected-fail)") != std::string::npos);
  CHECK(a == list_catalog());  // stable across calls
  // the identity catalog has at least 12 entries
  CHECK(identity_catalog().size() >= 12);
  // registered checks exist / do not exist
  CHECK(find_check("dirac-gram") != nullptr);
  CHECK(find_check("no-such-check") == nullptr);
}

TEST_CASE("scenario parser: happy path and schema errors") {
  std::istringstream good(kMiniScenario);
  Scenario sc = parse_scenario(good);
  CHECK(sc.name == "mini");
  CHECK(sc.config.backend == "symbolic");
  CHECK(sc.config.seed == 7);
  CHECK(sc.config.trials == 2);
  REQUIRE(sc.checks.size() == 5);
  CHECK(sc.checks[0] == "jacobi-A");

  auto expect_schema_error = [](const std::string& body) {
    std::istringstream in(body);
    CHECK_THROWS_AS(parse_scenario(in), SchemaError);
  };
  expect_schema_error("name = x\n[checks]\nno-such-check\n");
  expect_schema_error("name = x\nbogus = 1\n[checks]\njacobi-A\n");
  expect_schema_error("name = x\nbackend = fancy\n[checks]\njacobi-A\n");
  expect_schema_error("name = x\ntrials = 0\n[checks]\njacobi-A\n");
  expect_schema_error("name = x\n[checks]\n");   // no checks
  expect_schema_error("[checks]\njacobi-A\n");   // no name
  expect_schema_error("name = x\nnot a pair\n[checks]\njacobi-A\n");
}

TEST_CASE("run_scenario: statuses, expected failures, sorted records") {
  std::istringstream in(kMiniScenario);
  Scenario sc = parse_scenario(in);
  Report rep = run_scenario(sc);
  REQUIRE(rep.checks.size() == 5);
  CHECK(rep.all_expected);
  // records sorted by id
  for (std::size_t i = 1; i < rep.checks.size(); ++i)
    CHECK(rep.checks[i - 1].id < rep.checks[i].id);
  auto find = [&](const std::string& id) -> const CheckRecord& {
    for (auto& r : rep.checks)
      if (r.id == id) return r;
    static CheckRecord none;
    return none;
  };
  CHECK(find("jacobi-A").status == "pass");
  CHECK(find("jacobi-Q-P12").status == "expected-fail");
  CHECK(find("jacobi-Q-P12").expected_status == "expected-fail");
  CHECK(find("R-perm").status == "expected-fail");
  CHECK(find("R-perm-minus").status == "pass");
  CHECK(find("rank-BC").status == "pass");
  // witnesses only accompany fail / error records
  for (auto& r : rep.checks)
    if (r.status == "pass" || r.status == "expected-fail")
      CHECK(r.witness.empty());
}

TEST_CASE("reports: schema, witness rule, and timing-stripped determinism") {
  std::istringstream in(kMiniScenario);
  Scenario sc = parse_scenario(in);
  Report r1 = run_scenario(sc, 1);
  Report r2 = run_scenario(sc, 4);  // parallel run, identical outcomes
  auto j1 = report_to_json(r1, false), j2 = report_to_json(r2, false);
  CHECK(j1.dump(2) == j2.dump(2));

  auto j = report_to_json(r1);
  CHECK(j["tool"] == "formsbench");
  CHECK(j["scenario"]["name"] == "mini");
  CHECK(j["scenario"]["seed"] == 7);
  CHECK(j["summary"]["total"] == 5);
  CHECK(j["summary"]["pass"] == 3);
  CHECK(j["summary"]["expected_fail"] == 2);
  CHECK(j["summary"]["fail"] == 0);
  CHECK(j["summary"]["error"] == 0);
  CHECK(j["summary"]["unexpected"] == 0);
  for (auto& rec : j["checks"]) {
    CHECK(rec.contains("elapsed_ms"));
    CHECK(rec.contains("witness") ==
          (rec["status"] == "fail" || rec["status"] == "error"));
  }
}

TEST_CASE("cli_run: exit codes, report file, overrides") {
  std::ostringstream out, err;
  std::string good = write_temp("fb_cli_good.scn", kMiniScenario);
  std::string report = (fs::temp_directory_path() / "fb_cli_good.json").string();
  CliOverrides o;
  o.report = report;
  o.seed = 11;
  o.jobs = 2;
  CHECK(cli_run(good, o, out, err) == 0);
  REQUIRE(fs::exists(report));
  std::ifstream rin(report);
  std::stringstream body;
  body << rin.rdbuf();
  CHECK(body.str().back() == '\n');  // newline-terminated
  auto j = nlohmann::json::parse(body.str());
  CHECK(j["scenario"]["seed"] == 11);  // override took effect
  CHECK(j["summary"]["unexpected"] == 0);

  // schema errors: unknown check id, unreadable file, bad override
  std::string bad = write_temp("fb_cli_bad.scn",
                               "name = bad\n[checks]\nno-such-check\n");
  CHECK(cli_run(bad, CliOverrides{}, out, err) == 2);
  CHECK(err.str().find("schema error") != std::string::npos);
  CHECK(cli_run("/nonexistent/file.scn", CliOverrides{}, out, err) == 2);
  CliOverrides bado;
  bado.backend = "fancy";
  CHECK(cli_run(good, bado, out, err) == 2);
  fs::remove(good);
  fs::remove(bad);
  fs::remove(report);
}

TEST_CASE("bundled scenarios parse and draw only registered checks") {
  int found = 0;
  for (auto& entry : fs::directory_iterator("scenarios")) {
    if (entry.path().extension() != ".scn") continue;
    ++found;
    Scenario sc = load_scenario(entry.path().string());
    CHECK(!sc.checks.empty());
  }
  CHECK(found == 5);
}
