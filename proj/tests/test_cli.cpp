// Exercises the installed command-line front end as a black box. The binary
// path arrives through the DYNCOP_CLI_PATH compile definition.

#include <cstdlib>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include <doctest.h>

#include "helpers.hpp"

namespace {

std::string cli_path() { return DYNCOP_CLI_PATH; }

int run_cli(const std::string& args) {
  const std::string log = testutil::scratch_path("cli_log.txt");
  const std::string cmd = cli_path() + " " + args + " >" + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::string small_scenario() {
  static const std::string path = [] {
    const std::string p = testutil::scratch_path("cli_scenario.txt");
    std::ofstream(p) << "scenario smoke seed 17\n"
                        "block gaussian 0.4 300\n"
                        "block clayton 3.0 300\n";
    return p;
  }();
  return path;
}

}  // namespace

TEST_CASE("help and argument errors") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("simulate --help") == 0);
  CHECK(run_cli("") != 0);                    // a subcommand is required
  CHECK(run_cli("simulate") != 0);            // missing required options
  CHECK(run_cli("frobnicate") != 0);
}

TEST_CASE("simulate writes data and truth deterministically") {
  const std::string out1 = testutil::scratch_path("sim1.csv");
  const std::string out2 = testutil::scratch_path("sim2.csv");
  REQUIRE(run_cli("simulate --scenario " + small_scenario() + " --out " + out1) == 0);
  REQUIRE(run_cli("simulate --scenario " + small_scenario() + " --out " + out2) == 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(slurp(out1 + ".truth") == "301\n");

  // 600 data rows plus schema comment and header.
  int lines = 0;
  for (char c : slurp(out1))
    if (c == '\n') ++lines;
  CHECK(lines == 602);

  SUBCASE("seed override changes the draws") {
    const std::string out3 = testutil::scratch_path("sim3.csv");
    REQUIRE(run_cli("simulate --scenario " + small_scenario() + " --seed 99 --out " +
                    out3) == 0);
    CHECK(slurp(out1) != slurp(out3));
  }
  SUBCASE("malformed scenario fails loudly") {
    const std::string bad = testutil::scratch_path("cli_bad_scenario.txt");
    std::ofstream(bad) << "block gaussian 0.5 100\n";
    CHECK(run_cli("simulate --scenario " + bad + " --out /dev/null") != 0);
  }
}

TEST_CASE("detect consumes simulated data") {
  const std::string data = testutil::scratch_path("det_data.csv");
  REQUIRE(run_cli("simulate --scenario " + small_scenario() + " --out " + data) == 0);

  const std::string segs = testutil::scratch_path("det_segs.jsonl");
  const std::string evs = testutil::scratch_path("det_events.csv");
  REQUIRE(run_cli("detect --input " + data + " --no-filter --method bu --segments " +
                  segs + " --events " + evs) == 0);
  const std::string text = slurp(segs);
  CHECK(text.find("segments.v1") != std::string::npos);
  CHECK(text.find("\"start\":1") != std::string::npos);

  SUBCASE("unknown method is rejected") {
    CHECK(run_cli("detect --input " + data + " --no-filter --method pelt "
                  "--segments /dev/null") != 0);
  }
  SUBCASE("missing input file is rejected") {
    CHECK(run_cli("detect --input /nonexistent.csv --method bu "
                  "--segments /dev/null") != 0);
  }
}

TEST_CASE("risk validates its mode and level") {
  const std::string data = testutil::scratch_path("risk_data.csv");
  REQUIRE(run_cli("simulate --scenario " + small_scenario() + " --out " + data) == 0);

  // Exactly one of --static / --segments.
  CHECK(run_cli("risk --input " + data + " --returns --out /dev/null") != 0);
  CHECK(run_cli("risk --input " + data + " --returns --static gaussian:0.5 "
                "--segments /nonexistent --out /dev/null") != 0);
  // alpha = 0 is outside the domain.
  CHECK(run_cli("risk --input " + data + " --returns --static gaussian:0.5 "
                "--alpha 0 --out /dev/null") != 0);
  // Malformed spec argument.
  CHECK(run_cli("risk --input " + data + " --returns --static gaussian "
                "--out /dev/null") != 0);
  CHECK(run_cli("risk --input " + data + " --returns --static clayton:0:1 "
                "--out /dev/null") != 0);
}

TEST_CASE("backtest validates inputs") {
  CHECK(run_cli("backtest --risk /nonexistent.csv --input /nonexistent.csv") != 0);
}
