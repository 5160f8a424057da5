#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "interlace/green.hpp"

using namespace interlace;

namespace {

std::string cli() { return INTERLACE_CLI_PATH; }

int run(const std::string& args) {
  const std::string cmd = cli() + " " + args + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const std::string tmp = "/tmp/interlace_cli_test_";

}  // namespace

TEST_CASE("version flag") { CHECK(run("--version") == 0); }

TEST_CASE("malformed configuration exits with validation code") {
  CHECK(run("capacity --json '{\"sites\": [[0,0,0]'") == 1);      // bad JSON
  CHECK(run("capacity --json '{\"sight\": [[0,0,0]]}'") == 1);    // unknown key
  CHECK(run("capacity --json '{\"sites\": [[0,0]]}'") == 1);      // wrong dimension
  CHECK(run("verify no-such-suite") == 1);
}

TEST_CASE("capacity of a singleton prints 1/g(0)") {
  const std::string out = tmp + "cap.json";
  REQUIRE(run("capacity --json '{\"sites\": [[0,0,0]]}' --out " + out) == 0);
  const std::string body = slurp(out);
  FreeLatticeGreen g(3);
  char expect[64];
  std::snprintf(expect, sizeof expect, "%.6f", 1.0 / g.at_zero());
  CHECK(body.find("capacity") != std::string::npos);
  CHECK(body.find(std::string(expect).substr(0, 6)) != std::string::npos);
}

TEST_CASE("green subcommand emits one CSV row per point") {
  const std::string out = tmp + "green.csv";
  REQUIRE(run("green --json '{\"points\": [[0,0,0],[1,0,0]]}' --out " + out) == 0);
  const std::string body = slurp(out);
  FreeLatticeGreen g(3);
  std::istringstream is(body);
  std::string line0, line1;
  std::getline(is, line0);
  std::getline(is, line1);
  double c1, c2, c3, val;
  REQUIRE(std::sscanf(line1.c_str(), "%lf,%lf,%lf,%lf", &c1, &c2, &c3, &val) == 4);
  CHECK_THAT(val, Catch::Matchers::WithinAbs(g.green_origin(Point{1, 0, 0}), 1e-12));
}

TEST_CASE("laplace subcommand matches the closed form") {
  const std::string out = tmp + "laplace.json";
  REQUIRE(run("laplace --json '{\"sites\": [[0,0,0]], \"V\": [0.7], \"u\": 1.3}' --out " +
              out) == 0);
  const std::string body = slurp(out);
  FreeLatticeGreen g(3);
  const double ref = std::exp(-0.7 * 1.3 / (1.0 + g.at_zero() * 0.7));
  char expect[64];
  std::snprintf(expect, sizeof expect, "%.9f", ref);
  CHECK(body.find(std::string(expect).substr(0, 10)) != std::string::npos);
}

TEST_CASE("outputs are byte-identical across reruns and worker counts") {
  const std::string a = tmp + "s1.csv", b = tmp + "s2.csv", c = tmp + "s8.csv";
  const std::string cfg = "--json '{\"window\": [[0,0,0],[1,0,0]]}' -u 1.0 --replicas 500 "
                          "--seed 42";
  REQUIRE(run("sample " + cfg + " --workers 1 --out " + a) == 0);
  REQUIRE(run("sample " + cfg + " --workers 1 --out " + b) == 0);
  REQUIRE(run("sample " + cfg + " --workers 8 --out " + c) == 0);
  const std::string body = slurp(a);
  CHECK(!body.empty());
  CHECK(body == slurp(b));
  CHECK(body == slurp(c));
}

TEST_CASE("coeffs subcommand emits the series") {
  const std::string out = tmp + "coeffs.csv";
  REQUIRE(run("coeffs --json '{\"sites\": [[0,0,0]], \"V\": [0.5], \"u\": 2.0, \"n_max\": 3}'"
              " --out " + out) == 0);
  std::istringstream is(slurp(out));
  std::string line;
  std::getline(is, line);
  double n, v;
  REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &n, &v) == 2);
  CHECK(n == 1.0);
  CHECK_THAT(v, Catch::Matchers::WithinAbs(2.0 * 0.5, 1e-12));  // u (V, 1)
}

TEST_CASE("rods subcommand runs a small grid") {
  const std::string out = tmp + "rods.csv";
  REQUIRE(run("rods --json '{\"kind\": \"tilde\", \"alpha\": 1.0, \"n_grid\": [64, 128], "
              "\"n_max\": 2}' --out " + out) == 0);
  const std::string body = slurp(out);
  CHECK(body.rfind("N,n,value,limit,error\n", 0) == 0);
  CHECK(std::count(body.begin(), body.end(), '\n') == 5);  // header + 2x2 rows
}

TEST_CASE("verify subcommand reports and exits by suite outcome") {
  const std::string out = tmp + "verify.json", csv = tmp + "verify.csv";
  REQUIRE(run("verify exact-id --seed 7 --out " + out + " --csv " + csv) == 0);
  const std::string body = slurp(out);
  CHECK(body.find("\"suite\": \"exact-id\"") != std::string::npos);
  CHECK(body.find("\"pass\": true") != std::string::npos);
  CHECK(slurp(csv).rfind("id,", 0) == 0);
}

TEST_CASE("binary sample format carries the documented header") {
  const std::string out = tmp + "sample.bin";
  REQUIRE(run("sample --json '{\"window\": [[0,0,0]]}' -u 0.5 --replicas 16 --seed 3 "
              "--format binary --workers 1 --out " + out) == 0);
  const std::string body = slurp(out);
  REQUIRE(body.size() >= 20);
  CHECK(body.compare(0, 4, "ILSF") == 0);
  const std::uint32_t version = *reinterpret_cast<const std::uint32_t*>(body.data() + 4);
  const std::uint32_t sites = *reinterpret_cast<const std::uint32_t*>(body.data() + 8);
  const std::uint64_t reps = *reinterpret_cast<const std::uint64_t*>(body.data() + 12);
  CHECK(version == 1);
  CHECK(sites == 1);
  CHECK(reps == 16);
  CHECK(body.size() == 20 + reps * (8 + 4));
}
