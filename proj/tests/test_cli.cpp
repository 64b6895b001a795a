// Integration tests driving the installed CLI binary (path from the
// THINBAND_CLI environment variable set by the test harness).

#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string cli_path() {
  const char* p = std::getenv("THINBAND_CLI");
  return p ? p : "";
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  RunResult r;
  std::string cmd = cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.output += buf.data();
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

void write(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli: usage errors exit with code 1") {
  if (cli_path().empty()) return;  // harness did not provide the binary
  CHECK(run("frobnicate").exit_code == 1);
  CHECK(run("widths --config /nonexistent.json").exit_code == 1);
}

TEST_CASE("cli: widths prints verified digits and fails cleanly on impossible tolerance") {
  if (cli_path().empty()) return;
  write("/tmp/tb_w.json", R"({"ks":{"constant":1},"depth":60,"tol":"1e-12"})");
  RunResult ok = run("widths --config /tmp/tb_w.json");
  CHECK(ok.exit_code == 0);
  // >= 12 verified digits of the tribonacci data
  CHECK(ok.output.find("1.83928675521416") != std::string::npos);
  CHECK(ok.output.find("3.38297576790623") != std::string::npos);

  write("/tmp/tb_w2.json", R"({"ks":{"constant":1},"depth":6,"tol":"1e-30"})");
  RunResult bad = run("widths --config /tmp/tb_w2.json");
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("accuracy") != std::string::npos);
}

TEST_CASE("cli: doubling widths satisfy the stage inequalities") {
  if (cli_path().empty()) return;
  write("/tmp/tb_w3.json", R"({"ks":{"doubling":{"k0":2}},"depth":24,"tol":"1e-4","precision":512})");
  RunResult r = run("widths --config /tmp/tb_w3.json");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"stage_inequalities\": true") != std::string::npos);
}

TEST_CASE("cli: rips runs certificates and echoes the complex at 0 steps") {
  if (cli_path().empty()) return;
  write("/tmp/tb_r.json", R"({"ks":{"doubling":{"k0":2}},"steps":15,"precision":512})");
  std::filesystem::remove_all("/tmp/tb_rips");
  RunResult r = run("rips --config /tmp/tb_r.json --out /tmp/tb_rips");
  CHECK(r.exit_code == 0);
  std::string csv = slurp("/tmp/tb_rips/rips.csv");
  CHECK(csv.find("FAIL") == std::string::npos);
  CHECK(csv.find("15,32768") != std::string::npos);  // last step uses k_14 = 2^15

  write("/tmp/tb_r0.json", R"({"ks":{"constant":2},"steps":0})");
  RunResult r0 = run("rips --config /tmp/tb_r0.json");
  CHECK(r0.exit_code == 0);
  CHECK(r0.output.find("\"bands\"") != std::string::npos);
}

TEST_CASE("cli: iet reports the cone coefficients") {
  if (cli_path().empty()) return;
  write("/tmp/tb_i.json", R"({"ks":{"doubling":{"k0":2}},"depth":24,"steps":500,"precision":256})");
  RunResult r = run("iet --config /tmp/tb_i.json");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("alpha_over_beta") != std::string::npos);
  CHECK(r.output.find("\"u_in_V\": true") != std::string::npos);
}

TEST_CASE("cli: section emits deterministic CSV for a fixed seed") {
  if (cli_path().empty()) return;
  write("/tmp/tb_s.json",
        R"({"ks":{"doubling":{"k0":2}},"depth":12,"steps":500,"radius":60,"levels":{"count":3},"precision":384})");
  std::filesystem::remove_all("/tmp/tb_sec1");
  std::filesystem::remove_all("/tmp/tb_sec2");
  RunResult r1 = run("section --config /tmp/tb_s.json --out /tmp/tb_sec1 --seed 42");
  RunResult r2 = run("section --config /tmp/tb_s.json --out /tmp/tb_sec2 --seed 42 --threads 3");
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  // identical config + seed give byte-identical outputs, threading included
  CHECK(slurp("/tmp/tb_sec1/components.csv") == slurp("/tmp/tb_sec2/components.csv"));
  CHECK(slurp("/tmp/tb_sec1/polyline.csv") == slurp("/tmp/tb_sec2/polyline.csv"));
  CHECK(!slurp("/tmp/tb_sec1/gamma.svg").empty());
  // outputs embed the config hash and the seed
  CHECK(slurp("/tmp/tb_sec1/components.csv").find("config_hash=") != std::string::npos);
  CHECK(slurp("/tmp/tb_sec1/components.csv").find("seed=42") != std::string::npos);

  // a different seed changes the drawn levels
  std::filesystem::remove_all("/tmp/tb_sec3");
  RunResult r3 = run("section --config /tmp/tb_s.json --out /tmp/tb_sec3 --seed 43");
  CHECK(r3.exit_code == 0);
  CHECK(slurp("/tmp/tb_sec1/components.csv") != slurp("/tmp/tb_sec3/components.csv"));
}

TEST_CASE("cli: verify passes clean and catches an injected fault") {
  if (cli_path().empty()) return;
  CHECK(run("verify").exit_code == 0);
  write("/tmp/tb_bad.json", R"({"inject_fault":"r_table"})");
  CHECK(run("verify --config /tmp/tb_bad.json").exit_code == 4);
}
