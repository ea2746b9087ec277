#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <string>

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(QFLUX_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  std::array<char, 4096> buf;
  while (size_t n = fread(buf.data(), 1, buf.size(), pipe)) result.out.append(buf.data(), n);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace

TEST_CASE("bound command") {
  RunResult amp = run("bound amp --g 2 --nbar 0");
  CHECK(amp.exit_code == 0);
  CHECK(amp.out.find("\"exact\":1,") != std::string::npos);

  RunResult erasure = run("bound erasure --p 0.25");
  CHECK(erasure.exit_code == 0);
  CHECK(erasure.out.find("\"exact\":0.75") != std::string::npos);

  RunResult dephd = run("bound dephasing-d --d 4 --p 0.1");
  CHECK(dephd.exit_code == 0);
  CHECK(dephd.out.find("\"exact\":1.02095") != std::string::npos);

  CHECK(run("bound wibble --p 0.5").exit_code == 2);
  CHECK(run("bound loss --g 2 --nbar 0").exit_code == 3);
  CHECK(run("bound dephasing --p -0.5").exit_code == 3);
}

TEST_CASE("sweep command determinism") {
  const std::string args =
      "sweep --family loss --param g --start 0.1 --stop 0.9 --steps 9 --fixed nbar=1";
  RunResult a = run(args);
  RunResult b = run(args + " --jobs 4");
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("param,lower,upper,exact,eb\n", 0) == 0);

  RunResult bad = run("sweep --family loss --param g --start 0.1 --stop 0.9 --steps 1");
  CHECK(bad.exit_code == 2);
}

TEST_CASE("stretch-verify command") {
  RunResult pass = run(
      "stretch-verify --channel \"dephasing --p 0.3\" --protocol " QFLUX_SOURCE_DIR
      "/protocols/two_round.protocol");
  CHECK(pass.exit_code == 0);
  CHECK(pass.out.find("\"all_pass\":true") != std::string::npos);

  RunResult rand_pass = run("stretch-verify --channel \"depol --p 0.2\" --random 3 --rounds 1 --seed 5");
  CHECK(rand_pass.exit_code == 0);

  RunResult witness = run("stretch-verify --channel \"amp-damp --gamma 0.5\"");
  CHECK(witness.exit_code == 5);
  CHECK(witness.out.find("\"witness\"") != std::string::npos);

  RunResult gaussian = run("stretch-verify --channel \"loss --g 0.5 --nbar 0\"");
  CHECK(gaussian.exit_code == 2);
}

TEST_CASE("compose command") {
  RunResult good = run("compose \"amp --g 2 --nbar 0\" \"loss --g 0.5 --nbar 0\"");
  CHECK(good.exit_code == 0);
  CHECK(good.out.find("additive(xi=0.5)") != std::string::npos);
  CHECK(good.out.find("0.278652") != std::string::npos);

  RunResult conj = run("compose \"conj-amp --g -2 --nbar 0\" \"conj-amp --g -1.5 --nbar 0\"");
  CHECK(conj.exit_code == 0);
  CHECK(conj.out.find("amp(g=3") != std::string::npos);

  RunResult raw = run("compose \"a2 --nbar 0\" \"b1\"");
  CHECK(raw.exit_code == 6);
  CHECK(raw.out.find("unclassified") != std::string::npos);

  CHECK(run("compose \"dephasing --p 0.1\" \"loss --g 0.5 --nbar 0\"").exit_code == 2);
}
