#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

// Runs the binary through the shell, capturing stdout; stderr is merged in
// when asked for (error messages) and discarded otherwise.
RunResult run_cli(const std::string& args, bool merge_stderr = false) {
  std::string cmd = std::string(STZ_BIN_PATH) + " " + args;
  cmd += merge_stderr ? " 2>&1" : " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  RunResult r;
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  r.output = std::move(out);
  return r;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("stz_cli_" + name);
}

// Model chain files shared across cases, built once by the binary itself.
std::pair<std::string, std::string> chain_files() {
  static std::string a = temp_file("a.chain").string();
  static std::string b = temp_file("b.chain").string();
  static bool built = false;
  if (!built) {
    RunResult ra = run_cli("chain build 'S(3/2; 5^inf)' --depth 6 --b 5^i --out " + a);
    REQUIRE(ra.exit_code == 0);
    RunResult rb = run_cli("chain build 'S(3/2; 5^inf)' --depth 3 --b 25^i --out " + b);
    REQUIRE(rb.exit_code == 0);
    built = true;
  }
  return {a, b};
}

}  // namespace

TEST_CASE("usage and help exits") {
  RunResult help = run_cli("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.output.find("usage: stz") == 0);

  RunResult bare = run_cli("", true);
  CHECK(bare.exit_code == 2);
  CHECK(bare.output.find("usage: stz") != std::string::npos);

  RunResult unknown = run_cli("frobnicate", true);
  CHECK(unknown.exit_code == 2);
  CHECK(unknown.output.find("error:") != std::string::npos);
}

TEST_CASE("steinitz verbs print canonical forms") {
  CHECK(run_cli("st eval '2^3*2^inf*3'").output == "2^inf*3\n");
  CHECK(run_cli("st lcm '2^2*3' '2*3^2'").output == "36\n");
  CHECK(run_cli("st div '2^inf*3^2' 12").output == "2^inf*3\n");
  CHECK(run_cli("st leq '2^2' '2^inf'").output == "true\n");
  CHECK(run_cli("st leq '2^inf' '2^2'").output == "false\n");
  CHECK(run_cli("st connected '3*2^inf' '2^inf'").output == "3\n");
  CHECK(run_cli("st connected '2^inf' '3*2^inf'").output == "1/3\n");
  CHECK(run_cli("st connected '5^inf' '2^inf'").output == "none\n");

  RunResult bad = run_cli("st eval '4^2'", true);
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("error:") != std::string::npos);
  CHECK(bad.output.find("run 'stz help' for usage") != std::string::npos);

  CHECK(run_cli("st eval", true).exit_code == 2);
  CHECK(run_cli("st div '2^2' 3", true).exit_code == 1);  // 3 does not divide
}

TEST_CASE("spectrum verbs answer membership and equality") {
  CHECK(run_cli("spec member '7/5 * 5^inf' 'S(3/2; 5^inf)'").output == "true\n");
  CHECK(run_cli("spec member '8/5 * 5^inf' 'S(3/2; 5^inf)'").output == "false\n");
  CHECK(run_cli("spec equal 'S(3; 3*2^inf)' 'S(9; 2^inf)'").output == "true\n");
  CHECK(run_cli("spec equal 'Fin(3)' 'Fin(5)'").output == "false\n");
  CHECK(run_cli("spec canon 'S(3/2; 5^inf)'").output ==
        "bounded class=5^inf r*=3/2 attained=false\n");
  CHECK(run_cli("spec canon 'Fin(5)'").output == "finite n=5\n");
  CHECK(run_cli("spec canon 'S(inf; 3*2^inf)'").output == "unbounded class=2^inf\n");

  CHECK(run_cli("spec canon 'Q(1)'", true).exit_code == 2);
  CHECK(run_cli("spec canon 'S(1/2; 2^inf)'", true).exit_code == 1);
}

TEST_CASE("chain build is deterministic and classify reads the prefix") {
  RunResult once = run_cli("chain build 'S(3/2; 5^inf)' --depth 2");
  RunResult twice = run_cli("chain build 'S(3/2; 5^inf)' --depth 2");
  CHECK(once.exit_code == 0);
  CHECK(once.output == twice.output);
  CHECK(once.output.find("chain unital=false\nmodel S(3/2; 5^inf) b=5^i\n") == 0);
  CHECK(once.output.find("stage 1 standard=7\n") != std::string::npos);
  CHECK(once.output.find("stage 2 standard=37\n") != std::string::npos);
  CHECK(once.output.find("embed 1 1->{1,2,3,4,5},") != std::string::npos);

  auto [a, b] = chain_files();
  RunResult cls = run_cli("chain classify " + b);
  CHECK(cls.exit_code == 0);
  CHECK(cls.output ==
        "depth: 3\n"
        "unital: false\n"
        "stages: 37,937,23437\n"
        "lambda: 925/937,23425/23437\n"
        "spectrum: S(3/2; 5^inf)\n"
        "canonical: bounded class=5^inf r*=3/2 attained=false\n");

  CHECK(run_cli("chain classify " + temp_file("missing.chain").string(), true).exit_code == 1);
  CHECK(run_cli("chain build 'S(3/2; 5^inf)' --depth 0", true).exit_code == 2);
  CHECK(run_cli("chain build 'S(3/2; 5^inf)' --b 2^i", true).exit_code == 1);
}

TEST_CASE("chain measure normalizes at stage one") {
  auto [a, b] = chain_files();
  CHECK(run_cli("chain measure " + a + " '1:1010000'").output == "2/7\n");
  CHECK(run_cli("chain measure " + a + " '1:1111111'").output == "1\n");
  CHECK(run_cli("chain measure " + b + " '1:" + std::string(36, '0') + "1'").output == "1/37\n");

  CHECK(run_cli("chain measure " + a + " '1:10'", true).exit_code == 2);
  CHECK(run_cli("chain measure " + a, true).exit_code == 2);
}

TEST_CASE("equiv prints the matched pairs and one ratio") {
  auto [a, b] = chain_files();
  std::string expected =
      "step a b mu_a mu_b ratio\n"
      "0 1:0000000 1:0000000000000000000000000000000000000 0 0 -\n"
      "1 1:1000000 1:1111100000000000000000000000000000000 1/7 5/37 35/37\n"
      "2 1:1100000 1:1111111111000000000000000000000000000 2/7 10/37 35/37\n"
      "3 1:1100000 1:1111111111000000000000000000000000000 2/7 10/37 35/37\n"
      "4 1:1110000 1:1111111111111110000000000000000000000 3/7 15/37 35/37\n"
      "alpha = 35/37\n";
  RunResult r1 = run_cli("equiv " + a + " " + b + " --steps 4");
  CHECK(r1.exit_code == 0);
  CHECK(r1.output == expected);
  RunResult r2 = run_cli("equiv " + a + " " + b + " --steps 4");
  CHECK(r2.output == expected);

  // A presentation without a model header cannot drive the matcher.
  std::ifstream in(a);
  std::string stripped, line;
  while (std::getline(in, line))
    if (line.rfind("model ", 0) != 0) stripped += line + "\n";
  std::string bare = temp_file("bare.chain").string();
  std::ofstream(bare) << stripped;
  RunResult rb = run_cli("equiv " + bare + " " + b, true);
  CHECK(rb.exit_code == 1);
  CHECK(rb.output.find("model line") != std::string::npos);

  CHECK(run_cli("equiv " + a, true).exit_code == 2);
  CHECK(run_cli("equiv " + a + " " + b + " --steps 0", true).exit_code == 2);
}

TEST_CASE("equiv reports partial matches honestly") {
  std::string da = temp_file("d1a.chain").string();
  std::string db = temp_file("d1b.chain").string();
  REQUIRE(run_cli("chain build 'S(3/2; 5^inf)' --depth 1 --b 5^i --out " + da).exit_code == 0);
  REQUIRE(run_cli("chain build 'S(3/2; 5^inf)' --depth 1 --b 25^i --out " + db).exit_code == 0);
  RunResult r = run_cli("equiv " + da + " " + db);
  CHECK(r.exit_code == 1);
  CHECK(r.output ==
        "step a b mu_a mu_b ratio\n"
        "0 1:0000000 1:0000000000000000000000000000000000000 0 0 -\n"
        "incomplete: no aligned realization stages in the prefix for the new pair\n");
}
