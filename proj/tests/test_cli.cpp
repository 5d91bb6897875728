// Drives the installed binary end to end through std::system: exit codes,
// artifact creation, and the error paths a user would actually hit.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nsac/ioutil.hpp>

namespace fs = std::filesystem;

namespace {

struct ScratchDir {
  fs::path path;
  ScratchDir() : path(fs::temp_directory_path() / ("nsac_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

struct CliResult {
  int rc;
  std::string out;
};

CliResult run_cli(const ScratchDir& dir, const std::string& args) {
  const fs::path log = dir.path / "cli.log";
  const std::string cmd = std::string(NSAC_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), nsac::ioutil::read_text_file(log.string())};
}

}  // namespace

TEST_CASE("cli help and describe") {
  ScratchDir dir;

  CliResult help = run_cli(dir, "--help");
  CHECK(help.rc == 0);
  CHECK(help.out.find("run") != std::string::npos);
  CHECK(help.out.find("verify") != std::string::npos);

  CliResult desc = run_cli(dir, "describe --set grid.n=16");
  CHECK(desc.rc == 0);
  CHECK(desc.out.find("eta_max = ") != std::string::npos);
  CHECK(desc.out.find("lambda0 = 4") != std::string::npos);
  CHECK(desc.out.find("grid = 2d n=16") != std::string::npos);
  CHECK(desc.out.find("stable_dt = ") != std::string::npos);
}

TEST_CASE("cli run writes artifacts") {
  ScratchDir dir;
  const fs::path cfg = dir.path / "run.ini";
  const fs::path out = dir.path / "out";
  std::ofstream(cfg) << "[grid]\n"
                        "dim = 2\n"
                        "n = 16\n"
                        "[stepper]\n"
                        "dt = 1e-3\n"
                        "[run]\n"
                        "t_final = 0.02\n"
                        "output_every = 5\n"
                        "[initial]\n"
                        "kmax = 2\n";

  CliResult r = run_cli(dir, "run " + cfg.string() + " --set output_dir=" + out.string());
  INFO(r.out);
  CHECK(r.rc == 0);
  CHECK(r.out.find("steps = 20") != std::string::npos);
  CHECK(fs::exists(out / "series.csv"));
  CHECK(fs::exists(out / "report.txt"));
  CHECK(fs::exists(out / "config.ini"));
  CHECK(fs::exists(out / "final.snap"));
}

TEST_CASE("cli reports usage and numerical failures distinctly") {
  ScratchDir dir;

  SECTION("unknown key is a usage error") {
    CliResult r = run_cli(dir, "describe --set nope.x=1");
    CHECK(r.rc == 1);
    CHECK(r.out.find("unknown section") != std::string::npos);
  }
  SECTION("time span must divide by dt") {
    CliResult r = run_cli(dir, "run --set t_final=0.0205 --set dt=1e-3 --set grid.n=16");
    CHECK(r.rc == 1);
    CHECK(r.out.find("integer multiple") != std::string::npos);
  }
  SECTION("missing config file") {
    CliResult r = run_cli(dir, "run " + (dir.path / "absent.ini").string());
    CHECK(r.rc != 0);
  }
  SECTION("an unstable step is a numerical failure") {
    CliResult r = run_cli(dir, "run --set scheme=rk4 --set dt=0.1 --set t_final=0.5"
                               " --set grid.n=16 --set output_dir=" +
                                   (dir.path / "blow").string());
    CHECK(r.rc == 2);
    CHECK(r.out.find("non-finite") != std::string::npos);
  }
}

TEST_CASE("cli verify battery passes") {
  ScratchDir dir;
  CliResult r = run_cli(dir, "verify");
  INFO(r.out);
  CHECK(r.rc == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("0 failed") != std::string::npos);
}
