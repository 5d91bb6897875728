#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <nsac/config.hpp>
#include <nsac/csv.hpp>
#include <nsac/report.hpp>
#include <nsac/snapshot.hpp>

#include "support/fields.hpp"

using namespace nsac;
using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

// Scratch directory for files this suite writes; wiped per construction.
struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& leaf) const { return (path / leaf).string(); }
};

SystemState random_state(const Grid& g, std::uint32_t seed) {
  SystemState s(g);
  for (int a = 0; a < g.dim(); ++a) s.u.comp(a) = testfields::random_band_field(g, 3, seed + a);
  s.phi = testfields::random_band_field(g, 3, seed + 10);
  s.pi = testfields::random_band_field(g, 3, seed + 20);
  sanitize(s);
  s.t = 0.8125;
  return s;
}

}  // namespace

TEST_CASE("config defaults") {
  Config c = parse_config("");
  CHECK(c.dim == 2);
  CHECK(c.n == 32);
  CHECK(c.model.kappa == 1.0);
  CHECK(c.model.epsilon == 0.1);
  CHECK(c.model.reg_mode == RegMode::linear);
  CHECK(c.model.potential.kind() == PotentialKind::double_well);
  CHECK(c.stepper.scheme == Scheme::cnab2);
  CHECK(c.stepper.dt == 1e-3);
  CHECK(c.t_final == 1.0);
  CHECK(c.output_every == 10);
  CHECK(c.snapshot_every == 0);
  CHECK(c.output_dir == "out");
  CHECK(c.seed == 1);
  CHECK(c.initial.kind == InitialKind::random);
  CHECK(c.initial.u_norm == 1.0);
  CHECK(c.initial.phi_norm == 0.5);
  CHECK(c.initial.pi_norm == 0.5);
  CHECK(c.initial.kmax == 0);
  CHECK(c.sweep.scales == std::vector<double>{1.0, 4.0, 16.0});
  CHECK(c.sweep.window == 0.25);
  CHECK(c.contract.perturbation == 1e-6);
  CHECK(c.converge.mode == ConvergeMode::temporal);
  CHECK(validate_config(c).empty());
}

TEST_CASE("config file parsing") {
  const std::string text = R"(# full configuration
[grid]
dim = 3
n = 16

[model]
kappa = 0.5
delta = 0.1          ; trailing comment
sigma = 0.25
epsilon = 0.02
reg_mode = variational
truncation_n = 4

[potential]
kind = polynomial
coeffs = 0, 0, -1, 0, 0, 0, 0.033333333333333333

[stepper]
scheme = rk4
dt = 2e-4
cfl_safety = 0.8
dt_max = 0.125

[run]
t_final = 0.5
output_every = 5
snapshot_every = 100
output_dir = scratch/run1
seed = 42

[initial]
kind = constant
phi0 = 0.75
pi0 = -0.25

[sweep]
scales = 1, 2, 4
window = 0.5

[contract]
perturbation = 1e-7

[converge]
mode = spatial
)";
  Config c = parse_config(text);
  CHECK(c.dim == 3);
  CHECK(c.n == 16);
  CHECK(c.model.kappa == 0.5);
  CHECK(c.model.delta == 0.1);
  CHECK(c.model.sigma == 0.25);
  CHECK(c.model.epsilon == 0.02);
  CHECK(c.model.reg_mode == RegMode::variational);
  CHECK(c.model.truncation_n == 4);
  CHECK(c.model.potential.kind() == PotentialKind::polynomial);
  CHECK(c.model.potential.degree() == 6);
  CHECK(c.stepper.scheme == Scheme::rk4);
  CHECK(c.stepper.dt == 2e-4);
  CHECK(c.stepper.cfl_safety == 0.8);
  CHECK(c.stepper.dt_max == 0.125);
  CHECK(c.t_final == 0.5);
  CHECK(c.output_every == 5);
  CHECK(c.snapshot_every == 100);
  CHECK(c.output_dir == "scratch/run1");
  CHECK(c.seed == 42);
  CHECK(c.initial.kind == InitialKind::constant);
  CHECK(c.initial.phi0 == 0.75);
  CHECK(c.initial.pi0 == -0.25);
  CHECK(c.sweep.scales == std::vector<double>{1.0, 2.0, 4.0});
  CHECK(c.sweep.window == 0.5);
  CHECK(c.contract.perturbation == 1e-7);
  CHECK(c.converge.mode == ConvergeMode::spatial);
  CHECK(validate_config(c).empty());

  SECTION("duplicate assignments: the last one wins") {
    Config d = parse_config("[model]\nkappa = 1\nkappa = 7\n");
    CHECK(d.model.kappa == 7.0);
  }
}

TEST_CASE("config errors carry line numbers") {
  CHECK_THROWS_WITH(parse_config("[grid]\nnn = 4\n"),
                    ContainsSubstring("line 2") && ContainsSubstring("unknown key 'nn'"));
  CHECK_THROWS_WITH(parse_config("[grid]\ndim = 2\n\n[nope]\nx = 1\n"),
                    ContainsSubstring("line 5") && ContainsSubstring("unknown section [nope]"));
  CHECK_THROWS_WITH(parse_config("[grid]\ndim\n"),
                    ContainsSubstring("line 2") && ContainsSubstring("expected key=value"));
  CHECK_THROWS_WITH(parse_config("n = 4\n"), ContainsSubstring("before any [section]"));
  CHECK_THROWS_WITH(parse_config("[grid\n"), ContainsSubstring("unterminated section"));
  CHECK_THROWS_WITH(parse_config("[model]\nkappa = fast\n"),
                    ContainsSubstring("line 2") && ContainsSubstring("expected a number"));
  CHECK_THROWS_WITH(parse_config("[grid]\nn = 12.5\n"), ContainsSubstring("expected an integer"));
  CHECK_THROWS_WITH(parse_config("[run]\nseed = -3\n"),
                    ContainsSubstring("expected a non-negative integer"));
  CHECK_THROWS_WITH(parse_config("[model]\nreg_mode = both\n"),
                    ContainsSubstring("'linear' or 'variational'"));
  CHECK_THROWS_WITH(parse_config("[potential]\ncoeffs = 1, 0, 1\n"),
                    ContainsSubstring("line 2"));
}

TEST_CASE("command line overrides") {
  Config c;
  apply_override(c, "model.kappa=0.25");
  CHECK(c.model.kappa == 0.25);
  apply_override(c, "dt=5e-4");  // unique bare key resolves to [stepper]
  CHECK(c.stepper.dt == 5e-4);
  apply_override(c, "n=64");
  CHECK(c.n == 64);
  apply_override(c, "scheme=rk4");
  CHECK(c.stepper.scheme == Scheme::rk4);
  apply_override(c, "initial.kind=taylor_green");
  CHECK(c.initial.kind == InitialKind::taylor_green);
  apply_override(c, "scales=1,8");
  CHECK(c.sweep.scales == std::vector<double>{1.0, 8.0});

  // "kind" lives in both [potential] and [initial]
  CHECK_THROWS_WITH(apply_override(c, "kind=random"),
                    ContainsSubstring("ambiguous") && ContainsSubstring("section.key"));
  CHECK_THROWS_WITH(apply_override(c, "warp=9"), ContainsSubstring("unknown key 'warp'"));
  CHECK_THROWS_WITH(apply_override(c, "model.warp=9"), ContainsSubstring("unknown key 'warp'"));
  CHECK_THROWS_WITH(apply_override(c, "model.kappa"), ContainsSubstring("expected key=value"));
}

TEST_CASE("config validation") {
  auto with = [](const std::string& overrides) {
    Config c;
    for (const std::string& o : ioutil::split(overrides, ' '))
      if (!o.empty()) apply_override(c, o);
    return c;
  };
  CHECK_THROWS_WITH(validate_config(with("model.kappa=0")), ContainsSubstring("kappa > 0"));
  CHECK_THROWS_WITH(validate_config(with("run.t_final=0")), ContainsSubstring("t_final"));
  CHECK_THROWS_WITH(validate_config(with("run.output_every=0")), ContainsSubstring("output_every"));
  CHECK_THROWS_WITH(validate_config(with("grid.n=13")), ContainsSubstring("even"));
  CHECK_THROWS_WITH(validate_config(with("initial.kind=snapshot")),
                    ContainsSubstring("requires initial.path"));
  CHECK_THROWS_WITH(validate_config(with("initial.kmax=16")), ContainsSubstring("kmax"));
  CHECK_THROWS_WITH(validate_config(with("sweep.window=0")), ContainsSubstring("window"));
  CHECK_THROWS_WITH(validate_config(with("sweep.scales=1,-2")), ContainsSubstring("positive"));
  CHECK_THROWS_WITH(validate_config(with("contract.perturbation=0")),
                    ContainsSubstring("perturbation"));
  CHECK_THROWS_WITH(validate_config(with("stepper.dt=3e-4")),
                    ContainsSubstring("integer multiple"));

  SECTION("running without regularization is allowed but flagged") {
    Config c = with("model.epsilon=0");
    std::vector<std::string> warnings = validate_config(c);
    REQUIRE(warnings.size() == 1);
    CHECK_THAT(warnings[0], ContainsSubstring("epsilon = 0"));
  }
  SECTION("empty scales cannot come from a file, but reject the struct too") {
    Config c;
    c.sweep.scales.clear();
    CHECK_THROWS_AS(validate_config(c), ConfigError);
  }
}

TEST_CASE("canonical echo round trip") {
  Config c;
  c.dim = 3;
  c.n = 16;
  c.model.kappa = 1.0 / 3.0;
  c.model.delta = 0.1;
  c.model.sigma = 1e-17;
  c.model.epsilon = 0.02;
  c.model.reg_mode = RegMode::variational;
  c.model.truncation_n = 4;
  c.model.potential = Potential::polynomial({0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0 / 30.0});
  c.stepper.scheme = Scheme::rk4;
  c.stepper.dt = 1.0 / 4096.0;
  c.stepper.cfl_safety = 0.85;
  c.t_final = 2.0;
  c.output_every = 7;
  c.snapshot_every = 50;
  c.output_dir = "runs/echo";
  c.seed = 123456789012345ull;
  c.initial.kind = InitialKind::snapshot;
  c.initial.path = "runs/prev/state.snap";
  c.initial.phi_mean = -0.3;
  c.initial.kmax = 5;
  c.sweep.scales = {0.5, 2.0, 8.0};
  c.sweep.window = 0.125;
  c.contract.perturbation = 1e-8;
  c.converge.mode = ConvergeMode::truncation;

  const std::string echo = serialize_config(c);
  Config back = parse_config(echo);
  CHECK(serialize_config(back) == echo);  // fixed point of echo -> parse -> echo
  CHECK(back.model.kappa == c.model.kappa);
  CHECK(back.model.sigma == c.model.sigma);
  CHECK(back.model.potential == c.model.potential);
  CHECK(back.stepper.dt == c.stepper.dt);
  CHECK(back.seed == c.seed);
  CHECK(back.initial.path == c.initial.path);
  CHECK(back.sweep.scales == c.sweep.scales);
  CHECK(back.converge.mode == ConvergeMode::truncation);
}

TEST_CASE("report csv round trip") {
  std::vector<EnergyReport> rs(3);
  rs[0].t = 0.0;
  rs[0].total = 1.0 / 3.0;
  rs[0].crossterm = -0.0;
  rs[0].residual = 0.0;
  rs[1].t = 1e-3;
  rs[1].kinetic_macro = 6.02214076e23;
  rs[1].kinetic_micro = 5e-324;  // smallest denormal survives
  rs[1].interface = 9.869604401089358;
  rs[1].configuration = -1e-17;
  rs[1].d_cross = 0.1 + 0.2;
  rs[2].t = 2e-3;
  rs[2].phi_mean = std::nextafter(1.0, 2.0);
  rs[2].f_integral = -123.45678901234567;

  const std::string text = reports_to_csv(rs);
  CHECK_THAT(text, ContainsSubstring(kReportCsvHeader));
  std::vector<EnergyReport> back = parse_reports_csv(text);
  REQUIRE(back.size() == rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i)
    for (int col = 0; col < detail::kReportColumns; ++col) {
      const double a = *detail::report_fields(rs[i], col);
      const double b = *detail::report_fields(back[i], col);
      REQUIRE(std::memcmp(&a, &b, sizeof a) == 0);  // bitwise, signed zero included
    }

  SECTION("header is mandatory and exact") {
    CHECK_THROWS_AS(parse_reports_csv("time,energy\n0,1\n"), SnapshotError);
    CHECK_THROWS_AS(parse_reports_csv(""), SnapshotError);
  }
  SECTION("column count is checked") {
    std::string bad = std::string(kReportCsvHeader) + "\n1,2,3\n";
    CHECK_THROWS_WITH(parse_reports_csv(bad), ContainsSubstring("expected 15"));
  }
  SECTION("numbers are checked") {
    std::string row;
    for (int i = 0; i < 15; ++i) row += i ? ",x" : "0";
    std::string bad = std::string(kReportCsvHeader) + "\n" + row + "\n";
    CHECK_THROWS_WITH(parse_reports_csv(bad), ContainsSubstring("bad number"));
  }
  SECTION("file round trip") {
    ScratchDir dir("nsac_test_io_csv");
    write_reports_csv(dir.file("series.csv"), rs);
    std::vector<EnergyReport> fromdisk = read_reports_csv(dir.file("series.csv"));
    REQUIRE(fromdisk.size() == rs.size());
    CHECK(reports_to_csv(fromdisk) == text);
  }
}

TEST_CASE("snapshot round trip") {
  ScratchDir dir("nsac_test_io_snapshot");
  const Grid g(2, 16);
  ModelParams mp;
  mp.kappa = 0.7;
  mp.delta = 0.2;
  mp.sigma = 0.05;
  mp.epsilon = 0.02;
  mp.reg_mode = RegMode::variational;
  mp.truncation_n = 3;
  SystemState s = random_state(g, 7);

  const std::string path = dir.file("state.snap");
  write_snapshot(path, s, mp);
  SystemState back = read_snapshot(path, g, mp);

  REQUIRE(back.t == s.t);
  for (int a = 0; a < g.dim(); ++a)
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(back.u.comp(a)[i] == s.u.comp(a)[i]);
  for (std::size_t i = 0; i < g.size(); ++i) {
    REQUIRE(back.phi[i] == s.phi[i]);
    REQUIRE(back.pi[i] == s.pi[i]);
  }

  SECTION("header describes the file") {
    SnapshotHeader h = read_snapshot_header(path);
    CHECK(h.version == 1);
    CHECK(h.dim == 2);
    CHECK(h.n == 16);
    CHECK(h.t == s.t);
    CHECK(h.params.kappa == 0.7);
    CHECK(h.params.reg_mode == RegMode::variational);
    CHECK(h.params.truncation_n == 3);
    CHECK(h.params.potential == mp.potential);
  }
  SECTION("3d states round trip too") {
    const Grid g3(3, 8);
    SystemState s3 = random_state(g3, 11);
    write_snapshot(dir.file("state3.snap"), s3, mp);
    SystemState b3 = read_snapshot(dir.file("state3.snap"), g3, mp);
    REQUIRE(b3.t == s3.t);
    for (std::size_t i = 0; i < g3.size(); ++i) REQUIRE(b3.phi[i] == s3.phi[i]);
    for (std::size_t i = 0; i < g3.size(); ++i) REQUIRE(b3.u.comp(2)[i] == s3.u.comp(2)[i]);
  }
}

TEST_CASE("snapshot rejects corruption and mismatches") {
  ScratchDir dir("nsac_test_io_snapguard");
  const Grid g(2, 16);
  ModelParams mp;
  mp.kappa = 0.7;
  SystemState s = random_state(g, 3);
  const std::string path = dir.file("state.snap");
  write_snapshot(path, s, mp);
  const std::string bytes = ioutil::read_text_file(path);

  SECTION("bit flip anywhere breaks the checksum") {
    for (std::size_t pos : std::vector<std::size_t>{8, 60, bytes.size() / 2, bytes.size() - 1}) {
      std::string bad = bytes;
      bad[pos] = static_cast<char>(bad[pos] ^ 0x10);
      ioutil::write_text_file(path, bad);
      CHECK_THROWS_WITH(read_snapshot(path, g, mp),
                        ContainsSubstring("checksum") || ContainsSubstring("bad magic"));
    }
  }
  SECTION("truncation is detected") {
    ioutil::write_text_file(path, bytes.substr(0, bytes.size() - 9));
    CHECK_THROWS_AS(read_snapshot(path, g, mp), SnapshotError);
    ioutil::write_text_file(path, bytes.substr(0, 5));
    CHECK_THROWS_AS(read_snapshot(path, g, mp), SnapshotError);
  }
  SECTION("wrong magic is not a snapshot") {
    std::string bad = bytes;
    bad[0] = 'X';
    ioutil::write_text_file(path, bad);
    CHECK_THROWS_WITH(read_snapshot(path, g, mp), ContainsSubstring("bad magic"));
  }
  SECTION("grid mismatch") {
    CHECK_THROWS_WITH(read_snapshot(path, Grid(2, 32), mp), ContainsSubstring("does not match"));
    CHECK_THROWS_WITH(read_snapshot(path, Grid(3, 16), mp), ContainsSubstring("does not match"));
  }
  SECTION("parameter mismatch") {
    ModelParams other = mp;
    other.kappa = 0.71;
    CHECK_THROWS_WITH(read_snapshot(path, g, other), ContainsSubstring("parameters differ"));
    other = mp;
    other.reg_mode = RegMode::variational;
    CHECK_THROWS_AS(read_snapshot(path, g, other), SnapshotError);
    other = mp;
    other.potential = Potential::polynomial({0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0 / 30.0});
    CHECK_THROWS_AS(read_snapshot(path, g, other), SnapshotError);
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(read_snapshot(dir.file("absent.snap"), g, mp), std::runtime_error);
  }
}

TEST_CASE("run reports render deterministically") {
  ReportLines lines = {{"scheme", "cnab2"}, {"steps", "1000"}, {"final_total", ioutil::g17(1.0 / 3.0)}};
  const std::string text = render_report(lines);
  CHECK(text == "scheme = cnab2\nsteps = 1000\nfinal_total = 0.33333333333333331\n");
  CHECK(render_report(lines) == text);
}
