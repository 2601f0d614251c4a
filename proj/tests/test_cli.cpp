#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "chronon/runner.hpp"

using namespace chronon;
using namespace chronon::cli;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "command": "decohere",
  "scheme": {"variant": "retarded", "tau": 1e-19},
  "system": {"two_level": {"delta_e": 4.0}},
  "initial": {"measurement": {"amplitudes": [0.7071067811865476, 0.7071067811865476]}},
  "steps": 1000,
  "stride": 100
})";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("chronon_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CHRONON_CLI_PATH) + " -q " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("parse_config", "[cli]") {
  SECTION("minimal decohere config") {
    const RunConfig c = parse_config(kMinimal);
    CHECK(c.command == Command::Decohere);
    CHECK(c.variant == Variant::Retarded);
    CHECK(*c.tau == 1e-19);
    CHECK(c.steps == 1000);
    CHECK(std::holds_alternative<system_spec::TwoLevel>(*c.system));
  }
  SECTION("negative tau names the field") {
    std::string text = kMinimal;
    text.replace(text.find("1e-19"), 5, "-1");
    CHECK(field_of(text) == "tau");
  }
  SECTION("two-point tau sweep") {
    const RunConfig c = parse_config(R"({
      "command": "sweep",
      "scheme": {"variant": "retarded", "tau": 1e-19},
      "system": {"two_level": {"delta_e": 4.0}},
      "initial": {"measurement": {"amplitudes": [0.7071067811865476, 0.7071067811865476]}},
      "steps": 10,
      "sweep": {"command": "decohere", "parameter": "tau", "values": [6.26e-24, 1e-19]}
    })");
    REQUIRE(c.sweep);
    CHECK(c.sweep->values == std::vector<double>{6.26e-24, 1e-19});
    CHECK(c.sweep->base == Command::Decohere);
  }
  SECTION("schema errors") {
    CHECK(field_of(R"({"command": "decohere", "bogus": 1})") == "bogus");
    CHECK_THROWS_WITH(parse_config("{\n  \"command\": ,\n}"), ContainsSubstring("line 2"));
    std::string sym = kMinimal;
    sym.replace(sym.find("\"retarded\""), 10, "\"symmetric\"");
    CHECK(field_of(sym) == "scheme.variant");
    std::string neg = kMinimal;
    neg.replace(neg.find("1000"), 4, "-5");
    CHECK(field_of(neg) == "steps");
    CHECK(field_of(R"({"command": "teleport"})") == "command");
  }
}

TEST_CASE("execute", "[cli]") {
  SECTION("fig. 1(a) summary") {
    std::string text = kMinimal;
    text.replace(text.find("1e-19"), 5, "6.26e-24");
    const auto result = execute(parse_config(text));
    const auto& pair = result.summary["pairs"][0];
    CHECK_THAT(pair["gamma"].get<double>(), WithinRel(1.156e8, 1e-3));
    CHECK_THAT(pair["half_time"].get<double>(), WithinRel(std::log(2.0) / 1.156e8, 1e-3));
  }
  SECTION("zero steps gives the initial state only") {
    RunConfig c = parse_config(kMinimal);
    c.steps = 0;
    const auto result = execute(c);
    REQUIRE(result.table.rows.size() == 1);
    const auto& row = result.table.rows[0];
    CHECK(std::get<std::int64_t>(row[0]) == 0);
    // rho_0_1 = c0* c1 = 1/2
    CHECK_THAT(std::get<double>(row[2]), WithinRel(0.5, 1e-15));
    CHECK(std::get<double>(row[3]) == 0.0);
  }
  SECTION("schrodinger table") {
    const auto result = execute(parse_config(R"({
      "command": "schrodinger",
      "scheme": {"variant": "symmetric", "tau": 1e-18},
      "system": {"truncated_oscillator": {"dim": 4, "hbar_omega": 0.1}},
      "initial": {"amplitudes": [0.5, 0.5, 0.5, 0.5]},
      "seeding": "discrete",
      "steps": 100
    })"));
    CHECK(result.table.rows.size() == 101);
    const auto norm_col = result.table.header.size() - 1;
    CHECK(result.table.header[norm_col] == "norm_sq");
    for (const auto& row : result.table.rows) CHECK(std::abs(std::get<double>(row[norm_col]) - 1.0) < 1e-12);
  }
  SECTION("classical uniform B retarded loses energy every tick") {
    const auto result = execute(parse_config(R"({
      "command": "classical",
      "scheme": {"variant": "retarded"},
      "classical": {"scenario": {"uniform_b": {"B": [0, 0, 1e12], "v0": [3e6, 0, 0]}}},
      "steps": 2000
    })"));
    const auto& h = result.table.header;
    const auto col = static_cast<std::size_t>(std::find(h.begin(), h.end(), "kinetic_energy") - h.begin());
    REQUIRE(col < h.size());
    for (std::size_t i = 1; i < result.table.rows.size(); ++i) {
      CHECK(std::get<double>(result.table.rows[i][col]) < std::get<double>(result.table.rows[i - 1][col]));
    }
  }
}

TEST_CASE("run writes deterministic files", "[cli]") {
  TempDir dir;
  RunConfig c = parse_config(kMinimal);
  c.output.path = dir.path / "a.csv";
  run(c);
  const std::string first = slurp(dir.path / "a.csv");
  c.output.path = dir.path / "b.csv";
  run(c);
  CHECK(first == slurp(dir.path / "b.csv"));
  CHECK(fs::exists(dir.path / "a.summary.json"));
  CHECK(first.rfind("k,t_seconds,rho_0_1_re", 0) == 0);

  SECTION("json output round-trips the csv numbers") {
    c.output.path = dir.path / "c.json";
    c.output.format = Format::Json;
    run(c);
    const auto rows = nlohmann::json::parse(slurp(dir.path / "c.json"));
    const auto table = execute(c).table;
    REQUIRE(rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      for (std::size_t j = 1; j < table.header.size(); ++j) {
        CHECK(rows[i][table.header[j]].get<double>() == std::get<double>(table.rows[i][j]));
      }
    }
  }
  SECTION("sweep writes one series per value plus a combined summary") {
    RunConfig s = parse_config(R"({
      "command": "sweep",
      "scheme": {"variant": "retarded", "tau": 1e-19},
      "system": {"two_level": {"delta_e": 4.0}},
      "initial": {"measurement": {"amplitudes": [0.7071067811865476, 0.7071067811865476]}},
      "steps": 10,
      "sweep": {"command": "decohere", "parameter": "tau", "values": [6.26e-24, 1e-19]}
    })");
    s.output.path = dir.path / "sweep.csv";
    const auto report = run(s);
    CHECK(report.written.size() == 3);
    CHECK(fs::exists(dir.path / "sweep_0.csv"));
    CHECK(fs::exists(dir.path / "sweep_1.csv"));
    const auto summary = nlohmann::json::parse(slurp(dir.path / "sweep.summary.json"));
    const double g0 = summary["points"][0]["summary"]["pairs"][0]["gamma"];
    const double g1 = summary["points"][1]["summary"]["pairs"][0]["gamma"];
    CHECK(g1 / g0 > 1.5e4);
  }
}

TEST_CASE("command-line exit codes", "[cli]") {
  TempDir dir;
  const fs::path good = dir.path / "good.json";
  write(good, kMinimal);
  CHECK(run_cli("-c " + good.string() + " -o " + (dir.path / "o.csv").string()) == 0);
  CHECK(fs::exists(dir.path / "o.csv"));
  CHECK(run_cli("-c " + good.string() + " -o " + (dir.path / "o.csv").string() + " --tau -1") == 1);
  CHECK(run_cli("-c " + (dir.path / "missing.json").string()) == 3);
  CHECK(run_cli("--no-such-flag") == 1);

  const fs::path bad = dir.path / "bad.json";
  write(bad, "{ not json");
  CHECK(run_cli("-c " + bad.string()) == 1);

  // A file where the output directory should be makes writing fail.
  write(dir.path / "blocker", "x");
  CHECK(run_cli("-c " + good.string() + " -o " + (dir.path / "blocker" / "o.csv").string()) == 3);

  // The advanced scheme at W tau/hbar ~ 15 overflows within a few hundred steps.
  const fs::path blowup = dir.path / "blowup.json";
  write(blowup, R"({
    "command": "schrodinger",
    "scheme": {"variant": "advanced", "tau": 1e-14},
    "system": {"two_level": {"delta_e": 1.0}},
    "initial": {"amplitudes": [0.0, 1.0]},
    "steps": 100000,
    "stride": 1000
  })");
  CHECK(run_cli("-c " + blowup.string() + " -o " + (dir.path / "x.csv").string()) == 2);
}
