#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fomnav/evaluation.hpp"
#include "fomnav/simulator.hpp"
#include "peer_server.hpp"

using namespace fomnav;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

// Small worlds and images keep every invocation to a few seconds.
const std::string kSmall = " --width 160 --height 120 ";

CliResult cli(const std::string& args) {
  const std::string cmd = std::string("\"") + FOMNAV_CLI + "\" " + args + " 2>/dev/null";
  CliResult r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), p)) > 0;) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("fomnav_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string run_args(const fs::path& dir, const std::string& tag, const std::string& policy) {
  return kSmall + "--seed 3 run --world-seed 11 --episodes 2 --policy '" + policy + "' --trace \"" +
         (dir / (tag + ".trace")).string() + "\" --results \"" + (dir / (tag + ".jsonl")).string() + "\"";
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with status 2") {
    CHECK(cli("").code == 2);
    CHECK(cli("--help").code == 0);
    CHECK(cli("run --world-seed 1 --policy bogus").code == 2);
    CHECK(cli("--seg-noise 2 run --world-seed 1").code == 2);
    CHECK(cli("run").code == 2);
    CHECK(cli("run --world-seed 1 --world x.json").code == 2);
    CHECK(cli("eval").code == 2);
    CHECK(cli("bench --grid 4").code == 2);
    CHECK(cli("render --world-seed 1").code == 2);
    CHECK(cli("eval --results /nonexistent/results.jsonl").code == 1);
  }

  TEST_CASE("an external peer over stdio and tcp makes the decisions of the built-in baseline") {
    const auto dir = scratch("peer");
    const auto local = cli(run_args(dir, "local", "nearest-frontier"));
    REQUIRE(local.code == 0);
    const auto stdio = cli(run_args(dir, "stdio", std::string("extern:") + PEER_POLICY));
    REQUIRE(stdio.code == 0);
    {
      PeerServer server(2);
      const auto tcp = cli(run_args(dir, "tcp", "extern:127.0.0.1:" + std::to_string(server.port)));
      REQUIRE(tcp.code == 0);
    }
    const auto trace = slurp(dir / "local.trace");
    CHECK_FALSE(trace.empty());
    CHECK(slurp(dir / "stdio.trace") == trace);
    CHECK(slurp(dir / "tcp.trace") == trace);
    CHECK(slurp(dir / "stdio.jsonl") == slurp(dir / "local.jsonl"));
    CHECK(slurp(dir / "tcp.jsonl") == slurp(dir / "local.jsonl"));
    CHECK(stdio.out == local.out);
    fs::remove_all(dir);
  }

  TEST_CASE("a peer that answers garbage fails the run") {
    const auto dir = scratch("garbage");
    const auto r = cli(run_args(dir, "bad", std::string("extern:") + PEER_POLICY + " --garbage-after 0"));
    CHECK(r.code == 1);
    std::ifstream in(dir / "bad.jsonl");
    int n = 0;
    for (std::string line; std::getline(in, line); ++n)
      CHECK(evaluation::result_from_json(json::parse(line)).failure == evaluation::FailureReason::ProtocolError);
    CHECK(n == 2);
    fs::remove_all(dir);
  }

  TEST_CASE("eval reproduces the run report") {
    const auto dir = scratch("eval");
    const std::string results = (dir / "r.jsonl").string();
    const auto run = cli(kSmall + "run --world-seed 5 --worlds 2 --episodes 1 --json --results \"" + results + "\"");
    REQUIRE(run.code == 0);
    const auto ev = cli("eval --json --results \"" + results + "\"");
    REQUIRE(ev.code == 0);
    auto a = json::parse(run.out), b = json::parse(ev.out);
    CHECK(a["episodes"] == b["episodes"]);
    CHECK(a["sr"] == b["sr"]);
    CHECK(a["spl"] == b["spl"]);
    CHECK(a["per_category"] == b["per_category"]);
    // Parallel runs write the same results in the same order.
    const auto par = cli(kSmall + "run --world-seed 5 --worlds 2 --episodes 1 --jobs 2 --results \"" + results + ".par\"");
    REQUIRE(par.code == 0);
    CHECK(slurp(results + ".par") == slurp(results));
    fs::remove_all(dir);
  }

  TEST_CASE("gen-dataset is byte-for-byte reproducible") {
    const auto dir = scratch("ds");
    const std::string args = kSmall + "--seed 9 gen-dataset --world-seed 21 --episodes 2 --out ";
    REQUIRE(cli(args + "\"" + (dir / "a").string() + "\"").code == 0);
    REQUIRE(cli(args + "\"" + (dir / "b").string() + "\"").code == 0);
    const auto manifest = slurp(dir / "a" / "manifest.json");
    CHECK(manifest == slurp(dir / "b" / "manifest.json"));
    const auto m = json::parse(manifest);
    REQUIRE(m["episodes"].size() + m["stats"]["skipped"].get<std::size_t>() == 2);
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
      if (!entry.is_directory()) continue;
      for (const char* f : {"meta.json", "steps.jsonl", "clouds.bin"})
        CHECK(slurp(entry.path() / f) == slurp(dir / "b" / entry.path().filename() / f));
    }
    const auto ev = cli("eval --json --dataset \"" + (dir / "a").string() + "\"");
    CHECK(ev.code == 0);
    CHECK(json::parse(ev.out)["episodes"] == m["episodes"].size());
    fs::remove_all(dir);
  }

  TEST_CASE("render writes a png, a map and a loadable world") {
    const auto dir = scratch("render");
    const auto png = dir / "w.png", map = dir / "w.pgm", world = dir / "w.json";
    REQUIRE(cli("render --world-seed 4 --scale 2 --png \"" + png.string() + "\" --map \"" + map.string() +
                "\" --save-world \"" + world.string() + "\"")
                .code == 0);
    CHECK(slurp(png).substr(0, 8) == std::string("\x89PNG\r\n\x1a\n", 8));
    CHECK(slurp(map).substr(0, 2) == "P5");
    CHECK(sim::world_hash(sim::load_world(world.string())) == sim::world_hash(sim::generate_world(4, sim::GenParams{})));
    fs::remove_all(dir);
  }

  TEST_CASE("bench reports every row") {
    const auto r = cli("bench --grid 32 --repeats 2 --json");
    REQUIRE(r.code == 0);
    const auto rows = json::parse(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0]["name"] == "fmm_field");
    CHECK(rows[1]["name"] == "astar_plan");
    CHECK(rows[2]["name"] == "integrate_observation");
    for (const auto& row : rows) {
      CHECK(row["min_ms"].get<double>() <= row["mean_ms"].get<double>());
      CHECK(row["mean_ms"].get<double>() <= row["max_ms"].get<double>());
      CHECK(row["variance_ms2"].get<double>() >= 0);
    }
  }
}
