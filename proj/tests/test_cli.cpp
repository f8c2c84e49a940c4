#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "oracles.hpp"
#include "wph/io.hpp"

using namespace wph;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("wph_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(WPH_CLI) + " " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  for (std::size_t k; (k = std::fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, k);
  const int status = ::pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_json(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

const char* kSmall = R"({"model": {"preset": "B", "J": 3, "Q": 4, "optimizer": {"max_iter": 30}},
  "eval": {"structure_j": [1, 2], "structure_q": [1, 2, 3], "profile_a_max": 2}})";

}  // namespace

TEST_CASE("exit codes") {
  Workspace w;
  write_field(w / "x.phk", oracle::random_field(32, 1));
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
  write_json(w / "bad.json", R"({"model": {"preset": "B", "colour": 1}})");
  CHECK(cli("--config " + w / "bad.json" + " cov " + w / "x.phk").code == 2);
  CHECK(cli("--config " + w / "none.json" + " cov " + w / "x.phk").code == 4);
  CHECK(cli("cov " + w / "missing.phk").code == 4);
  CHECK(cli("--restarts 0 synth " + w / "x.phk").code == 2);
  CHECK(cli("--threads 0 synth " + w / "x.phk").code == 2);
  CHECK(cli("cov").code == 2);
  // Default model needs 2^5 <= side.
  write_field(w / "tiny.phk", oracle::random_field(16, 1));
  CHECK(cli("cov " + w / "tiny.phk").code == 2);
}

TEST_CASE("cov is deterministic and reports the edge count") {
  Workspace w;
  write_field(w / "x.phk", oracle::random_field(32, 2));
  write_json(w / "c.json", kSmall);
  auto r1 = cli("--config " + w / "c.json" + " --out " + w / "a cov " + w / "x.phk");
  REQUIRE(r1.code == 0);
  CHECK(r1.out.find("|E_G|/d") != std::string::npos);
  REQUIRE(cli("--config " + w / "c.json" + " --out " + w / "b cov " + w / "x.phk").code == 0);
  CHECK(slurp(w / "a/cov.phkt") == slurp(w / "b/cov.phkt"));
  CHECK(slurp(w / "a/cov.csv") == slurp(w / "b/cov.csv"));
  CHECK(read_table(w / "a/cov.phkt").edges.size() > 0);
}

TEST_CASE("synth is reproducible for a fixed seed") {
  Workspace w;
  write_field(w / "x.phk", oracle::random_field(32, 3));
  write_json(w / "c.json", kSmall);
  const std::string base = "--config " + w / "c.json" + " --restarts 2 ";
  REQUIRE(cli(base + "--seed 5 --out " + w / "a synth " + w / "x.phk").code == 0);
  REQUIRE(cli(base + "--seed 5 --out " + w / "b synth " + w / "x.phk").code == 0);
  REQUIRE(cli(base + "--seed 6 --out " + w / "c synth " + w / "x.phk").code == 0);
  CHECK(slurp(w / "a/sample_000.phk") == slurp(w / "b/sample_000.phk"));
  CHECK(slurp(w / "a/sample_001.phk") == slurp(w / "b/sample_001.phk"));
  CHECK(slurp(w / "a/sample_000.phk") != slurp(w / "c/sample_000.phk"));
  CHECK(slurp(w / "a/loss.csv").rfind("restart,iteration,loss\n", 0) == 0);
  CHECK(slurp(w / "a/synth.json").find("\"best\"") != std::string::npos);
}

TEST_CASE("model A goes through the Gaussian fit") {
  Workspace w;
  write_field(w / "x.phk", oracle::random_field(32, 4));
  write_json(w / "c.json", R"({"model": {"preset": "A", "J": 3, "Q": 4}, "gauss": {"samples": 3}})");
  const std::string cfg = "--config " + w / "c.json";
  REQUIRE(cli(cfg + " --restarts 2 --out " + w / "s synth " + w / "x.phk").code == 0);
  CHECK(fs::exists(w / "s/spectrum.phk"));
  CHECK(fs::exists(w / "s/sample_001.phk"));
  CHECK_FALSE(fs::exists(w / "s/sample_002.phk"));

  REQUIRE(cli(cfg + " --out " + w / "f gauss-fit " + w / "x.phk").code == 0);
  CHECK(slurp(w / "f/spectrum.phk") == slurp(w / "s/spectrum.phk"));
  REQUIRE(cli(cfg + " --seed 1 --out " + w / "g gauss-sample " + w / "f/spectrum.phk").code == 0);
  CHECK(read_field_dir(w / "g").size() == 3);
  CHECK(cli(cfg + " gauss-sample " + w / "nothing.phk").code == 4);
}

TEST_CASE("eval writes one row per requested structure function") {
  Workspace w;
  fs::create_directories(w / "ref");
  fs::create_directories(w / "model");
  for (int i = 0; i < 2; ++i) {
    write_field(w / ("ref/r" + std::to_string(i) + ".phk"), oracle::random_field(32, 10 + i));
    write_field(w / ("model/m" + std::to_string(i) + ".phk"), oracle::random_field(32, 20 + i));
  }
  write_json(w / "c.json", kSmall);
  REQUIRE(cli("--config " + w / "c.json" + " --out " + w / "e eval " + w / "ref " + w / "model").code == 0);
  std::ifstream in(w / "e/errors.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "metric,j,q,mean,std");
  int rows = 0, structure = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.rfind("structure,", 0) == 0) ++structure;
  }
  CHECK(structure == 6);
  CHECK(rows == 8);  // eps_model, eps_emp and the structure grid
  CHECK(fs::exists(w / "e/profile_reference.csv"));

  // The reference against itself has no model error.
  REQUIRE(cli("--config " + w / "c.json" + " --out " + w / "s eval " + w / "ref/r0.phk " + w / "ref/r0.phk").code == 0);
  CHECK(slurp(w / "s/errors.csv").find("eps_model,0,0,0,0") != std::string::npos);

  write_field(w / "big.phk", oracle::random_field(64, 1));
  CHECK(cli("--config " + w / "c.json" + " eval " + w / "ref " + w / "big.phk").code == 2);
  CHECK(cli("--config " + w / "c.json" + " eval " + w / "ref " + w / "nowhere").code == 4);
}

TEST_CASE("gauss-test verdicts") {
  Workspace w;
  fs::create_directories(w / "noise");
  for (int i = 0; i < 40; ++i)
    write_field(w / ("noise/n" + std::to_string(100 + i) + ".phk"), white_noise(32, 1.0, 1000 + i));
  write_json(w / "c.json", R"({"model": {"J": 3, "Q": 4}})");
  auto r = cli("--config " + w / "c.json" + " gauss-test " + w / "noise");
  CHECK(r.code == 0);
  CHECK(r.out.find("verdict: consistent with Gaussian") != std::string::npos);

  Field spikes(32);
  for (int i = 0; i < 6; ++i) spikes(5 * i + 1, (7 * i) % 32) = 1.0;
  write_field(w / "spikes.phk", spikes);
  r = cli("--config " + w / "c.json" + " gauss-test " + w / "spikes.phk");
  CHECK(r.code == 0);
  CHECK(r.out.find("verdict: non-Gaussian") != std::string::npos);
  CHECK(cli("gauss-test " + w / "absent.phk").code == 4);
}

TEST_CASE("spectrum and export") {
  Workspace w;
  write_field(w / "x.phk", oracle::random_field(256, 5));
  REQUIRE(cli("--out " + w / "o spectrum " + w / "x.phk").code == 0);
  CHECK(slurp(w / "o/spectrum.csv").rfind("radius,log10_power,count\n", 0) == 0);
  REQUIRE(cli("--out " + w / "o export " + w / "x.phk").code == 0);
  const std::string pgm = slurp(w / "o/x.pgm");
  CHECK(pgm.rfind("P5\n256 256\n65535\n", 0) == 0);
  CHECK(pgm.size() == std::string("P5\n256 256\n65535\n").size() + 131072);
  CHECK(fs::exists(w / "o/x.pgm.json"));
}
