#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "quic_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Result run(const std::string& args) {
  const auto err_path = work_dir() / "stderr.txt";
  const std::string cmd = std::string(QUIC_LIDAR_BIN) + " " + args + " 2>" + err_path.string();
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.err = slurp(err_path);
  return r;
}

fs::path scenario(const std::string& name, const std::string& text) {
  const auto p = work_dir() / name;
  std::ofstream(p) << text;
  return p;
}

const char* kSmall = R"({
  "scene": {"width": 4, "height": 3, "surfaces": [{"depth_mm": 0.1}]},
  "scan": {"num_steps": 4000},
  "seeds": [3]
})";

void expect_error(const Result& r, int status, const std::string& code) {
  EXPECT_EQ(r.status, status) << r.err;
  EXPECT_EQ(r.err.rfind("error[" + code + "] ", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("validate").status, 2);
  EXPECT_EQ(run("--help").status, 0);
}

TEST(Cli, ValidatePrintsOk) {
  const auto r = run("validate --scenario " + scenario("small.json", kSmall).string());
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.rfind("ok: 4x3 pixels, 1 surface(s), 4000 scan steps, 1 seed(s)", 0), 0u) << r.out;
  EXPECT_TRUE(r.err.empty());
  const auto q = run("validate --quiet --pixels 8x2 --scenario " + scenario("small.json", kSmall).string());
  EXPECT_EQ(q.status, 0);
  EXPECT_TRUE(q.out.empty());
}

TEST(Cli, ErrorCodes) {
  expect_error(run("validate --scenario " + scenario("bad.json", "{\n  \"scene\": ,\n}").string()), 3, "E_PARSE");
  expect_error(run("validate --scenario " + scenario("schema.json", R"({"scene": {"width": -1}})").string()), 4,
               "E_SCHEMA");
  expect_error(run("validate --scenario " +
                   scenario("physics.json", R"({"scene": {"preset": "uniform"}, "source": {"lambda_pump_nm": 532, "lambda_ref_nm": 800, "lambda_probe_nm": 1316}})")
                       .string()),
               5, "E_PHYSICS");
  expect_error(run("validate --scenario " + (work_dir() / "nope.json").string()), 6, "E_IO");
  expect_error(run("validate --pixels 0x3 --scenario " + scenario("small.json", kSmall).string()), 4, "E_SCHEMA");
}

TEST(Cli, SimulateAnalyzeRoundTrip) {
  const auto cfg = scenario("small.json", kSmall).string();
  const auto frames = work_dir() / "frames";
  const auto sim = run("simulate --quiet --scenario " + cfg + " --out " + frames.string());
  ASSERT_EQ(sim.status, 0) << sim.err;
  EXPECT_TRUE(fs::exists(frames / "frame_ref_000000.pgm"));
  EXPECT_TRUE(fs::exists(frames / "frame_probe_003999.pgm"));
  EXPECT_TRUE(fs::exists(frames / "positions.csv"));
  EXPECT_TRUE(fs::exists(frames / "manifest.txt"));

  const auto direct = run("analyze --scenario " + cfg + " --out " + (work_dir() / "a1").string());
  const auto offline = run("analyze --scenario " + cfg + " --frames " + frames.string() + " --out " +
                           (work_dir() / "a2").string());
  ASSERT_EQ(direct.status, 0) << direct.err;
  ASSERT_EQ(offline.status, 0) << offline.err;
  EXPECT_EQ(direct.out, offline.out);
  EXPECT_NE(direct.out.find("ref: 1 surface(s)"), std::string::npos) << direct.out;
  EXPECT_EQ(slurp(work_dir() / "a1" / "manifest.txt"), slurp(work_dir() / "a2" / "manifest.txt"));

  const auto reseeded = run("analyze --quiet --seed 4 --scenario " + cfg + " --out " + (work_dir() / "a3").string());
  ASSERT_EQ(reseeded.status, 0);
  EXPECT_NE(slurp(work_dir() / "a1" / "manifest.txt"), slurp(work_dir() / "a3" / "manifest.txt"));
}

TEST(Cli, SweepAndJam) {
  const auto sweep = scenario("sweep.json", R"({
    "scene": {"width": 3, "height": 3, "surfaces": [{"depth_mm": 0.4}]},
    "scan": {"num_steps": 13334},
    "peaks": {"max_surfaces": 1},
    "sweep": {"kind": "led", "levels_db": [0, 20]},
    "seeds": [1, 2]
  })");
  const auto r = run("sweep --scenario " + sweep.string() + " --out " + (work_dir() / "sweep").string());
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("ref/all: baseline SNR"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("probe/all:"), std::string::npos);
  EXPECT_TRUE(fs::exists(work_dir() / "sweep" / "knees.csv"));

  const auto j = run("jam --pixels 12x12 --seed 1 --scenario " + sweep.string() + " --out " +
                     (work_dir() / "jam").string());
  ASSERT_EQ(j.status, 0) << j.err;
  EXPECT_NE(j.out.find("jam-affected reference pixels: matched "), std::string::npos) << j.out;
  EXPECT_TRUE(fs::exists(work_dir() / "jam" / "affected_jam_matched.pgm"));
  EXPECT_TRUE(fs::exists(work_dir() / "jam" / "visibility_jam_matched_ref.pgm"));
}
