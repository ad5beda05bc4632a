#include <catch2/catch.hpp>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sgdiff/cli.hpp"

using namespace sgdiff;
namespace fs = std::filesystem;

namespace {

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"sgdiff"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& sub = "") const { return (path / sub).string(); }
};

}  // namespace

TEST_CASE("generate is deterministic and degrade pairs resolutions") {
  TempDir tmp("sgdiff_cli_gen");
  const std::vector<std::string> gen{"generate", "--preset", "taylor_green", "--n", "32",
                                     "--gen-factor", "1",    "--trajectories", "2",  "--T",
                                     "0.25",     "--seed",   "7",  "--out", tmp.str("a")};
  REQUIRE(run(gen) == 0);
  auto gen_b = gen;
  gen_b.back() = tmp.str("b");
  REQUIRE(run(gen_b) == 0);
  CHECK(read_bytes(tmp.path / "a/traj_000.sgfd") == read_bytes(tmp.path / "b/traj_000.sgfd"));
  CHECK(read_bytes(tmp.path / "a/traj_001.sgfd") == read_bytes(tmp.path / "b/traj_001.sgfd"));
  CHECK(fs::exists(tmp.path / "a/effective_config.json"));

  REQUIRE(run({"degrade", "--input", tmp.str("a"), "--out", tmp.str("low"), "--factor", "4",
               "--pipeline", "solver", "--preset", "taylor_green"}) == 0);
  const io::SgfdContents low = io::read_sgfd(tmp.str("low/traj_000.sgfd"));
  const io::SgfdContents high = io::read_sgfd(tmp.str("a/traj_000.sgfd"));
  CHECK(low.frames.front().data.rows() == 8);
  CHECK(low.frames.size() == high.frames.size());
  CHECK(low.frames[0].data == downsample_uniform(high.frames[0].data, 4));

  REQUIRE(run({"degrade", "--input", tmp.str("a"), "--out", tmp.str("low_ds"), "--factor", "4",
               "--pipeline", "downsample", "--preset", "taylor_green"}) == 0);
  const io::SgfdContents low_ds = io::read_sgfd(tmp.str("low_ds/traj_000.sgfd"));
  CHECK(low_ds.frames.back().data == downsample_uniform(high.frames.back().data, 4));
}

TEST_CASE("the full pipeline produces finite metrics end to end") {
  TempDir tmp("sgdiff_cli_pipeline");
  REQUIRE(run({"generate", "--preset", "kolmogorov", "--n", "32", "--gen-factor", "1",
               "--trajectories", "2", "--T", "0.5", "--burn-in", "1.0", "--seed", "3", "--out",
               tmp.str("high")}) == 0);
  REQUIRE(run({"degrade", "--input", tmp.str("high"), "--out", tmp.str("low"), "--factor", "2",
               "--pipeline", "solver", "--preset", "kolmogorov"}) == 0);
  REQUIRE(run({"train", "--data", tmp.str("high"), "--out", tmp.str("model.sgfm"), "--preset",
               "kolmogorov", "--epochs", "10", "--time-bins", "8", "--radial-bins", "8",
               "--seed", "1"}) == 0);
  REQUIRE(run({"reconstruct", "--low", tmp.str("low/traj_001.sgfd"), "--model",
               tmp.str("model.sgfm"), "--out", tmp.str("rec"), "--preset", "kolmogorov",
               "--steps", "8", "--max-samples", "4", "--seed", "5", "--render"}) == 0);
  CHECK(fs::exists(tmp.path / "rec/traj_001_f0001.sgfd"));
  CHECK(fs::exists(tmp.path / "rec/traj_001_f0001.pgm"));

  REQUIRE(run({"evaluate", "--pred", tmp.str("rec"), "--truth", tmp.str("high/traj_001.sgfd"),
               "--out", tmp.str("eval"), "--preset", "kolmogorov"}) == 0);
  const io::CsvTable metrics = io::read_csv(tmp.str("eval/metrics.csv"));
  CHECK(metrics.columns.size() == 10);
  REQUIRE(metrics.rows.size() == 4);
  for (const auto& row : metrics.rows) {
    CHECK(std::isfinite(std::stod(row[metrics.column("l2")])));
    CHECK(std::isfinite(std::stod(row[metrics.column("residual_metric")])));
    CHECK(std::isfinite(std::stod(row[metrics.column("ssim")])));
  }
  const io::CsvTable subbands = io::read_csv(tmp.str("eval/subbands.csv"));
  CHECK(subbands.columns.size() == 5);
  CHECK(subbands.rows.size() == 4);
}

TEST_CASE("evaluating a prediction against itself gives perfect scores") {
  TempDir tmp("sgdiff_cli_selfeval");
  // build a tiny 3-frame trajectory and a matching "prediction" triplet
  const FourierGrid g = wavenumber_grid(16, kTwoPi, kTwoPi);
  SolverConfig cfg;
  cfg.n = 16;
  cfg.Re = 100.0;
  cfg.T = 2.0 / 32.0;
  const Trajectory traj = simulate_trajectory(init_taylor_green(1.0, 1, 0.0, g, 0), cfg, 0);
  io::write_sgfd(tmp.str("truth.sgfd"), traj);
  fs::create_directories(tmp.str("pred"));
  io::write_sgfd(tmp.str("pred/truth_f0001.sgfd"),
                 {traj.frames[0].data, traj.frames[1].data, traj.frames[2].data}, cfg.dt_record,
                 cfg.Lx, cfg.Ly, cfg.Re);
  REQUIRE(run({"evaluate", "--pred", tmp.str("pred"), "--truth", tmp.str("truth.sgfd"), "--out",
               tmp.str("eval")}) == 0);
  const io::CsvTable metrics = io::read_csv(tmp.str("eval/metrics.csv"));
  REQUIRE(metrics.rows.size() == 1);
  CHECK(std::stod(metrics.rows[0][metrics.column("l2")]) == 0.0);
  CHECK(std::stod(metrics.rows[0][metrics.column("residual_metric")]) == 0.0);
  CHECK(std::stod(metrics.rows[0][metrics.column("ssim")]) == Approx(1.0));
  CHECK(metrics.rows[0][metrics.column("psnr")] == "inf");
}

TEST_CASE("schedule sweep emits one row per policy") {
  TempDir tmp("sgdiff_cli_sweep");
  REQUIRE(run({"generate", "--preset", "kolmogorov", "--n", "32", "--gen-factor", "1",
               "--trajectories", "1", "--T", "0.25", "--burn-in", "0.5", "--seed", "4", "--out",
               tmp.str("high")}) == 0);
  REQUIRE(run({"degrade", "--input", tmp.str("high"), "--out", tmp.str("low"), "--factor", "2",
               "--pipeline", "solver", "--preset", "kolmogorov"}) == 0);
  REQUIRE(run({"train", "--data", tmp.str("high"), "--out", tmp.str("model.sgfm"), "--preset",
               "kolmogorov", "--epochs", "5", "--time-bins", "4", "--radial-bins", "4",
               "--seed", "1"}) == 0);
  REQUIRE(run({"schedule-sweep", "--low", tmp.str("low"), "--model", tmp.str("model.sgfm"),
               "--truth", tmp.str("high/traj_000.sgfd"), "--out", tmp.str("sweep"), "--preset",
               "kolmogorov", "--steps", "8", "--max-samples", "3", "--policies",
               "start_space:2,1;end_space:2,1", "--seed", "2"}) == 0);
  const io::CsvTable sweep = io::read_csv(tmp.str("sweep/sweep.csv"));
  REQUIRE(sweep.rows.size() == 2);
  CHECK(sweep.rows[0][0] == "start_2_space_1");
  CHECK(sweep.rows[1][0] == "end_2_space_1");
  CHECK(std::isfinite(std::stod(sweep.rows[0][sweep.column("residual_metric")])));
}

TEST_CASE("usage errors exit with code 1 and runtime errors with code 2") {
  CHECK(run({"generate", "--bogus-flag", "x", "--out", "/tmp/nowhere"}) == 1);
  CHECK(run({"nonexistent-command"}) == 1);
  CHECK(run({"train", "--data", "/nonexistent/path", "--out", "/tmp/m.sgfm"}) == 2);
  TempDir tmp("sgdiff_cli_badcfg");
  {
    std::ofstream cfg(tmp.str("bad.json"));
    cfg << "{\"unknown_key\": 1}\n";
  }
  CHECK(run({"generate", "--config", tmp.str("bad.json"), "--out", tmp.str("out")}) == 1);
}
