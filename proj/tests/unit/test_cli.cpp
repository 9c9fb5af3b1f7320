#include "deepbarrier/cli.hpp"
#include "deepbarrier/config.hpp"

#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace deepbarrier;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("deepbarrier_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"train", "--no-such-flag"}).code == kExitUsage);
  CHECK(run({"fly"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("validation errors exit with 3") {
  const fs::path dir = scratch("validation");
  const Result r = run({"oracle", "--vol=-0.1", "--out-dir", dir.string()});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("vol must be >= 0") != std::string::npos);
}

TEST_CASE("oracle prints quotes and writes a manifest") {
  const fs::path dir = scratch("oracle");
  const Result r = run({"oracle", "--x0", "100", "--mc-paths", "2000", "--grid-csv", "--out-dir", dir.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("barrier_price: 6.6128900758") != std::string::npos);
  CHECK(r.out.find("mc_bridge_se:") != std::string::npos);
  CHECK(fs::exists(dir / "oracle_grid.csv"));
  const RunManifest m = RunManifest::from_json(slurp(dir / "oracle_manifest.json"));
  CHECK(m.outputs.size() == 1);
  fs::remove_all(dir);
}

TEST_CASE("demo-triggers writes the trace") {
  const fs::path dir = scratch("demo");
  const Result r = run({"demo-triggers", "--paths", "5", "--seed", "3", "--out-dir", dir.string()});
  REQUIRE(r.code == kExitOk);
  const std::string trace = slurp(dir / "triggers.csv");
  CHECK(trace.rfind("path,step,time,level,xtrig,tfp,xfp\n", 0) == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 1 + 5 * 401);
  fs::remove_all(dir);
}

TEST_CASE("train, price, hedge and evaluate compose and reproduce") {
  const fs::path dir = scratch("train");
  const std::vector<std::string> train_args = {"train", "--steps", "10", "--batch", "32", "--mini-batches", "20",
                                               "--layers", "2", "--units", "3", "--seed", "5", "--progress", "0",
                                               "--out-dir", dir.string()};
  const Result t = run(train_args);
  REQUIRE(t.code == kExitOk);
  CHECK(t.out.find("final_running_loss:") != std::string::npos);
  const std::string ckpt = (dir / "checkpoint.bin").string();
  const std::string history = slurp(dir / "loss_history.csv");
  CHECK(std::count(history.begin(), history.end(), '\n') == 21);

  const Result p = run({"price", "--checkpoint", ckpt, "--x0", "100", "--x0", "160", "--out-dir", dir.string()});
  REQUIRE(p.code == kExitOk);
  CHECK(p.out.find("learned:") != std::string::npos);
  CHECK(p.out.find("analytic: 0\n") != std::string::npos);

  const Result h = run({"hedge", "--checkpoint", ckpt, "--eval-paths", "200", "--out-dir", dir.string()});
  REQUIRE(h.code == kExitOk);
  CHECK(h.out.find("learned_iqr_5_95:") != std::string::npos);
  CHECK(h.out.find("analytic_mean:") != std::string::npos);

  const Result e = run({"evaluate", "--checkpoint", ckpt, "--eval-paths", "200", "--loss-history",
                        (dir / "loss_history.csv").string(), "--out-dir", (dir / "eval").string()});
  REQUIRE(e.code == kExitOk);
  for (const char* f : {"y0_grid.csv", "delta_surface.csv", "payoff_scatter.csv", "pnl_learned.csv",
                        "pnl_analytic.csv", "pnl_histogram.csv", "loss_history.csv", "evaluate_manifest.json"}) {
    CHECK(fs::exists(dir / "eval" / f));
  }

  // Re-running from the manifest reproduces every output byte for byte.
  const fs::path again = scratch("train_again");
  const Result t2 = run({"train", "--from-manifest", (dir / "train_manifest.json").string(), "--progress", "0",
                         "--out-dir", again.string()});
  REQUIRE(t2.code == kExitOk);
  CHECK(slurp(again / "checkpoint.bin") != std::string());
  CHECK(slurp(again / "loss_history.csv") == history);
  const RunManifest m1 = RunManifest::from_json(slurp(dir / "train_manifest.json"));
  const RunManifest m2 = RunManifest::from_json(slurp(again / "train_manifest.json"));
  REQUIRE(m1.outputs.size() == m2.outputs.size());
  for (std::size_t k = 0; k < m1.outputs.size(); ++k) {
    // These embed the config, whose out_dir differs.
    const auto name = m1.outputs[k].path.filename();
    if (name == "config.yaml" || name == "checkpoint.bin" || name == "train_report.txt") continue;
    CHECK(m1.outputs[k].fnv1a == m2.outputs[k].fnv1a);
  }
  CHECK(m1.config_hash != m2.config_hash);  // out_dir differs
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST_CASE("sweep writes one row per cell") {
  const fs::path dir = scratch("sweep");
  const Result r = run({"sweep", "--layers-list", "2,3", "--units-list", "3", "--steps-list", "10", "--batch-list",
                        "16", "--mini-batches", "5", "--progress", "0", "--out-dir", dir.string()});
  REQUIRE(r.code == kExitOk);
  const std::string csv = slurp(dir / "sweep.csv");
  CHECK(csv.rfind("layers,units,steps,batch,mini_batches,final_loss,running_loss\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(run({"sweep", "--layers-list", "x", "--out-dir", dir.string()}).code == kExitValidation);
  fs::remove_all(dir);
}
