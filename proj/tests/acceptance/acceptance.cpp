// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
//
//   acceptance [--out-dir DIR] [--only 1,4,9]

#include "deepbarrier/barrier.hpp"
#include "deepbarrier/evaluation.hpp"
#include "deepbarrier/nn/checkpoint.hpp"
#include "deepbarrier/nn/model_params.hpp"
#include "deepbarrier/nn/tape.hpp"
#include "deepbarrier/oracles.hpp"
#include "deepbarrier/sde_engine.hpp"
#include "deepbarrier/trainer.hpp"
#include "support/reference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace deepbarrier;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void note(const std::string& text) { std::cerr << "  .. " << text << std::endl; }

// The baseline instrument and market: sigma 0.2, r 0.05, T 0.5, U 150, K 100.
MarketModel base_model() { return MarketModel{}; }
InstrumentSpec base_instrument() { return InstrumentSpec{}; }

TrainConfig base_train(int layers, int units, int steps, long batch, long mini_batches, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.layers = layers;
  cfg.units = units;
  cfg.steps = steps;
  cfg.batch = batch;
  cfg.mini_batches = mini_batches;
  cfg.seed = seed;
  cfg.running_window = 500;
  return cfg;
}

TrainHooks progress_hooks(const std::string& label) {
  TrainHooks hooks;
  hooks.progress_stride = 1000;
  hooks.progress = [label](const LossRecord& r) {
    note(label + " mini_batch " + std::to_string(r.step) + " running " + fmt("%.4f", r.running_loss));
  };
  return hooks;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream out(path, std::ios::binary);
  fn(out);
}

std::vector<double> acceptance_grid() { return linspace(55.0, 145.0, 5.0); }

/// The full-length run on the baseline setup, shared by criteria 1, 3, 7.
struct MainRun {
  TrainConfig cfg;
  TrainResult result;
  nn::ModelParams at_5000;
};

class Suite {
 public:
  explicit Suite(fs::path out) : out_(std::move(out)) { fs::create_directories(out_); }

  const MainRun& main_run() {
    if (!main_) {
      const auto t0 = std::chrono::steady_clock::now();
      MainRun m;
      m.cfg = base_train(5, 5, 200, 512, 20000, 42);
      TrainHooks hooks = progress_hooks("main");
      hooks.snapshot_at = {5000};
      hooks.snapshot = [&m](long, const nn::ModelParams& p) { m.at_5000 = p; };
      m.result = train(m.cfg, base_model(), base_instrument(), RiskNeutralGenerator(base_model().rate), hooks);
      write_file(out_ / "main_loss_history.csv", [&](std::ostream& o) { write_loss_history_csv(o, m.result.report.history); });
      write_file(out_ / "main_checkpoint.bin", [&](std::ostream& o) {
        o << nn::serialize_checkpoint({m.result.params, m.cfg.seed, m.cfg.mini_batches, {}});
      });
      note("main run " + fmt("%.0f", seconds_since(t0)) + " s");
      main_ = std::move(m);
    }
    return *main_;
  }

  // 1. Learned Y0 against the continuous closed form.
  Outcome pricing_accuracy() {
    const MainRun& m = main_run();
    const auto rows = y0_grid_compare(m.result.params, base_model(), base_instrument(), acceptance_grid());
    write_file(out_ / "y0_grid.csv", [&](std::ostream& o) { write_y0_grid_csv(o, rows); });
    const double mae = mean_abs_diff(rows);
    const double mae_5000 = mean_abs_diff(y0_grid_compare(m.at_5000, base_model(), base_instrument(), acceptance_grid()));
    return {mae <= 0.35, "MAE over x0 in {55..145} at 20000 mini-batches = " + fmt("%.4f", mae) +
                             " (bound 0.35); at 5000: " + fmt("%.4f", mae_5000)};
  }

  // 2. Loss magnitude and the depth ordering.
  Outcome loss_magnitude() {
    const auto t0 = std::chrono::steady_clock::now();
    const TrainConfig big = base_train(5, 5, 200, 1024, 20000, 42);
    const TrainResult r = train(big, base_model(), base_instrument(), RiskNeutralGenerator(base_model().rate),
                                progress_hooks("b1024"));
    write_file(out_ / "b1024_loss_history.csv", [&](std::ostream& o) { write_loss_history_csv(o, r.report.history); });
    const double running = r.report.final_running_loss;
    note("b=1024 run " + fmt("%.0f", seconds_since(t0)) + " s");

    // n=5 against n=7 for u in {3, 5}, each on three seeds, matched by seed.
    int wins = 0, total = 0;
    std::ostringstream cells;
    for (int u : {3, 5}) {
      for (std::uint64_t seed : {101u, 202u, 303u}) {
        double loss[2];
        int k = 0;
        for (int n : {5, 7}) {
          const TrainConfig cfg = base_train(n, u, 100, 512, 2000, seed);
          loss[k++] = train(cfg, base_model(), base_instrument(), RiskNeutralGenerator(base_model().rate))
                          .report.final_running_loss;
        }
        wins += loss[0] < loss[1] ? 1 : 0;
        ++total;
        cells << " u=" << u << ",seed=" << seed << ":" << fmt("%.2f", loss[0]) << "/" << fmt("%.2f", loss[1]);
      }
    }
    const bool pass = running <= 15.0 && wins >= 4;
    return {pass, "running loss (n=5,u=5,N=200,b=1024,20000) = " + fmt("%.4f", running) + " (bound 15); n=5 beats n=7 in " +
                      std::to_string(wins) + "/" + std::to_string(total) + " (need 4);" + cells.str()};
  }

  // 3. Running loss keeps falling between 5000 and 20000 mini-batches.
  Outcome loss_decrease() {
    const auto& h = main_run().result.report.history;
    const double at5k = h[4999].running_loss;
    const double at20k = h.back().running_loss;
    return {at20k < at5k, "running loss at 5000 = " + fmt("%.4f", at5k) + ", at 20000 = " + fmt("%.4f", at20k)};
  }

  // 4. Trigger machine against a brute-force first-hit scan.
  Outcome triggers() {
    const long count = 10000;
    MarketModel model;
    model.vol = 0.3;
    const TimeGrid grid{0.5, 100};
    const PathBatch paths = simulate_paths(model, grid, sample_x0(count, 80.0, 155.0, 1, 77), 78);
    long mismatches = 0, breached_total = 0, checked = 0;
    for (bool at_t0 : {false, true}) {
      for (bool at_maturity : {false, true}) {
        BarrierSpec spec;
        spec.upper = LevelSchedule::constant(150.0);
        spec.monitor_at_t0 = at_t0;
        spec.active_at_maturity = at_maturity;
        std::vector<int> hit(static_cast<std::size_t>(count));
        for (long p = 0; p < count; ++p) {
          std::vector<double> lv;
          for (int i = 0; i <= grid.steps; ++i) lv.push_back(paths.level(p, i));
          hit[static_cast<std::size_t>(p)] = reference::first_hit_upper(lv, 150.0, at_t0, at_maturity).step;
        }
        auto y_at = [count](int i) {
          return Eigen::RowVectorXd(Eigen::RowVectorXd::LinSpaced(count, 0.0, count - 1.0).array() + 1e5 * i);
        };
        TriggerState s = init_triggers(spec, 0.0, paths.levels[0], y_at(0));
        Eigen::RowVectorXd prev_trig = s.trig;
        for (int i = 0; i <= grid.steps; ++i) {
          if (i > 0) {
            prev_trig = s.trig;
            advance_triggers(s, spec, i, grid.steps, grid.time(i), paths.levels[static_cast<std::size_t>(i)], y_at(i));
          }
          for (long p = 0; p < count; ++p) {
            const int k = hit[static_cast<std::size_t>(p)];
            const int j = k >= 0 ? std::min(i, k) : i;
            const bool ok = s.trig(p) == ((k >= 0 && i >= k) ? 1.0 : 0.0) && s.trig(p) >= prev_trig(p) &&
                            s.t_fp(p) == grid.time(j) && s.x_fp(0, p) == paths.level(p, j) &&
                            s.y_fp(p) == static_cast<double>(p) + 1e5 * j;
            mismatches += ok ? 0 : 1;
            ++checked;
          }
        }
        for (long p = 0; p < count; ++p) {
          const int k = hit[static_cast<std::size_t>(p)];
          breached_total += k >= 0 ? 1 : 0;
          mismatches += s.breach_step[static_cast<std::size_t>(p)] == k ? 0 : 1;
        }
      }
    }
    const double share = static_cast<double>(breached_total) / (4.0 * count);
    return {mismatches == 0 && share > 0.1 && share < 0.9,
            std::to_string(mismatches) + " mismatches in " + std::to_string(checked) +
                " (path, step, monitoring) states; breached share " + fmt("%.3f", share)};
  }

  // 5. Taped gradient against central differences on a micro-instance.
  Outcome gradient() {
    MarketModel model;
    model.vol = 0.6;
    const InstrumentSpec instr = base_instrument();
    const TrainConfig cfg = base_train(2, 3, 5, 2, 0, 9);
    const TimeGrid grid{instr.maturity, cfg.steps};
    nn::ModelParams params = initial_params(cfg, model, instr);
    {
      Eigen::VectorXd flat = nn::flatten(params);
      std::mt19937_64 rng(5);
      std::normal_distribution<double> z;
      for (Eigen::Index k = 0; k < flat.size(); ++k) flat(k) += 0.3 * z(rng);
      nn::unflatten(flat, params);
    }
    const PathBatch paths = simulate_paths(model, grid, (Eigen::MatrixXd(1, 2) << 110.0, 146.0).finished(), 4);
    const RiskNeutralGenerator gen(model.rate);
    nn::ModelGrads grads = nn::zero_grads(params);
    nn::Tape tape;
    loss_and_gradient(params, paths, model, grid, instr, gen, grads, tape);
    const Eigen::VectorXd g = nn::flatten(grads);
    const Eigen::VectorXd w = nn::flatten(params);
    auto loss_at = [&](const Eigen::VectorXd& v) {
      nn::ModelParams p = params;
      nn::unflatten(v, p);
      return replication_loss(rollout(p, paths, model, grid, instr, gen), instr, model);
    };
    // Relative error against the larger of the two magnitudes, with an
    // absolute floor at the finite-difference noise level.
    double worst = 0.0;
    Eigen::Index worst_k = 0;
    const double floor = 1e-6 * g.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const double h = 1e-5 * std::max(1.0, std::abs(w(k)));
      Eigen::VectorXd wp = w, wm = w, wp2 = w, wm2 = w;
      wp(k) += h;
      wm(k) -= h;
      wp2(k) += 2 * h;
      wm2(k) -= 2 * h;
      // Fourth-order central difference.
      const double fd = (8 * (loss_at(wp) - loss_at(wm)) - (loss_at(wp2) - loss_at(wm2))) / (12 * h);
      const double rel = std::abs(g(k) - fd) / std::max({std::abs(fd), std::abs(g(k)), floor});
      if (rel > worst) {
        worst = rel;
        worst_k = k;
      }
    }
    return {worst < 1e-4, "max relative error " + fmt("%.3e", worst) + " over " + std::to_string(w.size()) +
                              " parameters (worst index " + std::to_string(worst_k) + ", bound 1e-4)"};
  }

  // 6. Closed form against bridge Monte-Carlo, bridge probability against sub-stepping.
  Outcome oracles() {
    const MarketModel model = base_model();
    const InstrumentSpec instr = base_instrument();
    const TimeGrid grid{instr.maturity, 200};
    bool pass = true;
    std::ostringstream d;
    for (double x0 : {80.0, 100.0, 120.0, 140.0}) {
      McOptions opt;
      opt.paths = 1000000;
      opt.bridge = true;
      opt.seed = 1000 + static_cast<std::uint64_t>(x0);
      const McEstimate mc = mc_price(model, instr, grid, Eigen::VectorXd::Constant(1, x0), opt);
      const double cf = barrier_up_out_call(x0, 100.0, 150.0, model.rate, model.vol, instr.maturity).price;
      const double z = (mc.price - cf) / mc.std_error;
      pass = pass && std::abs(z) < 3.0;
      d << " x0=" << x0 << ": cf " << fmt("%.5f", cf) << " mc " << fmt("%.5f", mc.price) << " z " << fmt("%.2f", z) << ";";
    }
    struct Point {
      double x0, x1, vol, dt;
    };
    for (const Point& pt : {Point{145.0, 148.0, 0.2, 0.01}, Point{140.0, 146.0, 0.3, 0.02}, Point{130.0, 145.0, 0.4, 0.1}}) {
      const auto est = reference::substep_bridge(pt.x0, pt.x1, 150.0, pt.vol, pt.dt, 1000, 200000, 23);
      const double p = bridge_no_breach_prob(pt.x0, pt.x1, 150.0, pt.vol, pt.dt);
      const double z = (est.p - p) / est.se;
      pass = pass && std::abs(z) < 3.0;
      d << " bridge(" << pt.x0 << "->" << pt.x1 << ",vol " << pt.vol << ",dt " << pt.dt << "): " << fmt("%.5f", p)
        << " vs " << fmt("%.5f", est.p) << " z " << fmt("%.2f", z) << ";";
    }
    return {pass, "all within 3 SE:" + d.str()};
  }

  // 7. Hedging PnL on out-of-sample paths.
  Outcome hedging() {
    const MainRun& m = main_run();
    const MarketModel model = base_model();
    const InstrumentSpec instr = base_instrument();
    const TimeGrid grid{instr.maturity, m.cfg.steps};
    const RiskNeutralGenerator gen(model.rate);
    const PathBatch paths = evaluation_paths(m.cfg, model, grid, 10000, 1);
    const auto analytic = hedge_simulate(AnalyticStrategy(model, instr, grid), paths, model, grid, instr, gen);
    const auto learned = hedge_simulate(LearnedStrategy(m.result.params), paths, model, grid, instr, gen);
    write_file(out_ / "pnl_analytic.csv", [&](std::ostream& o) { write_pnl_csv(o, analytic); });
    write_file(out_ / "pnl_learned.csv", [&](std::ostream& o) { write_pnl_csv(o, learned); });
    write_file(out_ / "pnl_histogram.csv",
               [&](std::ostream& o) { write_pnl_histogram_csv(o, learned, analytic, -30.0, 30.0, 120); });
    const PnlStats a = pnl_stats(analytic);
    const PnlStats l = pnl_stats(learned);
    const bool mean_ok = std::abs(a.mean) < 3.0 * a.std_error;
    const bool iqr_ok = l.iqr_5_95 <= 1.5 * a.iqr_5_95;
    const bool tail_ok = l.abs_q999 <= a.abs_q999;
    // For reference only: the closed form taken at the unadjusted barrier.
    AnalyticHedgeOptions plain;
    plain.monitoring_adjusted = false;
    const PnlStats u =
        pnl_stats(hedge_simulate(AnalyticStrategy(model, instr, grid, plain), paths, model, grid, instr, gen));
    return {mean_ok && iqr_ok && tail_ok,
            "analytic mean " + fmt("%.4f", a.mean) + " (3 SE = " + fmt("%.4f", 3.0 * a.std_error) + "); IQR 5-95 learned " +
                fmt("%.4f", l.iqr_5_95) + " vs analytic " + fmt("%.4f", a.iqr_5_95) + " (ratio bound 1.5); |PnL| q99.9 learned " +
                fmt("%.4f", l.abs_q999) + " vs analytic " + fmt("%.4f", a.abs_q999) +
                " [info, unadjusted barrier: mean " + fmt("%.4f", u.mean) + ", IQR " + fmt("%.4f", u.iqr_5_95) + ", q99.9 " +
                fmt("%.4f", u.abs_q999) + "]"};
  }

  // 8. Two full runs with the same config and seed agree bit for bit.
  Outcome reproducibility() {
    const MainRun& m = main_run();
    const auto t0 = std::chrono::steady_clock::now();
    const TrainResult again = train(m.cfg, base_model(), base_instrument(), RiskNeutralGenerator(base_model().rate),
                                    progress_hooks("repeat"));
    note("repeat run " + fmt("%.0f", seconds_since(t0)) + " s");
    const auto& h1 = m.result.report.history;
    const auto& h2 = again.report.history;
    bool same_history = h1.size() == h2.size();
    for (std::size_t k = 0; same_history && k < h1.size(); ++k) {
      same_history = h1[k].step == h2[k].step && h1[k].loss == h2[k].loss && h1[k].loss_std == h2[k].loss_std &&
                     h1[k].running_loss == h2[k].running_loss;
    }
    const std::string c1 = nn::serialize_checkpoint({m.result.params, m.cfg.seed, m.cfg.mini_batches, {}});
    const std::string c2 = nn::serialize_checkpoint({again.params, m.cfg.seed, m.cfg.mini_batches, {}});
    return {same_history && c1 == c2, std::string("loss histories ") + (same_history ? "identical" : "differ") + " (" +
                                          std::to_string(h1.size()) + " records); checkpoints " +
                                          (c1 == c2 ? "identical" : "differ") + " (" + std::to_string(c1.size()) + " bytes)"};
  }

  // 9. Zero-vol limits.
  Outcome zero_vol() {
    MarketModel model;
    model.vol = 0.0;
    const InstrumentSpec instr = base_instrument();
    const TimeGrid grid{instr.maturity, 200};
    const double growth = std::pow(1.0 + model.rate * grid.dt(), grid.steps);
    double worst = 0.0;
    auto rel = [&worst](double got, double want) {
      worst = std::max(worst, std::abs(got - want) / std::max(std::abs(want), 1e-300));
    };

    const Eigen::MatrixXd x0 = sample_x0(64, 50.0, 140.0, 1, 3);
    const PathBatch paths = simulate_paths(model, grid, x0, 4);
    for (Eigen::Index p = 0; p < 64; ++p) {
      double x = x0(0, p);
      for (int i = 1; i <= grid.steps; ++i) {
        x = x + model.rate * x * grid.dt();
        rel(paths.level(p, i), x);
      }
      rel(paths.level(p, grid.steps), x0(0, p) * growth);
    }

    // Zero hedge: Y compounds at the generator rate whatever the noise.
    const TrainConfig cfg = base_train(2, 3, grid.steps, 64, 0, 11);
    nn::ModelParams params = initial_params(cfg, model, instr);
    for (auto& net : params.pi_nets) net = nn::zeros_like(net);
    const RiskNeutralGenerator gen(model.rate);
    for (double vol : {0.0, 0.2}) {
      MarketModel mv = model;
      mv.vol = vol;
      const PathBatch pv = simulate_paths(mv, grid, sample_x0(64, 50.0, 140.0, 1, 5), 6);
      const RolloutResult r = rollout(params, pv, mv, grid, instr, gen, true);
      for (Eigen::Index p = 0; p < 64; ++p) {
        double y = r.y_trace.front()(p);
        for (int i = 1; i <= grid.steps; ++i) {
          y = y + model.rate * y * grid.dt();
          rel(r.y_trace[static_cast<std::size_t>(i)](p), y);
        }
        rel(r.y_trace.back()(p), r.y_trace.front()(p) * growth);
      }
    }

    // Vanilla call as vol goes to zero: max(x - K exp(-rT), 0).
    for (double x : {60.0, 90.0, 110.0, 140.0}) {
      for (double vol : {0.0, 1e-9, 1e-12}) {
        const double want = std::max(x - 100.0 * std::exp(-0.05 * 0.5), 0.0);
        const double got = bs_vanilla(x, 100.0, 0.05, vol, 0.5).price;
        if (want == 0.0) {
          worst = std::max(worst, std::abs(got));
        } else {
          rel(got, want);
        }
      }
    }
    return {worst <= 1e-12, "max relative deviation " + fmt("%.3e", worst) + " (bound 1e-12)"};
  }

 private:
  fs::path out_;
  std::optional<MainRun> main_;
};

}  // namespace

int main(int argc, char** argv) {
  fs::path out = "acceptance_out";
  std::set<int> only;
  for (int k = 1; k < argc; ++k) {
    const std::string a = argv[k];
    if (a == "--out-dir" && k + 1 < argc) {
      out = argv[++k];
    } else if (a == "--only" && k + 1 < argc) {
      std::stringstream ss(argv[++k]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: acceptance [--out-dir DIR] [--only 1,2,...]\n";
      return 2;
    }
  }

  Suite suite(out);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"pricing accuracy", [&] { return suite.pricing_accuracy(); }},
      {"loss magnitude", [&] { return suite.loss_magnitude(); }},
      {"loss decrease", [&] { return suite.loss_decrease(); }},
      {"trigger state machine", [&] { return suite.triggers(); }},
      {"gradient correctness", [&] { return suite.gradient(); }},
      {"oracle cross-validation", [&] { return suite.oracles(); }},
      {"hedging PnL", [&] { return suite.hedging(); }},
      {"reproducibility", [&] { return suite.reproducibility(); }},
      {"zero-vol degeneracies", [&] { return suite.zero_vol(); }},
  };
  // Cheap criteria first so their results show up before the long runs.
  const std::vector<int> order = {9, 5, 4, 6, 1, 3, 7, 8, 2};
  int failed = 0;
  for (int id : order) {
    if (!only.empty() && !only.count(id)) continue;
    const auto& [name, fn] = criteria[static_cast<std::size_t>(id) - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << " ("
              << fmt("%.1f", seconds_since(t0)) << " s)" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
