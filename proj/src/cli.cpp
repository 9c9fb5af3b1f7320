#include "deepbarrier/cli.hpp"

#include "deepbarrier/config.hpp"
#include "deepbarrier/csv.hpp"
#include "deepbarrier/errors.hpp"
#include "deepbarrier/evaluation.hpp"
#include "deepbarrier/nn/checkpoint.hpp"
#include "deepbarrier/oracles.hpp"
#include "deepbarrier/random.hpp"
#include "deepbarrier/trainer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace deepbarrier {

namespace fs = std::filesystem;

namespace {

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

/// Config sources shared by every subcommand: defaults, then a checkpoint's
/// or manifest's stored config, then --config, then individual flags.
struct ConfigOptions {
  std::string config_path;
  std::string manifest_path;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "YAML config file")->check(CLI::ExistingFile);
    app.add_option("--from-manifest", manifest_path, "reuse the config stored in a run manifest")
        ->check(CLI::ExistingFile);
    for (const auto& key : config_keys()) {
      options[key] = app.add_option("--" + dashed(key), values[key], "config key " + key);
    }
  }

  RunConfig resolve(const std::string& stored_text = {}) const {
    std::string text = stored_text;
    if (!manifest_path.empty()) {
      std::ifstream in(manifest_path);
      std::stringstream ss;
      ss << in.rdbuf();
      text = RunManifest::from_json(ss.str()).config_text;
    }
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) overrides.emplace_back(key, values.at(key));
    }
    return parse_config(text, overrides);
  }
};

/// Collects outputs and writes <command>_manifest.json at the end.
class Run {
 public:
  Run(std::string command, const RunConfig& cfg) : dir_(resolve_out_dir(cfg)) {
    fs::create_directories(dir_);
    manifest_.command = std::move(command);
    manifest_.version = library_version();
    manifest_.config_text = dump_config(cfg);
    manifest_.config_hash = config_hash(cfg);
    manifest_.master_seed = cfg.train.seed;
    manifest_.eval_seed = cfg.eval_seed;
    manifest_.started_at = utc_timestamp();
  }

  const fs::path& dir() const { return dir_; }

  template <class Fn>
  fs::path write(const std::string& name, Fn&& fn) {
    const fs::path path = dir_ / name;
    {
      std::ofstream out(path, std::ios::binary);
      if (!out) throw ValidationError("cannot write " + path.string());
      fn(out);
    }
    manifest_.add_output(path);
    return path;
  }

  void add_existing(const fs::path& path) { manifest_.add_output(path); }

  fs::path finish() {
    manifest_.finished_at = utc_timestamp();
    const fs::path path = dir_ / (manifest_.command + "_manifest.json");
    std::ofstream out(path, std::ios::binary);
    out << manifest_.to_json();
    return path;
  }

 private:
  fs::path dir_;
  RunManifest manifest_;
};

void print_kv(std::ostream& out, const std::string& key, double v) { out << key << ": " << format_double(v) << '\n'; }
void print_kv(std::ostream& out, const std::string& key, const std::string& v) { out << key << ": " << v << '\n'; }

void print_pnl(std::ostream& out, const std::string& prefix, const PnlStats& s) {
  print_kv(out, prefix + "_paths", static_cast<double>(s.count));
  print_kv(out, prefix + "_mean", s.mean);
  print_kv(out, prefix + "_std_error", s.std_error);
  print_kv(out, prefix + "_std_dev", s.std_dev);
  print_kv(out, prefix + "_q05", s.q05);
  print_kv(out, prefix + "_q95", s.q95);
  print_kv(out, prefix + "_iqr_5_95", s.iqr_5_95);
  print_kv(out, prefix + "_abs_q999", s.abs_q999);
  print_kv(out, prefix + "_breached_fraction", s.breached_fraction);
}

struct Loaded {
  std::optional<nn::Checkpoint> checkpoint;
  RunConfig cfg;
};

Loaded load_inputs(const ConfigOptions& co, const std::string& checkpoint_path) {
  Loaded l;
  std::string stored;
  if (!checkpoint_path.empty()) {
    l.checkpoint = nn::load_checkpoint(checkpoint_path);
    stored = l.checkpoint->config_text;
  }
  l.cfg = co.resolve(stored);
  if (l.checkpoint && l.checkpoint->params.steps() != l.cfg.train.steps) {
    throw ValidationError("steps must match the checkpoint (" + std::to_string(l.checkpoint->params.steps()) + ")");
  }
  return l;
}

int cmd_train(const ConfigOptions& co, long progress, std::ostream& out, std::ostream& err) {
  RunConfig cfg = co.resolve();
  Run run("train", cfg);
  if (cfg.train.checkpoint_stride > 0) cfg.train.checkpoint_dir = run.dir();
  const std::string config_text = dump_config(cfg);
  run.write("config.yaml", [&](std::ostream& o) { o << config_text; });

  TrainHooks hooks;
  hooks.config_text = config_text;
  hooks.progress_stride = progress;
  hooks.progress = [&err](const LossRecord& r) {
    err << "mini_batch " << r.step << " loss " << format_double(r.loss) << " running " << format_double(r.running_loss)
        << '\n';
  };
  const RiskNeutralGenerator gen(cfg.model.rate);
  const TrainResult res = train(cfg.train, cfg.model, cfg.instrument, gen, hooks);

  for (const auto& p : res.report.checkpoints) run.add_existing(p);
  run.write("loss_history.csv", [&](std::ostream& o) { write_loss_history_csv(o, res.report.history); });
  const nn::Checkpoint ckpt{res.params, cfg.train.seed, cfg.train.mini_batches, config_text};
  const fs::path ckpt_path = run.write("checkpoint.bin", [&](std::ostream& o) { o << nn::serialize_checkpoint(ckpt); });

  std::ostringstream report;
  print_kv(report, "mini_batches", static_cast<double>(res.report.mini_batches));
  print_kv(report, "final_loss", res.report.final_loss);
  print_kv(report, "final_running_loss", res.report.final_running_loss);
  print_kv(report, "parameters", static_cast<double>(res.params.parameter_count()));
  print_kv(report, "config_hash", config_hash(cfg));
  if (analytic_supported(cfg.model, cfg.instrument)) {
    const double x0 = cfg.train.x0_fixed.value_or(0.5 * (cfg.train.x0_low + cfg.train.x0_high));
    const auto grid = y0_grid_compare(res.params, cfg.model, cfg.instrument, {x0});
    print_kv(report, "y0_at_" + format_double(x0), grid.front().learned);
    print_kv(report, "analytic_at_" + format_double(x0), grid.front().analytic);
  }
  run.write("train_report.txt", [&](std::ostream& o) { o << report.str(); });
  out << report.str();
  print_kv(out, "wall_seconds", res.report.wall_seconds);
  print_kv(out, "checkpoint", ckpt_path.string());
  print_kv(out, "manifest", run.finish().string());
  return kExitOk;
}

int cmd_price(const ConfigOptions& co, const std::string& checkpoint_path, const std::vector<double>& x0s,
              std::ostream& out) {
  const Loaded l = load_inputs(co, checkpoint_path);
  Run run("price", l.cfg);
  const std::vector<double> points = x0s.empty() ? std::vector<double>{100.0} : x0s;
  const auto rows = y0_grid_compare(l.checkpoint->params, l.cfg.model, l.cfg.instrument, points);
  for (const auto& r : rows) {
    out << "- x0: " << format_double(r.x0) << "\n  learned: " << format_double(r.learned)
        << "\n  analytic: " << format_double(r.analytic) << "\n  diff: " << format_double(r.diff) << '\n';
  }
  run.write("price.csv", [&](std::ostream& o) { write_y0_grid_csv(o, rows); });
  run.finish();
  return kExitOk;
}

struct HedgeOutputs {
  std::vector<PnlRecord> learned;
  std::vector<PnlRecord> analytic;
};

HedgeOutputs run_hedges(const Loaded& l, bool want_learned, bool want_analytic, Run& run, std::ostream& out) {
  const RunConfig& cfg = l.cfg;
  const TimeGrid grid{cfg.instrument.maturity, cfg.train.steps};
  const RiskNeutralGenerator gen(cfg.model.rate);
  const PathBatch paths = evaluation_paths(cfg.train, cfg.model, grid, cfg.eval_paths, cfg.eval_seed);
  HedgeOutputs h;
  if (want_learned) {
    if (!l.checkpoint) throw ValidationError("learned hedge requires --checkpoint");
    h.learned = hedge_simulate(LearnedStrategy(l.checkpoint->params), paths, cfg.model, grid, cfg.instrument, gen);
    run.write("pnl_learned.csv", [&](std::ostream& o) { write_pnl_csv(o, h.learned); });
    print_pnl(out, "learned", pnl_stats(h.learned));
  }
  if (want_analytic) {
    const AnalyticStrategy strategy(cfg.model, cfg.instrument, grid, cfg.hedge);
    h.analytic = hedge_simulate(strategy, paths, cfg.model, grid, cfg.instrument, gen);
    run.write("pnl_analytic.csv", [&](std::ostream& o) { write_pnl_csv(o, h.analytic); });
    print_pnl(out, "analytic", pnl_stats(h.analytic));
  }
  run.write("pnl_histogram.csv",
            [&](std::ostream& o) { write_pnl_histogram_csv(o, h.learned, h.analytic, -30.0, 30.0, 120); });
  return h;
}

int cmd_hedge(const ConfigOptions& co, const std::string& checkpoint_path, const std::string& source,
              std::ostream& out) {
  const Loaded l = load_inputs(co, checkpoint_path);
  Run run("hedge", l.cfg);
  const bool closed_form = analytic_supported(l.cfg.model, l.cfg.instrument);
  bool learned = source == "learned" || source == "both";
  bool analytic = source == "analytic" || source == "both";
  if (source == "auto") {
    learned = l.checkpoint.has_value();
    analytic = closed_form;
  }
  if (!learned && !analytic) throw ValidationError("no hedge source available for this instrument");
  run_hedges(l, learned, analytic, run, out);
  print_kv(out, "manifest", run.finish().string());
  return kExitOk;
}

int cmd_evaluate(const ConfigOptions& co, const std::string& checkpoint_path, const std::string& loss_history,
                 std::ostream& out) {
  const Loaded l = load_inputs(co, checkpoint_path);
  const RunConfig& cfg = l.cfg;
  Run run("evaluate", cfg);
  const TimeGrid grid{cfg.instrument.maturity, cfg.train.steps};
  const RiskNeutralGenerator gen(cfg.model.rate);
  const auto& params = l.checkpoint->params;
  const bool closed_form = analytic_supported(cfg.model, cfg.instrument);

  if (cfg.model.dim == 1) {
    const auto y0 = y0_grid_compare(params, cfg.model, cfg.instrument, linspace(50.0, 150.0, 1.0));
    run.write("y0_grid.csv", [&](std::ostream& o) { write_y0_grid_csv(o, y0); });
    if (closed_form) {
      std::vector<Y0Record> acceptance_grid;
      for (const auto& r : y0) {
        if (r.x0 >= 55.0 && r.x0 <= 145.0 && static_cast<long>(r.x0) % 5 == 0) acceptance_grid.push_back(r);
      }
      print_kv(out, "y0_mean_abs_diff_55_145", mean_abs_diff(acceptance_grid));
      print_kv(out, "y0_max_abs_diff_50_150", max_abs_diff(y0));
    }
    std::vector<int> steps;
    for (int i = 0; i < cfg.train.steps; i += std::max(1, cfg.train.steps / 20)) steps.push_back(i);
    const auto surface = delta_surface(params, cfg.model, cfg.instrument, grid, steps, linspace(50.0, 150.0, 1.0));
    run.write("delta_surface.csv", [&](std::ostream& o) { write_delta_surface_csv(o, surface); });
  }

  const PathBatch paths = evaluation_paths(cfg.train, cfg.model, grid, cfg.eval_paths, cfg.eval_seed);
  const auto scatter = payoff_scatter(params, paths, cfg.model, grid, cfg.instrument, gen);
  run.write("payoff_scatter.csv", [&](std::ostream& o) { write_scatter_csv(o, scatter); });
  run_hedges(l, true, closed_form, run, out);

  if (!loss_history.empty()) {
    std::ifstream in(loss_history, std::ios::binary);
    if (!in) throw ValidationError("cannot read loss history " + loss_history);
    run.write("loss_history.csv", [&](std::ostream& o) { o << in.rdbuf(); });
  }
  print_kv(out, "manifest", run.finish().string());
  return kExitOk;
}

int cmd_oracle(const ConfigOptions& co, const std::vector<double>& x0s, long mc_paths, bool grid_csv,
               std::ostream& out) {
  const RunConfig cfg = co.resolve();
  Run run("oracle", cfg);
  const TimeGrid grid{cfg.instrument.maturity, cfg.train.steps};
  const bool closed_form = analytic_supported(cfg.model, cfg.instrument);
  const std::vector<double> points = x0s.empty() ? std::vector<double>{100.0} : x0s;
  const double upper = cfg.instrument.barrier.upper ? cfg.instrument.barrier.upper->at(0.0) : 0.0;
  const bool bridge_ok = cfg.instrument.barrier.basket_weights.empty() &&
                         (!cfg.instrument.barrier.upper || cfg.instrument.barrier.upper->is_constant()) &&
                         (!cfg.instrument.barrier.lower || cfg.instrument.barrier.lower->is_constant()) &&
                         !(cfg.instrument.barrier.needs_upper() && cfg.instrument.barrier.needs_lower());
  for (double x0 : points) {
    out << "- x0: " << format_double(x0) << '\n';
    if (cfg.model.dim == 1) {
      const auto v = bs_vanilla(x0, cfg.instrument.strike, cfg.model.rate, cfg.model.vol, cfg.instrument.maturity,
                                cfg.instrument.option);
      out << "  vanilla_price: " << format_double(v.price) << "\n  vanilla_delta: " << format_double(v.delta) << '\n';
    }
    if (closed_form) {
      const auto b = barrier_up_out_call(x0, cfg.instrument.strike, upper, cfg.model.rate, cfg.model.vol,
                                         cfg.instrument.maturity, cfg.instrument.barrier.rebate);
      out << "  barrier_price: " << format_double(b.price) << "\n  barrier_delta: " << format_double(b.delta) << '\n';
    }
    if (mc_paths > 0) {
      McOptions opt;
      opt.paths = mc_paths;
      opt.seed = cfg.eval_seed;
      const Eigen::VectorXd spot = Eigen::VectorXd::Constant(cfg.model.dim, x0);
      const auto d = mc_price(cfg.model, cfg.instrument, grid, spot, opt);
      out << "  mc_discrete_price: " << format_double(d.price) << "\n  mc_discrete_se: " << format_double(d.std_error)
          << '\n';
      if (bridge_ok && cfg.model.dim == 1) {
        opt.bridge = true;
        const auto c = mc_price(cfg.model, cfg.instrument, grid, spot, opt);
        out << "  mc_bridge_price: " << format_double(c.price) << "\n  mc_bridge_se: " << format_double(c.std_error)
            << '\n';
      }
    }
  }
  if (grid_csv && closed_form) {
    run.write("oracle_grid.csv", [&](std::ostream& o) {
      CsvWriter w(o, {"x0", "vanilla_price", "vanilla_delta", "barrier_price", "barrier_delta"});
      for (double x0 : linspace(50.0, 150.0, 1.0)) {
        const auto v = bs_vanilla(x0, cfg.instrument.strike, cfg.model.rate, cfg.model.vol, cfg.instrument.maturity);
        const auto b = barrier_up_out_call(x0, cfg.instrument.strike, upper, cfg.model.rate, cfg.model.vol,
                                           cfg.instrument.maturity, cfg.instrument.barrier.rebate);
        w << x0 << v.price << v.delta << b.price << b.delta;
        w.end_row();
      }
    });
  }
  run.finish();
  return kExitOk;
}

std::vector<long> parse_list(const std::string& text, const std::string& name) {
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stol(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(name + " must be a comma-separated list of integers");
    }
  }
  if (out.empty()) throw ValidationError(name + " must not be empty");
  return out;
}

int cmd_sweep(const ConfigOptions& co, const std::string& layers, const std::string& units, const std::string& steps,
              const std::string& batches, long progress, std::ostream& out, std::ostream& err) {
  RunConfig cfg = co.resolve();
  if (co.options.at("mini_batches")->count() == 0) cfg.train.mini_batches = 2000;
  Run run("sweep", cfg);
  const RiskNeutralGenerator gen(cfg.model.rate);
  struct Cell {
    long n, u, steps, batch;
    double loss, running;
  };
  std::vector<Cell> cells;
  for (long n : parse_list(layers, "layers-list")) {
    for (long u : parse_list(units, "units-list")) {
      for (long steps_n : parse_list(steps, "steps-list")) {
        for (long b : parse_list(batches, "batch-list")) {
          TrainConfig tc = cfg.train;
          tc.layers = static_cast<int>(n);
          tc.units = static_cast<int>(u);
          tc.steps = static_cast<int>(steps_n);
          tc.batch = b;
          TrainHooks hooks;
          hooks.progress_stride = progress;
          hooks.progress = [&](const LossRecord& r) {
            err << "cell n=" << n << " u=" << u << " N=" << steps_n << " b=" << b << " mini_batch " << r.step
                << " running " << format_double(r.running_loss) << '\n';
          };
          const auto res = train(tc, cfg.model, cfg.instrument, gen, hooks);
          cells.push_back({n, u, steps_n, b, res.report.final_loss, res.report.final_running_loss});
          out << "n=" << n << " u=" << u << " N=" << steps_n << " b=" << b
              << " running_loss=" << format_double(res.report.final_running_loss) << '\n';
        }
      }
    }
  }
  run.write("sweep.csv", [&](std::ostream& o) {
    CsvWriter w(o, {"layers", "units", "steps", "batch", "mini_batches", "final_loss", "running_loss"});
    for (const auto& c : cells) {
      w << c.n << c.u << c.steps << c.batch << cfg.train.mini_batches << c.loss << c.running;
      w.end_row();
    }
  });
  print_kv(out, "manifest", run.finish().string());
  return kExitOk;
}

int cmd_demo_triggers(const ConfigOptions& co, long paths_n, std::ostream& out) {
  RunConfig cfg = co.resolve();
  if (co.options.at("steps")->count() == 0) cfg.train.steps = 400;
  if (co.options.at("x0_fixed")->count() == 0) cfg.train.x0_fixed = 100.0;
  if (paths_n < 1) throw ValidationError("paths must be >= 1");
  Run run("demo-triggers", cfg);
  const TimeGrid grid{cfg.instrument.maturity, cfg.train.steps};
  const Eigen::MatrixXd x0 = fixed_x0(paths_n, Eigen::VectorXd::Constant(cfg.model.dim, *cfg.train.x0_fixed));
  const PathBatch paths = simulate_paths(cfg.model, grid, x0, derive_seed(cfg.train.seed, "demo-triggers"));
  run.write("paths.csv", [&](std::ostream& o) { write_paths_csv(o, paths, grid); });
  run.write("triggers.csv",
            [&](std::ostream& o) { write_trigger_trace_csv(o, paths, grid, cfg.instrument.barrier); });
  long breached = 0;
  const BarrierSpec spec = effective_barrier(cfg.instrument.barrier, cfg.model.vol, grid.dt());
  TriggerState s = init_triggers(spec, 0.0, paths.levels[0], Eigen::RowVectorXd::Zero(paths_n));
  for (int i = 0; i < grid.steps; ++i) {
    advance_triggers(s, spec, i + 1, grid.steps, grid.time(i + 1), paths.levels[static_cast<std::size_t>(i) + 1],
                     Eigen::RowVectorXd::Zero(paths_n));
  }
  for (Eigen::Index p = 0; p < paths_n; ++p) breached += s.trig(p) != 0.0 ? 1 : 0;
  print_kv(out, "paths", static_cast<double>(paths_n));
  print_kv(out, "breached", static_cast<double>(breached));
  print_kv(out, "manifest", run.finish().string());
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep BSDE pricing and hedging of barrier options", "deepbarrier"};
  app.require_subcommand(1);
  app.set_version_flag("--version", library_version());

  auto add = [&app](const std::string& name, const std::string& help) {
    auto cmd = std::make_unique<ConfigOptions>();
    CLI::App* sub = app.add_subcommand(name, help);
    cmd->attach(*sub);
    return std::make_pair(sub, std::move(cmd));
  };

  auto [train_cmd, train_opts] = add("train", "train the networks and write a checkpoint");
  long progress = 1000;
  train_cmd->add_option("--progress", progress, "report every k mini-batches on stderr (0: quiet)");

  auto [price_cmd, price_opts] = add("price", "learned and closed-form price at given levels");
  std::string checkpoint;
  std::vector<double> x0s;
  price_cmd->add_option("--checkpoint", checkpoint, "trained checkpoint")->required()->check(CLI::ExistingFile);
  price_cmd->add_option("--x0", x0s, "initial level(s)");

  auto [hedge_cmd, hedge_opts] = add("hedge", "discrete hedging PnL with learned and/or analytic deltas");
  std::string source = "auto";
  hedge_cmd->add_option("--checkpoint", checkpoint, "trained checkpoint")->check(CLI::ExistingFile);
  hedge_cmd->add_option("--source", source, "learned, analytic, both or auto")
      ->check(CLI::IsMember({"learned", "analytic", "both", "auto"}));

  auto [eval_cmd, eval_opts] = add("evaluate", "plot-ready CSVs for a trained checkpoint");
  std::string loss_history;
  eval_cmd->add_option("--checkpoint", checkpoint, "trained checkpoint")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--loss-history", loss_history, "loss history CSV to copy into the outputs");

  auto [oracle_cmd, oracle_opts] = add("oracle", "closed-form quotes and Monte-Carlo references");
  long mc_paths = 0;
  bool grid_csv = false;
  oracle_cmd->add_option("--x0", x0s, "initial level(s)");
  oracle_cmd->add_option("--mc-paths", mc_paths, "Monte-Carlo paths (0: skip)");
  oracle_cmd->add_flag("--grid-csv", grid_csv, "write closed-form quotes over x0 in [50, 150]");

  auto [sweep_cmd, sweep_opts] = add("sweep", "loss table over layers, units, steps and batch size");
  std::string layers_list = "3,5,7", units_list = "3,5", steps_list = "50,100,200", batch_list = "256,512,1024";
  sweep_cmd->add_option("--layers-list", layers_list, "hidden layer counts");
  sweep_cmd->add_option("--units-list", units_list, "units per layer");
  sweep_cmd->add_option("--steps-list", steps_list, "time step counts");
  sweep_cmd->add_option("--batch-list", batch_list, "batch sizes");
  sweep_cmd->add_option("--progress", progress, "report every k mini-batches on stderr (0: quiet)");

  auto [demo_cmd, demo_opts] = add("demo-triggers", "trigger-variable traces on a few paths");
  long demo_paths = 5;
  demo_cmd->add_option("--paths", demo_paths, "number of paths");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(*train_opts, progress, out, err);
    if (*price_cmd) return cmd_price(*price_opts, checkpoint, x0s, out);
    if (*hedge_cmd) return cmd_hedge(*hedge_opts, checkpoint, source, out);
    if (*eval_cmd) return cmd_evaluate(*eval_opts, checkpoint, loss_history, out);
    if (*oracle_cmd) return cmd_oracle(*oracle_opts, x0s, mc_paths, grid_csv, out);
    if (*sweep_cmd) {
      return cmd_sweep(*sweep_opts, layers_list, units_list, steps_list, batch_list, progress, out, err);
    }
    if (*demo_cmd) return cmd_demo_triggers(*demo_opts, demo_paths, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericFault& e) {
    err << "numeric fault at step " << e.step() << ": " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace deepbarrier
