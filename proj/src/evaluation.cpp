#include "deepbarrier/evaluation.hpp"

#include "deepbarrier/csv.hpp"
#include "deepbarrier/errors.hpp"
#include "deepbarrier/oracles.hpp"
#include "deepbarrier/random.hpp"
#include "deepbarrier/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace deepbarrier {

bool analytic_supported(const MarketModel& model, const InstrumentSpec& instr) {
  const BarrierSpec& b = instr.barrier;
  return model.dim == 1 && instr.option == OptionType::Call && b.kind == BarrierKind::UpOut && b.upper &&
         b.upper->is_constant() && !b.lower && b.basket_weights.empty() && !b.shift_correction;
}

AnalyticStrategy::AnalyticStrategy(const MarketModel& model, const InstrumentSpec& instr, const TimeGrid& grid,
                                   AnalyticHedgeOptions options)
    : strike_(instr.strike),
      rate_(model.rate),
      vol_(model.vol),
      maturity_(instr.maturity),
      rebate_(instr.barrier.rebate),
      barrier_(0.0),
      clip_(options.delta_clip) {
  if (!analytic_supported(model, instr)) {
    throw ValidationError("analytic hedge needs a single-asset up-and-out call with a constant barrier");
  }
  if (!(clip_ > 0.0)) throw ValidationError("delta_clip must be > 0");
  const double u = instr.barrier.upper->levels.front();
  barrier_ = options.monitoring_adjusted ? discretely_monitored_upper(u, vol_, grid.dt()) : u;
}

Eigen::RowVectorXd AnalyticStrategy::initial_value(const Eigen::MatrixXd& x0) const {
  Eigen::RowVectorXd y(x0.cols());
  for (Eigen::Index p = 0; p < x0.cols(); ++p) {
    y(p) = barrier_up_out_call(x0(0, p), strike_, barrier_, rate_, vol_, maturity_, rebate_).price;
  }
  return y;
}

Eigen::MatrixXd AnalyticStrategy::delta(int /*step*/, double t, const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd d(1, x.cols());
  for (Eigen::Index p = 0; p < x.cols(); ++p) {
    const double raw = barrier_up_out_call(x(0, p), strike_, barrier_, rate_, vol_, maturity_ - t, rebate_).delta;
    d(0, p) = std::clamp(raw, -clip_, clip_);
  }
  return d;
}

std::vector<PnlRecord> hedge_simulate(const HedgeStrategy& strategy, const PathBatch& paths,
                                      const MarketModel& model, const TimeGrid& grid, const InstrumentSpec& instr,
                                      const Generator& gen) {
  const RolloutResult r = rollout(strategy, paths, model, grid, instr, gen);
  const Eigen::RowVectorXd g = terminal_payoffs(r, instr, model);
  std::vector<PnlRecord> out(static_cast<std::size_t>(g.size()));
  for (Eigen::Index p = 0; p < g.size(); ++p) {
    PnlRecord& rec = out[static_cast<std::size_t>(p)];
    rec.path = p;
    rec.breached = r.breached(p) != 0.0;
    rec.breach_step = rec.breached ? r.breach_step[static_cast<std::size_t>(p)] : grid.steps;
    rec.x0 = paths.levels[0](0, p);
    rec.value = r.y_fp(p);
    rec.payoff = g(p);
    rec.pnl = rec.value - rec.payoff;
    if (!std::isfinite(rec.pnl)) throw NumericFault("non-finite hedging PnL", rec.breach_step);
  }
  return out;
}

PathBatch evaluation_paths(const TrainConfig& cfg, const MarketModel& model, const TimeGrid& grid, long count,
                           std::uint64_t eval_seed) {
  const std::uint64_t root = derive_seed(cfg.seed, "evaluation", eval_seed);
  const Eigen::MatrixXd x0 =
      cfg.x0_fixed ? fixed_x0(count, Eigen::VectorXd::Constant(model.dim, *cfg.x0_fixed))
                   : sample_x0(count, cfg.x0_low, cfg.x0_high, model.dim, derive_seed(root, "x0"));
  return simulate_paths(model, grid, x0, derive_seed(root, "paths"));
}

PnlStats pnl_stats(const std::vector<PnlRecord>& records) {
  PnlStats s;
  if (records.empty()) return s;
  Eigen::VectorXd v(static_cast<Eigen::Index>(records.size()));
  std::vector<double> pnl, abs_pnl;
  pnl.reserve(records.size());
  abs_pnl.reserve(records.size());
  long breached = 0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    v(static_cast<Eigen::Index>(k)) = records[k].pnl;
    pnl.push_back(records[k].pnl);
    abs_pnl.push_back(std::abs(records[k].pnl));
    breached += records[k].breached ? 1 : 0;
  }
  const Summary sum = summarize(v);
  s.count = sum.count;
  s.mean = sum.mean;
  s.std_error = sum.std_error;
  s.std_dev = sum.std_dev;
  s.q05 = quantile(pnl, 0.05);
  s.q95 = quantile(pnl, 0.95);
  s.iqr_5_95 = s.q95 - s.q05;
  s.abs_q999 = quantile(abs_pnl, 0.999);
  s.breached_fraction = static_cast<double>(breached) / static_cast<double>(records.size());
  return s;
}

std::vector<ScatterRecord> payoff_scatter(const nn::ModelParams& params, const PathBatch& paths,
                                          const MarketModel& model, const TimeGrid& grid,
                                          const InstrumentSpec& instr, const Generator& gen) {
  const RolloutResult r = rollout(params, paths, model, grid, instr, gen);
  const Eigen::RowVectorXd g = terminal_payoffs(r, instr, model);
  std::vector<ScatterRecord> out(static_cast<std::size_t>(g.size()));
  for (Eigen::Index p = 0; p < g.size(); ++p) {
    out[static_cast<std::size_t>(p)] = {p, r.breached(p) != 0.0, monitored_level(instr.barrier, r.x_fp.col(p)),
                                        r.y_fp(p), g(p)};
  }
  return out;
}

std::vector<Y0Record> y0_grid_compare(const nn::ModelParams& params, const MarketModel& model,
                                      const InstrumentSpec& instr, const std::vector<double>& x0_grid) {
  const bool closed_form = analytic_supported(model, instr);
  std::vector<Y0Record> out;
  out.reserve(x0_grid.size());
  for (double x0 : x0_grid) {
    Y0Record rec;
    rec.x0 = x0;
    rec.learned = price(params, Eigen::VectorXd::Constant(1, x0));
    rec.analytic = closed_form ? barrier_up_out_call(x0, instr.strike, instr.barrier.upper->levels.front(),
                                                     model.rate, model.vol, instr.maturity, instr.barrier.rebate)
                                     .price
                               : std::numeric_limits<double>::quiet_NaN();
    rec.diff = rec.learned - rec.analytic;
    out.push_back(rec);
  }
  return out;
}

double mean_abs_diff(const std::vector<Y0Record>& records) {
  if (records.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : records) s += std::abs(r.diff);
  return s / static_cast<double>(records.size());
}

double max_abs_diff(const std::vector<Y0Record>& records) {
  double m = 0.0;
  for (const auto& r : records) m = std::max(m, std::abs(r.diff));
  return m;
}

std::vector<DeltaRecord> delta_surface(const nn::ModelParams& params, const MarketModel& model,
                                       const InstrumentSpec& instr, const TimeGrid& grid,
                                       const std::vector<int>& steps, const std::vector<double>& x_grid) {
  if (model.dim != 1) throw ValidationError("delta surface is defined for a single asset");
  const bool closed_form = analytic_supported(model, instr);
  Eigen::MatrixXd x(1, static_cast<Eigen::Index>(x_grid.size()));
  for (std::size_t k = 0; k < x_grid.size(); ++k) x(0, static_cast<Eigen::Index>(k)) = x_grid[k];
  std::vector<DeltaRecord> out;
  for (int i : steps) {
    if (i < 0 || i >= params.steps()) throw ValidationError("delta surface step out of range");
    const Eigen::MatrixXd pi = nn::forward(params.pi_nets[static_cast<std::size_t>(i)], x);
    const double t = grid.time(i);
    for (std::size_t k = 0; k < x_grid.size(); ++k) {
      DeltaRecord rec{i, t, x_grid[k], pi(0, static_cast<Eigen::Index>(k)), std::numeric_limits<double>::quiet_NaN()};
      if (closed_form) {
        rec.analytic = barrier_up_out_call(x_grid[k], instr.strike, instr.barrier.upper->levels.front(), model.rate,
                                           model.vol, instr.maturity - t, instr.barrier.rebate)
                           .delta;
      }
      out.push_back(rec);
    }
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw ValidationError("grid needs step > 0 and hi >= lo");
  std::vector<double> out;
  const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
  return out;
}

void write_pnl_csv(std::ostream& out, const std::vector<PnlRecord>& records) {
  CsvWriter w(out, {"path", "breached", "breach_step", "x0", "value", "payoff", "pnl"});
  for (const auto& r : records) {
    w << r.path << static_cast<long>(r.breached) << r.breach_step << r.x0 << r.value << r.payoff << r.pnl;
    w.end_row();
  }
}

void write_pnl_histogram_csv(std::ostream& out, const std::vector<PnlRecord>& learned,
                             const std::vector<PnlRecord>& analytic, double lo, double hi, int bins) {
  auto split = [](const std::vector<PnlRecord>& rs, bool breached) {
    std::vector<double> v;
    for (const auto& r : rs) {
      if (r.breached == breached) v.push_back(r.pnl);
    }
    return v;
  };
  CsvWriter w(out, {"source", "breached", "bin_lo", "bin_hi", "count"});
  const std::pair<const char*, const std::vector<PnlRecord>*> sources[] = {{"learned", &learned},
                                                                          {"analytic", &analytic}};
  for (const auto& [name, rs] : sources) {
    if (rs->empty()) continue;
    for (bool breached : {false, true}) {
      for (const auto& b : histogram(split(*rs, breached), lo, hi, bins)) {
        w << std::string(name) << static_cast<long>(breached) << b.lo << b.hi << b.count;
        w.end_row();
      }
    }
  }
}

void write_scatter_csv(std::ostream& out, const std::vector<ScatterRecord>& records) {
  CsvWriter w(out, {"path", "breached", "xfp", "yfp", "payoff"});
  for (const auto& r : records) {
    w << r.path << static_cast<long>(r.breached) << r.x_fp << r.y_fp << r.payoff;
    w.end_row();
  }
}

void write_y0_grid_csv(std::ostream& out, const std::vector<Y0Record>& records) {
  CsvWriter w(out, {"x0", "learned", "analytic", "diff"});
  for (const auto& r : records) {
    w << r.x0 << r.learned << r.analytic << r.diff;
    w.end_row();
  }
}

void write_delta_surface_csv(std::ostream& out, const std::vector<DeltaRecord>& records) {
  CsvWriter w(out, {"step", "t", "x", "learned", "analytic"});
  for (const auto& r : records) {
    w << r.step << r.t << r.x << r.learned << r.analytic;
    w.end_row();
  }
}

void write_loss_history_csv(std::ostream& out, const std::vector<LossRecord>& history) {
  CsvWriter w(out, {"step", "loss", "loss_std", "running_loss"});
  for (const auto& r : history) {
    w << r.step << r.loss << r.loss_std << r.running_loss;
    w.end_row();
  }
}

}  // namespace deepbarrier
