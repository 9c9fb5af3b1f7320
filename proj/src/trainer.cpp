#include "deepbarrier/trainer.hpp"

#include "deepbarrier/errors.hpp"
#include "deepbarrier/nn/checkpoint.hpp"
#include "deepbarrier/random.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <string>

namespace deepbarrier {

void RiskNeutralGenerator::evaluate(double /*t*/, const Eigen::MatrixXd& /*x*/, const Eigen::RowVectorXd& y,
                                    const Eigen::MatrixXd& pi, GeneratorValue& out) const {
  out.value = -rate_ * y;
  out.d_y.setConstant(y.size(), -rate_);
  out.d_pi.setZero(pi.rows(), pi.cols());
}

double LearningRateSchedule::at(long mini_batch) const {
  if (every <= 0) return initial;
  return initial * std::pow(decay, static_cast<double>(mini_batch / every));
}

void TrainConfig::validate() const {
  if (steps < 1) throw ValidationError("steps must be >= 1");
  if (batch < 1) throw ValidationError("batch must be >= 1");
  if (mini_batches < 0) throw ValidationError("mini_batches must be >= 0");
  if (layers < 1) throw ValidationError("layers must be >= 1");
  if (units < 1) throw ValidationError("units must be >= 1");
  if (!(lr.initial > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (!(lr.decay > 0.0)) throw ValidationError("lr_decay must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ValidationError("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  if (x0_fixed) {
    if (!(*x0_fixed > 0.0)) throw ValidationError("x0 must be > 0");
  } else if (!(x0_low > 0.0 && x0_low < x0_high)) {
    throw ValidationError("x0 range must satisfy 0 < x0_low < x0_high");
  }
  if (report_stride < 1) throw ValidationError("report_stride must be >= 1");
  if (running_window < 1) throw ValidationError("running_window must be >= 1");
  if (checkpoint_stride < 0) throw ValidationError("checkpoint_stride must be >= 0");
  if (y0_output_scale < 0.0) throw ValidationError("y0_output_scale must be >= 0");
  if (!(pi_output_scale > 0.0)) throw ValidationError("pi_output_scale must be > 0");
}

nn::AdamConfig TrainConfig::adam(long mini_batch) const {
  return {lr.at(mini_batch), beta1, beta2, epsilon};
}

Eigen::RowVectorXd LearnedStrategy::initial_value(const Eigen::MatrixXd& x0) const {
  return nn::forward(params_.y0_net, x0);
}

Eigen::MatrixXd LearnedStrategy::delta(int step, double /*t*/, const Eigen::MatrixXd& x) const {
  return nn::forward(params_.pi_nets[static_cast<std::size_t>(step)], x);
}

Eigen::RowVectorXd value_step(const Eigen::RowVectorXd& y, const Eigen::RowVectorXd& f, double dt,
                              const Eigen::MatrixXd& pi, const Eigen::MatrixXd& diffusion) {
  if (pi.rows() == 1) return (y.array() - dt * f.array() + pi.array() * diffusion.array()).matrix();
  return (y.array() - dt * f.array() + pi.cwiseProduct(diffusion).colwise().sum().array()).matrix();
}

namespace {

void check_finite(const Eigen::RowVectorXd& y, int step) {
  if (!y.allFinite()) throw NumericFault("non-finite Y in rollout", step);
}

void check_shapes(const PathBatch& paths, const MarketModel& model, const TimeGrid& grid) {
  if (paths.steps() != grid.steps) throw ValidationError("path batch was generated on a different grid");
  if (paths.dim() != model.dim) throw ValidationError("path batch dimension differs from the model");
}

}  // namespace

RolloutResult rollout(const HedgeStrategy& strategy, const PathBatch& paths, const MarketModel& model,
                      const TimeGrid& grid, const InstrumentSpec& instr, const Generator& gen, bool keep_trace) {
  check_shapes(paths, model, grid);
  const BarrierSpec spec = effective_barrier(instr.barrier, model.vol, grid.dt());
  const int n = grid.steps;
  const double dt = grid.dt();

  Eigen::RowVectorXd y = strategy.initial_value(paths.levels[0]);
  check_finite(y, 0);
  TriggerState state = init_triggers(spec, grid.time(0), paths.levels[0], y);
  RolloutResult out;
  if (keep_trace) out.y_trace.push_back(y);

  GeneratorValue gv;
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd& x = paths.levels[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd pi = strategy.delta(i, grid.time(i), x);
    gen.evaluate(grid.time(i), x, y, pi, gv);
    y = value_step(y, gv.value, dt, pi, diffusion_increment(model, paths, i));
    check_finite(y, i + 1);
    if (keep_trace) out.y_trace.push_back(y);
    advance_triggers(state, spec, i + 1, n, grid.time(i + 1), paths.levels[static_cast<std::size_t>(i) + 1], y);
  }
  out.y_fp = std::move(state.y_fp);
  out.t_fp = std::move(state.t_fp);
  out.x_fp = std::move(state.x_fp);
  out.breached = std::move(state.trig);
  out.breach_step = std::move(state.breach_step);
  return out;
}

RolloutResult rollout(const nn::ModelParams& params, const PathBatch& paths, const MarketModel& model,
                      const TimeGrid& grid, const InstrumentSpec& instr, const Generator& gen, bool keep_trace) {
  if (params.steps() != grid.steps) throw ValidationError("parameters were built for a different number of steps");
  return rollout(LearnedStrategy(params), paths, model, grid, instr, gen, keep_trace);
}

Eigen::RowVectorXd terminal_payoffs(const RolloutResult& r, const InstrumentSpec& instr, const MarketModel& model) {
  Eigen::RowVectorXd g(r.y_fp.size());
  for (Eigen::Index p = 0; p < g.size(); ++p) {
    g(p) = terminal_payoff(instr, model, r.breached(p) != 0.0, r.t_fp(p), r.x_fp.col(p));
  }
  return g;
}

double replication_loss(const Eigen::RowVectorXd& y_fp, const Eigen::RowVectorXd& payoff) {
  if (y_fp.size() != payoff.size() || y_fp.size() == 0) throw ValidationError("loss inputs must have equal, non-zero size");
  return (y_fp - payoff).squaredNorm() / static_cast<double>(y_fp.size());
}

double replication_loss(const RolloutResult& r, const InstrumentSpec& instr, const MarketModel& model) {
  return replication_loss(r.y_fp, terminal_payoffs(r, instr, model));
}

BatchLoss loss_and_gradient(const nn::ModelParams& params, const PathBatch& paths, const MarketModel& model,
                            const TimeGrid& grid, const InstrumentSpec& instr, const Generator& gen,
                            nn::ModelGrads& grads, nn::Tape& tape, long mini_batch) {
  check_shapes(paths, model, grid);
  if (params.steps() != grid.steps) throw ValidationError("parameters were built for a different number of steps");
  const BarrierSpec spec = effective_barrier(instr.barrier, model.vol, grid.dt());
  const int n = grid.steps;
  const double dt = grid.dt();

  tape.clear();
  grads.set_zero();

  nn::Var x = tape.constant(paths.levels[0]);
  nn::Var y = nn::forward(tape, params.y0_net, x, &grads.y0_net);
  nn::Var y_fp = y;
  TriggerState state = init_triggers(spec, grid.time(0), paths.levels[0], tape.value(y));

  GeneratorValue gv;
  Eigen::MatrixXd d_pi;
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    x = tape.constant(paths.levels[idx]);
    const nn::Var pi = nn::forward(tape, params.pi_nets[idx], x, &grads.pi_nets[idx]);
    const Eigen::RowVectorXd y_now = tape.value(y);
    const Eigen::MatrixXd pi_now = tape.value(pi);
    gen.evaluate(grid.time(i), paths.levels[idx], y_now, pi_now, gv);
    const Eigen::MatrixXd diffusion = diffusion_increment(model, paths, i);
    const Eigen::RowVectorXd y_next = value_step(y_now, gv.value, dt, pi_now, diffusion);
    check_finite(y_next, i + 1);
    d_pi = diffusion - dt * gv.d_pi;
    y = tape.linearized(y_next, y, (1.0 - dt * gv.d_y.array()).matrix(), pi, d_pi);
    // XTrig_i decides whether YFP_{i+1} keeps its frozen value.
    y_fp = tape.select(y, y_fp, state.trig);
    advance_triggers(state, spec, i + 1, n, grid.time(i + 1), paths.levels[idx + 1], y_next);
  }

  Eigen::RowVectorXd payoff(state.trig.size());
  for (Eigen::Index p = 0; p < payoff.size(); ++p) {
    payoff(p) = terminal_payoff(instr, model, state.trig(p) != 0.0, state.t_fp(p), state.x_fp.col(p));
  }
  const nn::Var loss = tape.mean_squared_error(y_fp, payoff);
  tape.backward(loss);
  if (!nn::all_finite(grads)) throw NumericFault("non-finite gradient", mini_batch);

  BatchLoss out;
  out.loss = tape.value(loss)(0, 0);
  const Eigen::ArrayXd sq = (tape.value(y_fp) - payoff).array().square().transpose();
  if (sq.size() > 1) out.loss_std = std::sqrt((sq - sq.mean()).square().sum() / static_cast<double>(sq.size() - 1));
  return out;
}

nn::MlpSpec y0_spec(const TrainConfig& cfg, const MarketModel& model, const InstrumentSpec& instr) {
  nn::MlpSpec s;
  s.input_dim = model.dim;
  s.hidden_layers = cfg.layers;
  s.units = cfg.units;
  s.output_dim = 1;
  s.activation = cfg.activation;
  if (cfg.x0_fixed) {
    s.input_shift = *cfg.x0_fixed;
    s.input_scale = 0.25 * *cfg.x0_fixed;
  } else {
    s.input_shift = 0.5 * (cfg.x0_low + cfg.x0_high);
    s.input_scale = 0.5 * (cfg.x0_high - cfg.x0_low);
  }
  s.output_scale = cfg.y0_output_scale > 0.0 ? cfg.y0_output_scale : 0.1 * instr.strike;
  return s;
}

nn::MlpSpec pi_spec(const TrainConfig& cfg, const MarketModel& model) {
  nn::MlpSpec s;
  s.input_dim = model.dim;
  s.hidden_layers = cfg.layers;
  s.units = cfg.units;
  s.output_dim = model.dim;
  s.activation = cfg.activation;
  if (cfg.x0_fixed) {
    s.input_shift = *cfg.x0_fixed;
    s.input_scale = 0.25 * *cfg.x0_fixed;
  } else {
    s.input_shift = 0.5 * (cfg.x0_low + cfg.x0_high);
    s.input_scale = 0.5 * (cfg.x0_high - cfg.x0_low);
  }
  s.output_scale = cfg.pi_output_scale;
  return s;
}

nn::ModelParams initial_params(const TrainConfig& cfg, const MarketModel& model, const InstrumentSpec& instr) {
  return nn::init_model(y0_spec(cfg, model, instr), pi_spec(cfg, model), cfg.steps, derive_seed(cfg.seed, "init"));
}

PathBatch training_batch(const TrainConfig& cfg, const MarketModel& model, const TimeGrid& grid, long index) {
  const auto m = static_cast<std::uint64_t>(index);
  const Eigen::MatrixXd x0 =
      cfg.x0_fixed ? fixed_x0(cfg.batch, Eigen::VectorXd::Constant(model.dim, *cfg.x0_fixed))
                   : sample_x0(cfg.batch, cfg.x0_low, cfg.x0_high, model.dim, derive_seed(cfg.seed, "x0", m));
  return simulate_paths(model, grid, x0, derive_seed(cfg.seed, "paths", m));
}

TrainResult train(const TrainConfig& cfg, const MarketModel& model, const InstrumentSpec& instr,
                  const Generator& gen, const TrainHooks& hooks) {
  cfg.validate();
  model.validate();
  instr.validate();
  const TimeGrid grid{instr.maturity, cfg.steps};
  const auto start = std::chrono::steady_clock::now();

  TrainResult result{initial_params(cfg, model, instr), {}};
  TrainReport& report = result.report;
  report.config_echo = hooks.config_text;
  nn::ModelGrads grads = nn::zero_grads(result.params);
  nn::Tape tape;

  std::deque<double> window;
  for (long m = 0; m < cfg.mini_batches; ++m) {
    const PathBatch paths = training_batch(cfg, model, grid, m);
    const BatchLoss bl = loss_and_gradient(result.params, paths, model, grid, instr, gen, grads, tape, m);
    nn::adam_step(result.params, grads, cfg.adam(m));

    window.push_back(bl.loss);
    if (static_cast<long>(window.size()) > cfg.running_window) window.pop_front();
    double running = 0.0;
    for (double v : window) running += v;
    running /= static_cast<double>(window.size());

    const LossRecord rec{m + 1, bl.loss, bl.loss_std, running};
    if ((m + 1) % cfg.report_stride == 0 || m + 1 == cfg.mini_batches) report.history.push_back(rec);
    report.final_loss = bl.loss;
    report.final_running_loss = running;
    if (hooks.progress && hooks.progress_stride > 0 && (m + 1) % hooks.progress_stride == 0) hooks.progress(rec);
    if (hooks.snapshot) {
      for (long at : hooks.snapshot_at) {
        if (at == m + 1) hooks.snapshot(m + 1, result.params);
      }
    }
    if (cfg.checkpoint_stride > 0 && (m + 1) % cfg.checkpoint_stride == 0) {
      const auto path = cfg.checkpoint_dir / ("checkpoint_" + std::to_string(m + 1) + ".bin");
      nn::save_checkpoint(path, {result.params, cfg.seed, m + 1, hooks.config_text});
      report.checkpoints.push_back(path);
    }
  }
  report.mini_batches = cfg.mini_batches;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

double price(const nn::ModelParams& params, const Eigen::VectorXd& x0) {
  return nn::forward(params.y0_net, x0)(0, 0);
}

}  // namespace deepbarrier
