#include "deepbarrier/barrier.hpp"

#include "deepbarrier/errors.hpp"
#include "deepbarrier/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace deepbarrier {

namespace {

constexpr double kContinuityShift = 0.5826;

}  // namespace

std::string_view to_string(BarrierKind kind) noexcept {
  switch (kind) {
    case BarrierKind::UpOut: return "up-out";
    case BarrierKind::DownOut: return "down-out";
    case BarrierKind::UpIn: return "up-in";
    case BarrierKind::DownIn: return "down-in";
    case BarrierKind::DoubleOut: return "double-out";
    case BarrierKind::DoubleIn: return "double-in";
  }
  return "up-out";
}

std::string_view to_string(OptionType type) noexcept { return type == OptionType::Call ? "call" : "put"; }

BarrierKind parse_barrier_kind(std::string_view text) {
  for (auto kind : {BarrierKind::UpOut, BarrierKind::DownOut, BarrierKind::UpIn, BarrierKind::DownIn,
                    BarrierKind::DoubleOut, BarrierKind::DoubleIn}) {
    if (to_string(kind) == text) return kind;
  }
  throw ValidationError("unknown barrier kind '" + std::string(text) + "'");
}

OptionType parse_option_type(std::string_view text) {
  if (text == "call") return OptionType::Call;
  if (text == "put") return OptionType::Put;
  throw ValidationError("unknown option type '" + std::string(text) + "'");
}

double LevelSchedule::at(double t) const {
  auto it = std::upper_bound(starts.begin(), starts.end(), t);
  const auto idx = it == starts.begin() ? 0 : static_cast<std::size_t>(it - starts.begin()) - 1;
  return levels[idx];
}

LevelSchedule LevelSchedule::scaled(double factor) const {
  LevelSchedule out = *this;
  for (double& level : out.levels) level *= factor;
  return out;
}

void LevelSchedule::validate(std::string_view name) const {
  const std::string n(name);
  if (starts.empty() || starts.size() != levels.size()) {
    throw ValidationError(n + " schedule needs matching start times and levels");
  }
  if (starts.front() != 0.0) throw ValidationError(n + " schedule must start at t = 0");
  for (std::size_t j = 1; j < starts.size(); ++j) {
    if (!(starts[j] > starts[j - 1])) throw ValidationError(n + " schedule start times must increase");
  }
  for (double level : levels) {
    if (!(level > 0.0) || !std::isfinite(level)) throw ValidationError(n + " levels must be > 0");
  }
}

bool BarrierSpec::knock_in() const noexcept {
  return kind == BarrierKind::UpIn || kind == BarrierKind::DownIn || kind == BarrierKind::DoubleIn;
}

bool BarrierSpec::needs_upper() const noexcept {
  return kind == BarrierKind::UpOut || kind == BarrierKind::UpIn || kind == BarrierKind::DoubleOut ||
         kind == BarrierKind::DoubleIn;
}

bool BarrierSpec::needs_lower() const noexcept {
  return kind == BarrierKind::DownOut || kind == BarrierKind::DownIn || kind == BarrierKind::DoubleOut ||
         kind == BarrierKind::DoubleIn;
}

void BarrierSpec::validate(double maturity) const {
  if (needs_upper() && !upper) throw ValidationError(std::string(to_string(kind)) + " requires an upper barrier");
  if (needs_lower() && !lower) throw ValidationError(std::string(to_string(kind)) + " requires a lower barrier");
  if (upper) {
    upper->validate("upper");
    if (upper->starts.back() > maturity) throw ValidationError("upper schedule extends past maturity");
  }
  if (lower) {
    lower->validate("lower");
    if (lower->starts.back() > maturity) throw ValidationError("lower schedule extends past maturity");
  }
  if (upper && lower && needs_upper() && needs_lower()) {
    std::vector<double> knots = upper->starts;
    knots.insert(knots.end(), lower->starts.begin(), lower->starts.end());
    for (double t : knots) {
      if (!(lower->at(t) < upper->at(t))) throw ValidationError("lower barrier must stay below the upper barrier");
    }
  }
  if (!std::isfinite(rebate)) throw ValidationError("rebate must be finite");
}

void InstrumentSpec::validate() const {
  if (!(strike > 0.0)) throw ValidationError("strike must be > 0");
  if (!(maturity > 0.0)) throw ValidationError("maturity must be > 0");
  barrier.validate(maturity);
}

double monitored_level(const BarrierSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (spec.basket_weights.empty()) return x(0);
  double s = 0.0;
  const auto n = std::min<Eigen::Index>(x.size(), static_cast<Eigen::Index>(spec.basket_weights.size()));
  for (Eigen::Index k = 0; k < n; ++k) s += spec.basket_weights[static_cast<std::size_t>(k)] * x(k);
  return s;
}

bool condition(const BarrierSpec& spec, double t, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double s = monitored_level(spec, x);
  const bool above = spec.needs_upper() && s >= spec.upper->at(t);
  const bool below = spec.needs_lower() && s <= spec.lower->at(t);
  return above || below;
}

BarrierSpec shifted_for_monitoring(const BarrierSpec& spec, double vol, double dt) {
  BarrierSpec out = spec;
  const double factor = std::exp(kContinuityShift * vol * std::sqrt(dt));
  if (out.upper) out.upper = out.upper->scaled(1.0 / factor);
  if (out.lower) out.lower = out.lower->scaled(factor);
  out.shift_correction = false;
  return out;
}

BarrierSpec effective_barrier(const BarrierSpec& spec, double vol, double dt) {
  return spec.shift_correction ? shifted_for_monitoring(spec, vol, dt) : spec;
}

double trig_update(double prev, const BarrierSpec& spec, double t, const Eigen::Ref<const Eigen::VectorXd>& x,
                   bool check) {
  if (prev != 0.0) return prev;
  return check && condition(spec, t, x) ? 1.0 : 0.0;
}

TriggerState init_triggers(const BarrierSpec& spec, double t0, const Eigen::MatrixXd& x0,
                           const Eigen::RowVectorXd& y0) {
  const Eigen::Index b = x0.cols();
  TriggerState s;
  s.trig = Eigen::RowVectorXd::Zero(b);
  s.t_fp = Eigen::RowVectorXd::Constant(b, t0);
  s.x_fp = x0;
  s.y_fp = y0;
  s.breach_step.assign(static_cast<std::size_t>(b), -1);
  if (spec.monitor_at_t0) {
    for (Eigen::Index p = 0; p < b; ++p) {
      if (condition(spec, t0, x0.col(p))) {
        s.trig(p) = 1.0;
        s.breach_step[static_cast<std::size_t>(p)] = 0;
      }
    }
  }
  return s;
}

void fp_update(TriggerState& state, double t, const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y) {
  for (Eigen::Index p = 0; p < x.cols(); ++p) {
    if (state.trig(p) != 0.0) continue;  // frozen: exact copy of the previous values
    state.t_fp(p) = t;
    state.x_fp.col(p) = x.col(p);
    state.y_fp(p) = y(p);
  }
}

void advance_triggers(TriggerState& state, const BarrierSpec& spec, int step, int steps, double t,
                      const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y) {
  fp_update(state, t, x, y);
  const bool check = step < steps || spec.active_at_maturity;
  for (Eigen::Index p = 0; p < x.cols(); ++p) {
    const double prev = state.trig(p);
    state.trig(p) = trig_update(prev, spec, t, x.col(p), check);
    if (prev == 0.0 && state.trig(p) != 0.0) state.breach_step[static_cast<std::size_t>(p)] = step;
  }
}

double vanilla_payoff(const InstrumentSpec& instr, double level) {
  return instr.option == OptionType::Call ? std::max(level - instr.strike, 0.0)
                                          : std::max(instr.strike - level, 0.0);
}

double terminal_payoff(const InstrumentSpec& instr, const MarketModel& model, bool breached, double t_fp,
                       const Eigen::Ref<const Eigen::VectorXd>& x_fp) {
  const double s = monitored_level(instr.barrier, x_fp);
  if (instr.barrier.knock_in()) {
    if (!breached) return 0.0;
    const double remaining = std::max(instr.maturity - t_fp, 0.0);
    return bs_vanilla(s, instr.strike, model.rate, model.vol, remaining, instr.option).price;
  }
  return breached ? instr.barrier.rebate : vanilla_payoff(instr, s);
}

double payoff_gB(const InstrumentSpec& instr, const MarketModel& model, double t,
                 const Eigen::Ref<const Eigen::VectorXd>& x, double dt) {
  const bool at_maturity = t >= instr.maturity - 0.5 * dt;
  return terminal_payoff(instr, model, !at_maturity, t, x);
}

void write_trigger_trace_csv(std::ostream& out, const PathBatch& paths, const TimeGrid& grid,
                             const BarrierSpec& spec) {
  const int n = paths.steps();
  const Eigen::RowVectorXd no_y = Eigen::RowVectorXd::Zero(paths.batch());
  TriggerState state = init_triggers(spec, grid.time(0), paths.levels[0], no_y);
  out << "path,step,time,level,xtrig,tfp,xfp\n";
  out.precision(17);
  // Rows are grouped by path, so collect the per-step state first.
  std::vector<TriggerState> history;
  history.reserve(static_cast<std::size_t>(n) + 1);
  history.push_back(state);
  for (int i = 1; i <= n; ++i) {
    advance_triggers(state, spec, i, n, grid.time(i), paths.levels[static_cast<std::size_t>(i)], no_y);
    history.push_back(state);
  }
  for (Eigen::Index p = 0; p < paths.batch(); ++p) {
    for (int i = 0; i <= n; ++i) {
      const TriggerState& s = history[static_cast<std::size_t>(i)];
      out << p << ',' << i << ',' << grid.time(i) << ',' << monitored_level(spec, paths.levels[i].col(p)) << ','
          << s.trig(p) << ',' << s.t_fp(p) << ',' << monitored_level(spec, s.x_fp.col(p)) << '\n';
    }
  }
}

}  // namespace deepbarrier
