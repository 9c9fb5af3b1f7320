#pragma once

#include "deepbarrier/sde_engine.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deepbarrier {

enum class BarrierKind { UpOut, DownOut, UpIn, DownIn, DoubleOut, DoubleIn };
enum class OptionType { Call, Put };

std::string_view to_string(BarrierKind kind) noexcept;
std::string_view to_string(OptionType type) noexcept;
BarrierKind parse_barrier_kind(std::string_view text);
OptionType parse_option_type(std::string_view text);

/// Piecewise-constant level: levels[j] applies on [starts[j], starts[j+1]),
/// the last level extends through maturity.
struct LevelSchedule {
  std::vector<double> starts{0.0};
  std::vector<double> levels{150.0};

  static LevelSchedule constant(double level) { return LevelSchedule{{0.0}, {level}}; }
  double at(double t) const;
  bool is_constant() const noexcept { return levels.size() == 1; }
  LevelSchedule scaled(double factor) const;
  void validate(std::string_view name) const;
};

struct BarrierSpec {
  BarrierKind kind = BarrierKind::UpOut;
  std::optional<LevelSchedule> upper = LevelSchedule::constant(150.0);
  std::optional<LevelSchedule> lower;
  double rebate = 0.0;
  bool monitor_at_t0 = false;
  bool active_at_maturity = false;
  /// Opt-in continuity shift of the monitored levels (see shifted_for_monitoring).
  bool shift_correction = false;
  /// Weights of the monitored basket; empty means the first coordinate.
  std::vector<double> basket_weights;

  bool knock_in() const noexcept;
  bool needs_upper() const noexcept;
  bool needs_lower() const noexcept;
  void validate(double maturity) const;
};

struct InstrumentSpec {
  double strike = 100.0;
  double maturity = 0.5;
  OptionType option = OptionType::Call;
  BarrierSpec barrier;

  void validate() const;
};

/// Scalar compared against the barrier levels.
double monitored_level(const BarrierSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);

/// True iff x lies in the barrier region at time t. Ties count as breached.
bool condition(const BarrierSpec& spec, double t, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Discrete-monitoring continuity shift: moves each level towards the interior
/// by exp(0.5826 sigma sqrt(dt)) so the discretely monitored problem tracks
/// the continuously monitored one.
BarrierSpec shifted_for_monitoring(const BarrierSpec& spec, double vol, double dt);

/// Levels actually monitored on a given grid (shifted iff spec.shift_correction).
BarrierSpec effective_barrier(const BarrierSpec& spec, double vol, double dt);

/// Per-path conditional state, one column per path.
struct TriggerState {
  Eigen::RowVectorXd trig;   // XTrig in {0.0, 1.0}
  Eigen::RowVectorXd t_fp;   // tFP
  Eigen::MatrixXd x_fp;      // XFP, dim x batch
  Eigen::RowVectorXd y_fp;   // YFP
  std::vector<int> breach_step;  // -1 while not breached
};

/// XTrig_i given XTrig_{i-1}: absorbing once set, otherwise the condition at
/// (t_i, x_i) when check is true.
double trig_update(double prev, const BarrierSpec& spec, double t, const Eigen::Ref<const Eigen::VectorXd>& x,
                   bool check = true);

/// State at step 0: tFP_0 = t_0, XFP_0 = X_0, YFP_0 = Y_0 and XTrig_0 from
/// the condition at t_0 only when monitor_at_t0 is set.
TriggerState init_triggers(const BarrierSpec& spec, double t0, const Eigen::MatrixXd& x0, const Eigen::RowVectorXd& y0);

/// tFP/XFP/YFP update for step i; reads XTrig_{i-1} from state.trig.
void fp_update(TriggerState& state, double t, const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y);

/// Full step i >= 1: fp_update followed by the XTrig update. The barrier is
/// checked at step N only when active_at_maturity is set.
void advance_triggers(TriggerState& state, const BarrierSpec& spec, int step, int steps, double t,
                      const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y);

/// Barrier/final payoff g_B(t, x); t is treated as maturity when t >= T - dt/2.
/// Knock-in values use the vanilla closed form under the given model.
double payoff_gB(const InstrumentSpec& instr, const MarketModel& model, double t,
                 const Eigen::Ref<const Eigen::VectorXd>& x, double dt);

/// g_B evaluated from the breach flag rather than from time comparison.
double terminal_payoff(const InstrumentSpec& instr, const MarketModel& model, bool breached, double t_fp,
                       const Eigen::Ref<const Eigen::VectorXd>& x_fp);

/// Plain vanilla payoff of the instrument's option type on the monitored level.
double vanilla_payoff(const InstrumentSpec& instr, double level);

/// Runs the trigger machine over every path and writes
/// path,step,time,level,xtrig,tfp,xfp rows.
void write_trigger_trace_csv(std::ostream& out, const PathBatch& paths, const TimeGrid& grid,
                             const BarrierSpec& spec);

}  // namespace deepbarrier
