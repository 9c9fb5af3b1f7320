#pragma once

#include "deepbarrier/barrier.hpp"
#include "deepbarrier/nn/model_params.hpp"
#include "deepbarrier/sde_engine.hpp"
#include "deepbarrier/trainer.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <ostream>
#include <vector>

namespace deepbarrier {

/// Bumped whenever a CSV column layout below changes.
inline constexpr int kCsvSchemaVersion = 1;

struct AnalyticHedgeOptions {
  /// Clip on |delta| near the barrier, where the closed-form delta blows up.
  double delta_clip = 25.0;
  /// Price and hedge with the barrier moved to the level at which the
  /// continuous formula matches grid monitoring of the true barrier.
  bool monitoring_adjusted = true;
};

/// Closed-form value and delta of a single-asset up-and-out call.
class AnalyticStrategy final : public HedgeStrategy {
 public:
  AnalyticStrategy(const MarketModel& model, const InstrumentSpec& instr, const TimeGrid& grid,
                   AnalyticHedgeOptions options = {});
  Eigen::RowVectorXd initial_value(const Eigen::MatrixXd& x0) const override;
  Eigen::MatrixXd delta(int step, double t, const Eigen::MatrixXd& x) const override;

  double barrier() const noexcept { return barrier_; }

 private:
  double strike_, rate_, vol_, maturity_, rebate_, barrier_, clip_;
};

/// True when the closed-form hedge covers the instrument.
bool analytic_supported(const MarketModel& model, const InstrumentSpec& instr);

struct PnlRecord {
  long path = 0;
  bool breached = false;
  int breach_step = 0;  // N when the barrier was never breached
  double x0 = 0.0;
  double value = 0.0;   // YFP_N
  double payoff = 0.0;  // g_B(tFP_N, XFP_N)
  double pnl = 0.0;
};

std::vector<PnlRecord> hedge_simulate(const HedgeStrategy& strategy, const PathBatch& paths,
                                      const MarketModel& model, const TimeGrid& grid, const InstrumentSpec& instr,
                                      const Generator& gen);

/// Out-of-sample paths for evaluation. Seeds are derived under a label that
/// training never uses, so batches are disjoint from any training batch.
PathBatch evaluation_paths(const TrainConfig& cfg, const MarketModel& model, const TimeGrid& grid, long count,
                           std::uint64_t eval_seed);

struct PnlStats {
  long count = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double std_dev = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double iqr_5_95 = 0.0;
  double abs_q999 = 0.0;
  double breached_fraction = 0.0;
};

PnlStats pnl_stats(const std::vector<PnlRecord>& records);

struct ScatterRecord {
  long path = 0;
  bool breached = false;
  double x_fp = 0.0;
  double y_fp = 0.0;
  double payoff = 0.0;
};

std::vector<ScatterRecord> payoff_scatter(const nn::ModelParams& params, const PathBatch& paths,
                                          const MarketModel& model, const TimeGrid& grid,
                                          const InstrumentSpec& instr, const Generator& gen);

struct Y0Record {
  double x0 = 0.0;
  double learned = 0.0;
  double analytic = 0.0;
  double diff = 0.0;
};

/// Learned Y0 against the continuously monitored closed form.
std::vector<Y0Record> y0_grid_compare(const nn::ModelParams& params, const MarketModel& model,
                                      const InstrumentSpec& instr, const std::vector<double>& x0_grid);

double mean_abs_diff(const std::vector<Y0Record>& records);
double max_abs_diff(const std::vector<Y0Record>& records);

struct DeltaRecord {
  int step = 0;
  double t = 0.0;
  double x = 0.0;
  double learned = 0.0;
  double analytic = 0.0;  // nan when no closed form applies
};

/// pi_i(x) over the given steps and levels.
std::vector<DeltaRecord> delta_surface(const nn::ModelParams& params, const MarketModel& model,
                                       const InstrumentSpec& instr, const TimeGrid& grid,
                                       const std::vector<int>& steps, const std::vector<double>& x_grid);

std::vector<double> linspace(double lo, double hi, double step);

void write_pnl_csv(std::ostream& out, const std::vector<PnlRecord>& records);
void write_pnl_histogram_csv(std::ostream& out, const std::vector<PnlRecord>& learned,
                             const std::vector<PnlRecord>& analytic, double lo, double hi, int bins);
void write_scatter_csv(std::ostream& out, const std::vector<ScatterRecord>& records);
void write_y0_grid_csv(std::ostream& out, const std::vector<Y0Record>& records);
void write_delta_surface_csv(std::ostream& out, const std::vector<DeltaRecord>& records);
void write_loss_history_csv(std::ostream& out, const std::vector<LossRecord>& history);

}  // namespace deepbarrier
