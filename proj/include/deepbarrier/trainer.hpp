#pragma once

#include "deepbarrier/barrier.hpp"
#include "deepbarrier/nn/adam.hpp"
#include "deepbarrier/nn/model_params.hpp"
#include "deepbarrier/nn/tape.hpp"
#include "deepbarrier/sde_engine.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace deepbarrier {

/// Generator value f(t, x, y, pi) per path, with its partials in y and pi.
struct GeneratorValue {
  Eigen::RowVectorXd value;
  Eigen::RowVectorXd d_y;
  Eigen::MatrixXd d_pi;  // dim x batch
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual void evaluate(double t, const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y, const Eigen::MatrixXd& pi,
                        GeneratorValue& out) const = 0;
};

/// Discounting-only generator f = -r y.
class RiskNeutralGenerator final : public Generator {
 public:
  explicit RiskNeutralGenerator(double rate) : rate_(rate) {}
  void evaluate(double t, const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y, const Eigen::MatrixXd& pi,
                GeneratorValue& out) const override;

 private:
  double rate_;
};

struct LearningRateSchedule {
  double initial = 1e-2;
  double decay = 0.5;
  long every = 5000;

  double at(long mini_batch) const;
};

struct TrainConfig {
  int steps = 200;
  long batch = 512;
  long mini_batches = 20000;
  int layers = 5;
  int units = 5;
  nn::Activation activation = nn::Activation::Tanh;
  LearningRateSchedule lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 42;
  /// X0 ~ U[x0_low, x0_high] per coordinate unless x0_fixed is set.
  double x0_low = 50.0;
  double x0_high = 150.0;
  std::optional<double> x0_fixed;
  /// Scale applied to the Y0 network output; 0 means 0.1 * strike.
  double y0_output_scale = 0.0;
  double pi_output_scale = 1.0;
  long report_stride = 1;
  long running_window = 500;
  /// Write a checkpoint every k mini-batches into checkpoint_dir (0: off).
  long checkpoint_stride = 0;
  std::filesystem::path checkpoint_dir;

  void validate() const;
  nn::AdamConfig adam(long mini_batch) const;
};

struct LossRecord {
  long step = 0;
  double loss = 0.0;
  double loss_std = 0.0;
  double running_loss = 0.0;
};

struct TrainReport {
  std::vector<LossRecord> history;
  long mini_batches = 0;
  double final_loss = 0.0;
  double final_running_loss = 0.0;
  double wall_seconds = 0.0;
  std::string config_echo;
  std::vector<std::filesystem::path> checkpoints;
};

/// Terminal conditional tensors of a rollout, one column per path.
struct RolloutResult {
  Eigen::RowVectorXd y_fp;
  Eigen::RowVectorXd t_fp;
  Eigen::MatrixXd x_fp;
  Eigen::RowVectorXd breached;  // XTrig_N
  std::vector<int> breach_step;
  std::vector<Eigen::RowVectorXd> y_trace;  // Y_{t_i}, only when requested
};

/// Source of the initial value and of the per-step hedge ratios.
class HedgeStrategy {
 public:
  virtual ~HedgeStrategy() = default;
  virtual Eigen::RowVectorXd initial_value(const Eigen::MatrixXd& x0) const = 0;
  virtual Eigen::MatrixXd delta(int step, double t, const Eigen::MatrixXd& x) const = 0;
};

class LearnedStrategy final : public HedgeStrategy {
 public:
  explicit LearnedStrategy(const nn::ModelParams& params) : params_(params) {}
  Eigen::RowVectorXd initial_value(const Eigen::MatrixXd& x0) const override;
  Eigen::MatrixXd delta(int step, double t, const Eigen::MatrixXd& x) const override;

 private:
  const nn::ModelParams& params_;
};

/// Y_{i+1} = Y_i - f dt + sum_k pi_k (sigma X_i o L dW_i)_k.
Eigen::RowVectorXd value_step(const Eigen::RowVectorXd& y, const Eigen::RowVectorXd& f, double dt,
                              const Eigen::MatrixXd& pi, const Eigen::MatrixXd& diffusion);

/// Forward Y rollout with barrier triggers. Throws NumericFault on non-finite Y.
RolloutResult rollout(const HedgeStrategy& strategy, const PathBatch& paths, const MarketModel& model,
                      const TimeGrid& grid, const InstrumentSpec& instr, const Generator& gen,
                      bool keep_trace = false);

RolloutResult rollout(const nn::ModelParams& params, const PathBatch& paths, const MarketModel& model,
                      const TimeGrid& grid, const InstrumentSpec& instr, const Generator& gen,
                      bool keep_trace = false);

/// g_B(tFP_N, XFP_N) per path, branch chosen by the breach flag.
Eigen::RowVectorXd terminal_payoffs(const RolloutResult& r, const InstrumentSpec& instr, const MarketModel& model);

/// Batch mean of (YFP_N - g_B)^2.
double replication_loss(const Eigen::RowVectorXd& y_fp, const Eigen::RowVectorXd& payoff);
double replication_loss(const RolloutResult& r, const InstrumentSpec& instr, const MarketModel& model);

struct BatchLoss {
  double loss = 0.0;
  double loss_std = 0.0;  // standard deviation of the per-path squared errors
};

/// Records the rollout on the tape, evaluates the loss and back-propagates
/// into grads (which are zeroed first). Trigger indicators are constants.
BatchLoss loss_and_gradient(const nn::ModelParams& params, const PathBatch& paths, const MarketModel& model,
                            const TimeGrid& grid, const InstrumentSpec& instr, const Generator& gen,
                            nn::ModelGrads& grads, nn::Tape& tape, long mini_batch = 0);

/// Network specs implied by the config (input normalization from the X0 range).
nn::MlpSpec y0_spec(const TrainConfig& cfg, const MarketModel& model, const InstrumentSpec& instr);
nn::MlpSpec pi_spec(const TrainConfig& cfg, const MarketModel& model);
nn::ModelParams initial_params(const TrainConfig& cfg, const MarketModel& model, const InstrumentSpec& instr);

/// Paths of mini-batch index m: fresh X0 draws and fresh increments.
PathBatch training_batch(const TrainConfig& cfg, const MarketModel& model, const TimeGrid& grid, long index);

struct TrainResult {
  nn::ModelParams params;
  TrainReport report;
};

using ProgressCallback = std::function<void(const LossRecord&)>;
/// Called after the given 1-based mini-batch count with the current parameters.
using SnapshotCallback = std::function<void(long, const nn::ModelParams&)>;

struct TrainHooks {
  ProgressCallback progress;
  long progress_stride = 0;
  SnapshotCallback snapshot;
  std::vector<long> snapshot_at;
  std::string config_text;
};

TrainResult train(const TrainConfig& cfg, const MarketModel& model, const InstrumentSpec& instr,
                  const Generator& gen, const TrainHooks& hooks = {});

/// Learned time-0 value Y0(x0).
double price(const nn::ModelParams& params, const Eigen::VectorXd& x0);

}  // namespace deepbarrier
