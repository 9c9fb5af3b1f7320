#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace deepbarrier {

/// Risk-neutral geometric Brownian motion dX = r X dt + sigma X (L dW),
/// with L the lower-triangular factor of the correlation matrix.
struct MarketModel {
  int dim = 1;
  double rate = 0.05;
  double vol = 0.2;
  Eigen::MatrixXd chol = Eigen::MatrixXd::Identity(1, 1);

  /// Builds a model from a correlation matrix (factorized here).
  static MarketModel from_correlation(double rate, double vol, const Eigen::MatrixXd& correlation);

  /// Throws ValidationError on a negative vol, a bad factor shape or a
  /// factor whose implied correlation lacks a unit diagonal.
  void validate() const;
};

/// Uniform grid t_i = i * T / N.
struct TimeGrid {
  double maturity = 0.5;
  int steps = 100;

  double dt() const noexcept { return maturity / steps; }
  double time(int i) const noexcept { return i == steps ? maturity : i * dt(); }
  void validate() const;
};

/// Simulated trajectories. Levels and increments are stored step-major with
/// one column per path: levels[i] is dim x batch and holds X_{t_i}.
struct PathBatch {
  std::vector<Eigen::MatrixXd> levels;      // steps + 1 entries
  std::vector<Eigen::MatrixXd> increments;  // steps entries, uncorrelated dW
  std::uint64_t seed = 0;

  int steps() const noexcept { return static_cast<int>(increments.size()); }
  Eigen::Index batch() const noexcept { return levels.empty() ? 0 : levels.front().cols(); }
  Eigen::Index dim() const noexcept { return levels.empty() ? 0 : levels.front().rows(); }
  double level(Eigen::Index path, int step, Eigen::Index coord = 0) const {
    return levels[static_cast<std::size_t>(step)](coord, path);
  }
};

/// Uniform initial levels on [lo, hi] per coordinate (dim x count). Each path
/// draws from its own stream keyed by (seed, path_offset + p).
Eigen::MatrixXd sample_x0(Eigen::Index count, double lo, double hi, int dim, std::uint64_t seed,
                          std::uint64_t path_offset = 0);

/// Broadcast of a fixed initial level vector (dim x count).
Eigen::MatrixXd fixed_x0(Eigen::Index count, const Eigen::VectorXd& x0);

/// Euler-Maruyama on X itself. Path p uses the stream (seed, path_offset + p),
/// so splitting a batch across calls reproduces the same trajectories.
PathBatch simulate_paths(const MarketModel& model, const TimeGrid& grid, const Eigen::MatrixXd& x0,
                         std::uint64_t seed, std::uint64_t path_offset = 0);

/// sigma * X_{t_i} o (L dW_i): the diffusion part a(t_i, X) dW_i of step i.
Eigen::MatrixXd diffusion_increment(const MarketModel& model, const PathBatch& paths, int step);

/// CSV columns: path,step,time,level (level_0..level_{d-1} when dim > 1).
void write_paths_csv(std::ostream& out, const PathBatch& paths, const TimeGrid& grid);

}  // namespace deepbarrier
