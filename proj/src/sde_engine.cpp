#include "deepbarrier/sde_engine.hpp"

#include "deepbarrier/errors.hpp"
#include "deepbarrier/random.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <string>

namespace deepbarrier {

MarketModel MarketModel::from_correlation(double rate, double vol, const Eigen::MatrixXd& correlation) {
  if (correlation.rows() != correlation.cols() || correlation.rows() < 1) {
    throw ValidationError("correlation must be a non-empty square matrix");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(correlation);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("correlation must be positive definite");
  }
  MarketModel model;
  model.dim = static_cast<int>(correlation.rows());
  model.rate = rate;
  model.vol = vol;
  model.chol = llt.matrixL();
  model.validate();
  return model;
}

void MarketModel::validate() const {
  if (dim < 1) throw ValidationError("dim must be >= 1");
  if (!(vol >= 0.0) || !std::isfinite(vol)) throw ValidationError("vol must be >= 0");
  if (!std::isfinite(rate)) throw ValidationError("rate must be finite");
  if (chol.rows() != dim || chol.cols() != dim) throw ValidationError("chol must be dim x dim");
  const Eigen::MatrixXd corr = chol * chol.transpose();
  for (int k = 0; k < dim; ++k) {
    if (std::abs(corr(k, k) - 1.0) > 1e-12) throw ValidationError("chol * chol^T must have a unit diagonal");
  }
}

void TimeGrid::validate() const {
  if (!(maturity > 0.0) || !std::isfinite(maturity)) throw ValidationError("maturity must be > 0");
  if (steps < 1) throw ValidationError("steps must be >= 1");
}

Eigen::MatrixXd sample_x0(Eigen::Index count, double lo, double hi, int dim, std::uint64_t seed,
                          std::uint64_t path_offset) {
  if (count < 1) throw ValidationError("x0 sample count must be >= 1");
  if (!(lo < hi)) throw ValidationError("x0 sampling requires lo < hi");
  if (dim < 1) throw ValidationError("dim must be >= 1");
  Eigen::MatrixXd x0(dim, count);
  for (Eigen::Index p = 0; p < count; ++p) {
    SplitMix64 gen(derive_seed(seed, "x0", path_offset + static_cast<std::uint64_t>(p)));
    std::uniform_real_distribution<double> uniform(lo, hi);
    for (int k = 0; k < dim; ++k) x0(k, p) = uniform(gen);
  }
  return x0;
}

Eigen::MatrixXd fixed_x0(Eigen::Index count, const Eigen::VectorXd& x0) {
  if (count < 1) throw ValidationError("x0 count must be >= 1");
  return x0.replicate(1, count);
}

PathBatch simulate_paths(const MarketModel& model, const TimeGrid& grid, const Eigen::MatrixXd& x0,
                         std::uint64_t seed, std::uint64_t path_offset) {
  model.validate();
  grid.validate();
  if (x0.rows() != model.dim) throw ValidationError("x0 rows must equal the model dimension");
  if (x0.cols() < 1) throw ValidationError("x0 must hold at least one path");
  if (!(x0.array() > 0.0).all()) throw ValidationError("initial levels must be strictly positive");

  const int n = grid.steps;
  const Eigen::Index b = x0.cols();
  const double sqrt_dt = std::sqrt(grid.dt());

  PathBatch out;
  out.seed = seed;
  out.increments.assign(static_cast<std::size_t>(n), Eigen::MatrixXd(model.dim, b));
  for (Eigen::Index p = 0; p < b; ++p) {
    SplitMix64 gen(derive_seed(seed, "path", path_offset + static_cast<std::uint64_t>(p)));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < model.dim; ++k) {
        out.increments[static_cast<std::size_t>(i)](k, p) = sqrt_dt * normal(gen);
      }
    }
  }

  const double growth = 1.0 + model.rate * grid.dt();
  out.levels.reserve(static_cast<std::size_t>(n) + 1);
  out.levels.push_back(x0);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd& x = out.levels.back();
    const Eigen::MatrixXd shock = diffusion_increment(model, out, i);
    out.levels.push_back((x.array() * growth + shock.array()).matrix());
  }
  return out;
}

Eigen::MatrixXd diffusion_increment(const MarketModel& model, const PathBatch& paths, int step) {
  const Eigen::MatrixXd& x = paths.levels[static_cast<std::size_t>(step)];
  const Eigen::MatrixXd& dw = paths.increments[static_cast<std::size_t>(step)];
  Eigen::MatrixXd out(x.rows(), x.cols());
  if (model.dim == 1) {
    const double scale = model.vol * model.chol(0, 0);
    out.array() = scale * x.array() * dw.array();
    return out;
  }
  // Column-by-column so that results do not depend on the batch width.
  for (Eigen::Index p = 0; p < x.cols(); ++p) {
    const Eigen::VectorXd correlated = model.chol.triangularView<Eigen::Lower>() * dw.col(p);
    out.col(p) = model.vol * x.col(p).cwiseProduct(correlated);
  }
  return out;
}

void write_paths_csv(std::ostream& out, const PathBatch& paths, const TimeGrid& grid) {
  const Eigen::Index d = paths.dim();
  out << "path,step,time";
  if (d == 1) {
    out << ",level";
  } else {
    for (Eigen::Index k = 0; k < d; ++k) out << ",level_" << k;
  }
  out << '\n';
  out.precision(17);
  for (Eigen::Index p = 0; p < paths.batch(); ++p) {
    for (int i = 0; i <= paths.steps(); ++i) {
      out << p << ',' << i << ',' << grid.time(i);
      for (Eigen::Index k = 0; k < d; ++k) out << ',' << paths.level(p, i, k);
      out << '\n';
    }
  }
}

}  // namespace deepbarrier
