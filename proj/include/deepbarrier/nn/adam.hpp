#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace deepbarrier::nn {

struct AdamConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t step = 0;

  void reset(Eigen::Index size) {
    m = Eigen::VectorXd::Zero(size);
    v = Eigen::VectorXd::Zero(size);
    step = 0;
  }
};

/// One bias-corrected Adam update of a flat parameter vector.
void adam_update(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grads,
                 AdamState& state, const AdamConfig& config);

}  // namespace deepbarrier::nn
