#include "deepbarrier/nn/adam.hpp"

#include "deepbarrier/errors.hpp"

#include <cmath>

namespace deepbarrier::nn {

void adam_update(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grads,
                 AdamState& state, const AdamConfig& config) {
  if (grads.size() != params.size()) throw ValidationError("adam: gradient size mismatch");
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ValidationError("adam: optimizer state does not match the parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * grads;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * grads.cwiseProduct(grads);
  params.array() -= config.learning_rate * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + config.epsilon);
}

}  // namespace deepbarrier::nn
