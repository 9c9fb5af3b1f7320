#pragma once

#include "deepbarrier/nn/adam.hpp"
#include "deepbarrier/nn/mlp.hpp"

#include <cstdint>
#include <vector>

namespace deepbarrier::nn {

/// Initial-value network Y0(X0), one hedge network per time step and the
/// optimizer state shared by all of them.
struct ModelParams {
  Mlp y0_net;
  std::vector<Mlp> pi_nets;  // pi_nets[i] evaluates pi at t_i, i = 0..N-1
  AdamState adam;

  int steps() const noexcept { return static_cast<int>(pi_nets.size()); }
  std::size_t parameter_count() const;
};

/// Gradient accumulator mirroring ModelParams.
struct ModelGrads {
  Mlp y0_net;
  std::vector<Mlp> pi_nets;

  void set_zero();
};

/// Independent initialization of every network from labeled child seeds.
ModelParams init_model(const MlpSpec& y0_spec, const MlpSpec& pi_spec, int steps, std::uint64_t seed);

ModelGrads zero_grads(const ModelParams& params);

/// Flat view in the fixed block order: y0 net, then pi nets by step.
Eigen::VectorXd flatten(const ModelParams& params);
Eigen::VectorXd flatten(const ModelGrads& grads);
void unflatten(const Eigen::Ref<const Eigen::VectorXd>& flat, ModelParams& params);

bool all_finite(const ModelGrads& grads);

/// Adam step over all networks; updates params.adam.
void adam_step(ModelParams& params, const ModelGrads& grads, const AdamConfig& config);

}  // namespace deepbarrier::nn
