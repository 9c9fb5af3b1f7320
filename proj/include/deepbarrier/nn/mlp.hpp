#pragma once

#include "deepbarrier/nn/tape.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>
#include <vector>

namespace deepbarrier::nn {

std::string_view to_string(Activation act) noexcept;
Activation parse_activation(std::string_view text);

/// Fully connected network: input normalization (x - shift) / scale, n hidden
/// layers of u units with a smooth activation, then an affine output layer
/// multiplied by output_scale.
struct MlpSpec {
  int input_dim = 1;
  int hidden_layers = 5;
  int units = 5;
  int output_dim = 1;
  Activation activation = Activation::Tanh;
  double input_shift = 0.0;
  double input_scale = 1.0;
  double output_scale = 1.0;

  void validate() const;
  bool operator==(const MlpSpec&) const = default;
};

struct Mlp {
  MlpSpec spec;
  std::vector<DenseLayer> layers;  // hidden_layers + 1

  std::size_t parameter_count() const;
};

/// Fan-in scaled normal weights (variance 1/fan_in, 2/fan_in for ReLU), zero biases.
Mlp init_mlp(const MlpSpec& spec, std::uint64_t seed);

/// Same shapes, all zeros. Used as a gradient accumulator.
Mlp zeros_like(const Mlp& net);

/// Target weight variance of the initializer for a layer with the given fan-in.
double init_variance(Activation act, int fan_in) noexcept;

/// Plain evaluation, x is input_dim x batch.
Matrix forward(const Mlp& net, const Eigen::Ref<const Matrix>& x);

/// Recorded evaluation; parameter gradients go to grads when non-null.
Var forward(Tape& tape, const Mlp& net, Var x, Mlp* grads);

/// Visits weight and bias blocks in a fixed order as flat vectors.
template <class F>
void for_each_block(Mlp& net, F&& f) {
  for (auto& layer : net.layers) {
    f(Eigen::Map<Eigen::VectorXd>(layer.weight.data(), layer.weight.size()));
    f(Eigen::Map<Eigen::VectorXd>(layer.bias.data(), layer.bias.size()));
  }
}

template <class F>
void for_each_block(const Mlp& net, F&& f) {
  for (const auto& layer : net.layers) {
    f(Eigen::Map<const Eigen::VectorXd>(layer.weight.data(), layer.weight.size()));
    f(Eigen::Map<const Eigen::VectorXd>(layer.bias.data(), layer.bias.size()));
  }
}

}  // namespace deepbarrier::nn
