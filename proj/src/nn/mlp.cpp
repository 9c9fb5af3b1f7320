#include "deepbarrier/nn/mlp.hpp"

#include "deepbarrier/errors.hpp"
#include "deepbarrier/random.hpp"

#include <cmath>
#include <random>
#include <string>

namespace deepbarrier::nn {

std::string_view to_string(Activation act) noexcept {
  switch (act) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Identity: return "identity";
  }
  return "tanh";
}

Activation parse_activation(std::string_view text) {
  if (text == "tanh") return Activation::Tanh;
  if (text == "relu") return Activation::Relu;
  throw ValidationError("unknown activation '" + std::string(text) + "'");
}

void MlpSpec::validate() const {
  if (input_dim < 1) throw ValidationError("input_dim must be >= 1");
  if (hidden_layers < 1) throw ValidationError("layers must be >= 1");
  if (units < 1) throw ValidationError("units must be >= 1");
  if (output_dim < 1) throw ValidationError("output_dim must be >= 1");
  if (activation == Activation::Identity) throw ValidationError("hidden activation must be nonlinear");
  if (!(input_scale > 0.0)) throw ValidationError("input_scale must be > 0");
  if (!(output_scale > 0.0)) throw ValidationError("output_scale must be > 0");
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return n;
}

double init_variance(Activation act, int fan_in) noexcept {
  return (act == Activation::Relu ? 2.0 : 1.0) / static_cast<double>(fan_in);
}

Mlp init_mlp(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  Mlp net;
  net.spec = spec;
  SplitMix64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  int fan_in = spec.input_dim;
  for (int l = 0; l <= spec.hidden_layers; ++l) {
    const int fan_out = l == spec.hidden_layers ? spec.output_dim : spec.units;
    const double sd = std::sqrt(init_variance(spec.activation, fan_in));
    DenseLayer layer;
    layer.weight.resize(fan_out, fan_in);
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = sd * normal(gen);
    }
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    net.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return net;
}

Mlp zeros_like(const Mlp& net) {
  Mlp out;
  out.spec = net.spec;
  out.layers.reserve(net.layers.size());
  for (const auto& layer : net.layers) {
    out.layers.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                          Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return out;
}

Matrix forward(const Mlp& net, const Eigen::Ref<const Matrix>& x) {
  const MlpSpec& spec = net.spec;
  const double a = 1.0 / spec.input_scale;
  Matrix h = (x.array() * a + (-spec.input_shift * a)).matrix();
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const DenseLayer& layer = net.layers[l];
    Matrix next(layer.weight.rows(), h.cols());
    next.noalias() = layer.weight * h;
    next.colwise() += layer.bias;
    const bool last = l + 1 == net.layers.size();
    activate(last ? Activation::Identity : spec.activation, next);
    if (last && spec.output_scale != 1.0) next *= spec.output_scale;
    h = std::move(next);
  }
  return h;
}

Var forward(Tape& tape, const Mlp& net, Var x, Mlp* grads) {
  const MlpSpec& spec = net.spec;
  const double a = 1.0 / spec.input_scale;
  Var h = tape.affine_scalar(x, a, -spec.input_shift * a);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const bool last = l + 1 == net.layers.size();
    DenseLayer* g = grads != nullptr ? &grads->layers[l] : nullptr;
    h = last ? tape.layer(h, net.layers[l], g, Activation::Identity, spec.output_scale)
             : tape.layer(h, net.layers[l], g, spec.activation);
  }
  return h;
}

}  // namespace deepbarrier::nn
