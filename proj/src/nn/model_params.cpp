#include "deepbarrier/nn/model_params.hpp"

#include "deepbarrier/errors.hpp"
#include "deepbarrier/random.hpp"

namespace deepbarrier::nn {

namespace {

template <class Model, class F>
void for_each_net(Model& model, F&& f) {
  f(model.y0_net);
  for (auto& net : model.pi_nets) f(net);
}

template <class Model>
Eigen::VectorXd flatten_model(const Model& model, std::size_t count) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(count));
  Eigen::Index offset = 0;
  for_each_net(model, [&](const Mlp& net) {
    for_each_block(net, [&](const auto& block) {
      flat.segment(offset, block.size()) = block;
      offset += block.size();
    });
  });
  return flat;
}

}  // namespace

std::size_t ModelParams::parameter_count() const {
  std::size_t n = y0_net.parameter_count();
  for (const auto& net : pi_nets) n += net.parameter_count();
  return n;
}

void ModelGrads::set_zero() {
  for_each_net(*this, [](Mlp& net) {
    for (auto& layer : net.layers) {
      layer.weight.setZero();
      layer.bias.setZero();
    }
  });
}

ModelParams init_model(const MlpSpec& y0_spec, const MlpSpec& pi_spec, int steps, std::uint64_t seed) {
  if (steps < 1) throw ValidationError("steps must be >= 1");
  if (y0_spec.output_dim != 1) throw ValidationError("the Y0 network must have one output");
  if (pi_spec.output_dim != pi_spec.input_dim) throw ValidationError("pi networks must map R^d to R^d");
  ModelParams params;
  params.y0_net = init_mlp(y0_spec, derive_seed(seed, "y0_net"));
  params.pi_nets.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    params.pi_nets.push_back(init_mlp(pi_spec, derive_seed(seed, "pi_net", static_cast<std::uint64_t>(i))));
  }
  params.adam.reset(static_cast<Eigen::Index>(params.parameter_count()));
  return params;
}

ModelGrads zero_grads(const ModelParams& params) {
  ModelGrads g;
  g.y0_net = zeros_like(params.y0_net);
  g.pi_nets.reserve(params.pi_nets.size());
  for (const auto& net : params.pi_nets) g.pi_nets.push_back(zeros_like(net));
  return g;
}

Eigen::VectorXd flatten(const ModelParams& params) { return flatten_model(params, params.parameter_count()); }

Eigen::VectorXd flatten(const ModelGrads& grads) {
  std::size_t n = grads.y0_net.parameter_count();
  for (const auto& net : grads.pi_nets) n += net.parameter_count();
  return flatten_model(grads, n);
}

void unflatten(const Eigen::Ref<const Eigen::VectorXd>& flat, ModelParams& params) {
  if (static_cast<std::size_t>(flat.size()) != params.parameter_count()) {
    throw ValidationError("flat parameter vector has the wrong size");
  }
  Eigen::Index offset = 0;
  for_each_net(params, [&](Mlp& net) {
    for_each_block(net, [&](auto block) {
      block = flat.segment(offset, block.size());
      offset += block.size();
    });
  });
}

bool all_finite(const ModelGrads& grads) {
  bool ok = true;
  for_each_net(grads, [&](const Mlp& net) {
    for_each_block(net, [&](const auto& block) { ok = ok && block.allFinite(); });
  });
  return ok;
}

void adam_step(ModelParams& params, const ModelGrads& grads, const AdamConfig& config) {
  Eigen::VectorXd flat = flatten(params);
  adam_update(flat, flatten(grads), params.adam, config);
  unflatten(flat, params);
}

}  // namespace deepbarrier::nn
