#include "deepbarrier/nn/adam.hpp"
#include "deepbarrier/nn/mlp.hpp"
#include "deepbarrier/nn/model_params.hpp"
#include "support/reference.hpp"

#include <catch2/catch.hpp>

#include <cmath>

using namespace deepbarrier::nn;

namespace {

MlpSpec spec(int n = 5, int u = 5) {
  MlpSpec s;
  s.hidden_layers = n;
  s.units = u;
  return s;
}

}  // namespace

TEST_CASE("init shapes and determinism") {
  const Mlp a = init_mlp(spec(), 1);
  REQUIRE(a.layers.size() == 6);
  CHECK(a.layers[0].weight.rows() == 5);
  CHECK(a.layers[0].weight.cols() == 1);
  for (int l = 1; l < 5; ++l) {
    CHECK(a.layers[static_cast<std::size_t>(l)].weight.rows() == 5);
    CHECK(a.layers[static_cast<std::size_t>(l)].weight.cols() == 5);
  }
  CHECK(a.layers[5].weight.rows() == 1);
  CHECK(a.layers[5].weight.cols() == 5);
  CHECK(a.parameter_count() == 10 + 4 * 30 + 6);
  for (const auto& l : a.layers) {
    CHECK(l.weight.allFinite());
    CHECK(l.bias.isZero(0.0));
  }
  const Mlp b = init_mlp(spec(), 1);
  for (std::size_t l = 0; l < a.layers.size(); ++l) CHECK(a.layers[l].weight == b.layers[l].weight);
  CHECK(init_mlp(spec(), 2).layers[1].weight != a.layers[1].weight);
}

TEST_CASE("init variance follows the fan-in scheme") {
  for (Activation act : {Activation::Tanh, Activation::Relu}) {
    MlpSpec s = spec(3, 64);
    s.activation = act;
    const Mlp net = init_mlp(s, 3);
    for (std::size_t l = 1; l < 3; ++l) {
      const auto& w = net.layers[l].weight;
      const double var = (w.array() - w.mean()).square().sum() / static_cast<double>(w.size() - 1);
      CHECK(std::abs(var / init_variance(act, 64) - 1.0) < 0.3);
    }
  }
}

TEST_CASE("zero network outputs its final bias") {
  Mlp net = zeros_like(init_mlp(spec(), 1));
  CHECK(forward(net, Matrix::Constant(1, 3, 100.0)).isZero(0.0));
  net.layers.back().bias(0) = 0.7;
  CHECK(forward(net, Matrix::Constant(1, 3, 100.0)) == Matrix::Constant(1, 3, 0.7));
}

TEST_CASE("constructed near-linear network reproduces its scaled input") {
  // One hidden tanh unit with a tiny input weight is linear to first order.
  MlpSpec s = spec(1, 1);
  s.output_scale = 2.0;
  Mlp net = zeros_like(init_mlp(s, 1));
  net.layers[0].weight(0, 0) = 1e-6;
  net.layers[1].weight(0, 0) = 1e6;
  const Matrix y = forward(net, (Matrix(1, 3) << -1.0, 0.5, 2.0).finished());
  CHECK(y(0, 0) == Approx(-2.0).epsilon(1e-9));
  CHECK(y(0, 1) == Approx(1.0).epsilon(1e-9));
  CHECK(y(0, 2) == Approx(4.0).epsilon(1e-9));
}

TEST_CASE("forward matches a scalar loop reference") {
  MlpSpec s = spec(3, 4);
  s.input_dim = 2;
  s.output_dim = 2;
  s.input_shift = 100.0;
  s.input_scale = 50.0;
  s.output_scale = 0.5;
  const Mlp net = init_mlp(s, 9);
  Matrix x(2, 3);
  x << 60.0, 100.0, 140.0, 90.0, 110.0, 130.0;
  const Matrix y = forward(net, x);
  for (Eigen::Index p = 0; p < 3; ++p) {
    const auto ref = reference::mlp_eval(net, {x(0, p), x(1, p)});
    CHECK(y(0, p) == Approx(ref[0]).epsilon(1e-12).margin(1e-14));
    CHECK(y(1, p) == Approx(ref[1]).epsilon(1e-12).margin(1e-14));
  }
}

TEST_CASE("taped forward equals plain forward bit for bit") {
  MlpSpec s = spec();
  s.input_shift = 100.0;
  s.input_scale = 50.0;
  s.output_scale = 10.0;
  const Mlp net = init_mlp(s, 4);
  const Matrix x = Eigen::RowVectorXd::LinSpaced(7, 50.0, 150.0);
  Tape tape;
  const Var out = forward(tape, net, tape.constant(x), nullptr);
  CHECK(tape.value(out) == forward(net, x));
}

TEST_CASE("single hidden layer gradient matches central differences") {
  MlpSpec s = spec(1, 6);
  s.input_scale = 2.0;
  const Mlp net = init_mlp(s, 5);
  const Matrix x = (Matrix(1, 4) << -1.0, 0.3, 0.8, 2.0).finished();
  const Matrix target = (Matrix(1, 4) << 0.1, -0.2, 0.3, 0.5).finished();
  auto loss = [&](const Mlp& m) {
    Tape t;
    return t.value(t.mean_squared_error(forward(t, m, t.constant(x), nullptr), target))(0, 0);
  };
  Mlp grads = zeros_like(net);
  Tape tape;
  tape.backward(tape.mean_squared_error(forward(tape, net, tape.constant(x), &grads), target));

  double worst = 0.0;
  Mlp probe = net;
  std::vector<Eigen::Map<Eigen::VectorXd>> blocks, gblocks;
  for_each_block(probe, [&](Eigen::Map<Eigen::VectorXd> b) { blocks.push_back(b); });
  for_each_block(grads, [&](Eigen::Map<Eigen::VectorXd> b) { gblocks.push_back(b); });
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    for (Eigen::Index j = 0; j < blocks[k].size(); ++j) {
      const double w = blocks[k](j), h = 1e-6 * std::max(1.0, std::abs(w));
      blocks[k](j) = w + h;
      const double fp = loss(probe);
      blocks[k](j) = w - h;
      const double fm = loss(probe);
      blocks[k](j) = w;
      const double fd = (fp - fm) / (2 * h);
      worst = std::max(worst, std::abs(gblocks[k](j) - fd) / std::max(std::abs(fd), 1e-3));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("adam leaves parameters alone on zero gradients") {
  AdamState st;
  st.reset(3);
  st.m << 0.1, -0.2, 0.3;
  st.v << 0.01, 0.02, 0.03;
  const Eigen::VectorXd m0 = st.m, v0 = st.v;
  Eigen::VectorXd p(3);
  p << 1.0, 2.0, 3.0;
  const Eigen::VectorXd before = p;
  AdamConfig cfg;
  adam_update(p, Eigen::VectorXd::Zero(3), st, cfg);
  CHECK(st.step == 1);
  CHECK(st.m.isApprox(0.9 * m0));
  CHECK(st.v.isApprox(0.999 * v0));
  // Decayed moments still move parameters, so only the fresh state is inert.
  AdamState fresh;
  fresh.reset(3);
  p = before;
  adam_update(p, Eigen::VectorXd::Zero(3), fresh, cfg);
  CHECK(p == before);
}

TEST_CASE("adam step size under a constant gradient is the learning rate") {
  AdamState st;
  st.reset(2);
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd g = (Eigen::VectorXd(2) << 3.0, -0.5).finished();
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd before = p;
    adam_update(p, g, st, cfg);
    // Bias-corrected moments equal g and g^2 exactly, so each step is lr * sign(g).
    CHECK((before - p)(0) == Approx(0.01).epsilon(1e-6));
    CHECK((before - p)(1) == Approx(-0.01).epsilon(1e-6));
  }
}

TEST_CASE("adam minimizes a convex toy") {
  AdamState st;
  st.reset(1);
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(1);
  for (int k = 0; k < 500; ++k) adam_update(w, 2.0 * (w.array() - 3.0).matrix(), st, cfg);
  CHECK(std::abs(w(0) - 3.0) < 1e-3);
}

TEST_CASE("model params flatten and unflatten round trip") {
  ModelParams params = init_model(spec(2, 3), spec(2, 3), 4, 11);
  CHECK(params.steps() == 4);
  const Eigen::VectorXd flat = flatten(params);
  CHECK(static_cast<std::size_t>(flat.size()) == params.parameter_count());
  ModelParams other = init_model(spec(2, 3), spec(2, 3), 4, 12);
  unflatten(flat, other);
  CHECK(flatten(other) == flat);
  // Distinct networks per step.
  CHECK(params.pi_nets[0].layers[0].weight != params.pi_nets[1].layers[0].weight);
}
