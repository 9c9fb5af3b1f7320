#include "deepbarrier/nn/tape.hpp"

#include <cassert>
#include <stdexcept>

namespace deepbarrier::nn {

void activate(Activation act, Matrix& values) {
  switch (act) {
    case Activation::Tanh:
      // tanh(x) = 1 - 2 / (exp(2x) + 1); Eigen vectorizes exp for doubles, not tanh.
      values.array() = 1.0 - 2.0 / ((2.0 * values.array()).exp() + 1.0);
      break;
    case Activation::Relu:
      values.array() = values.array().max(0.0);
      break;
    case Activation::Identity:
      break;
  }
}

Tape::Node& Tape::push(Op op) {
  if (size_ == nodes_.size()) nodes_.emplace_back();
  Node& n = nodes_[size_++];
  n.op = op;
  n.needs_grad = false;
  n.act = Activation::Identity;
  n.a = n.b = 0;
  n.s0 = n.s1 = 0.0;
  n.layer = nullptr;
  n.layer_grad = nullptr;
  return n;
}

Var Tape::constant(const Eigen::Ref<const Matrix>& value) {
  Node& n = push(Op::Constant);
  n.value = value;
  return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Tape::variable(const Eigen::Ref<const Matrix>& value) {
  Node& n = push(Op::Variable);
  n.value = value;
  n.needs_grad = true;
  return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Tape::layer(Var x, const DenseLayer& layer, DenseLayer* layer_grad, Activation act, double scale) {
  assert(scale == 1.0 || act == Activation::Identity);
  const bool grad = layer_grad != nullptr || needs(x);
  Node& n = push(Op::Layer);
  const Matrix& in = nodes_[x.id].value;
  n.a = x.id;
  n.layer = &layer;
  n.layer_grad = layer_grad;
  n.act = act;
  n.s0 = scale;
  n.needs_grad = grad;
  n.value.resize(layer.weight.rows(), in.cols());
  n.value.noalias() = layer.weight * in;
  n.value.colwise() += layer.bias;
  activate(act, n.value);
  if (scale != 1.0) n.value *= scale;
  return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Tape::affine_scalar(Var x, double a, double shift) {
  const bool grad = needs(x);
  Node& n = push(Op::AffineScalar);
  n.a = x.id;
  n.s0 = a;
  n.s1 = shift;
  n.needs_grad = grad;
  n.value = (nodes_[x.id].value.array() * a + shift).matrix();
  return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Tape::add(Var a, Var b) {
  const bool grad = needs(a) || needs(b);
  Node& n = push(Op::Add);
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = grad;
  n.value = nodes_[a.id].value + nodes_[b.id].value;
  return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Tape::sub(Var a, Var b) {
  const bool grad = needs(a) || needs(b);
  Node& n = push(Op::Sub);
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = grad;
  n.value = nodes_[a.id].value - nodes_[b.id].value;
  return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Tape::mul(Var a, Var b) {
  const bool grad = needs(a) || needs(b);
  Node& n = push(Op::Mul);
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = grad;
  n.value = nodes_[a.id].value.cwiseProduct(nodes_[b.id].value);
  return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Tape::mul_const(Var a, const Eigen::Ref<const Matrix>& c) {
  const bool grad = needs(a);
  Node& n = push(Op::MulConst);
  n.a = a.id;
  n.needs_grad = grad;
  n.aux = c;
  n.value = nodes_[a.id].value.cwiseProduct(n.aux);
  return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Tape::column_sum(Var a) {
  const bool grad = needs(a);
  Node& n = push(Op::ColumnSum);
  n.a = a.id;
  n.needs_grad = grad;
  n.value = nodes_[a.id].value.colwise().sum();
  return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Tape::sum(Var a) {
  const bool grad = needs(a);
  Node& n = push(Op::Sum);
  n.a = a.id;
  n.needs_grad = grad;
  n.value.resize(1, 1);
  n.value(0, 0) = nodes_[a.id].value.sum();
  return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Tape::select(Var a, Var b, const Eigen::Ref<const Matrix>& mask) {
  const bool grad = needs(a) || needs(b);
  Node& n = push(Op::Select);
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = grad;
  n.aux = mask;
  n.value = (n.aux.array() != 0.0).select(nodes_[b.id].value, nodes_[a.id].value);
  return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Tape::linearized(const Eigen::Ref<const Matrix>& value, Var a, const Eigen::Ref<const Matrix>& da, Var b,
                     const Eigen::Ref<const Matrix>& db) {
  const bool grad = needs(a) || needs(b);
  Node& n = push(Op::Linearized);
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = grad;
  n.value = value;
  n.aux = da;
  n.aux2 = db;
  return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Tape::mean_squared_error(Var a, const Eigen::Ref<const Matrix>& target) {
  const bool grad = needs(a);
  Node& n = push(Op::Mse);
  n.a = a.id;
  n.needs_grad = grad;
  n.aux = nodes_[a.id].value - target;
  n.value.resize(1, 1);
  n.value(0, 0) = n.aux.squaredNorm() / static_cast<double>(n.aux.size());
  return {static_cast<std::uint32_t>(size_ - 1)};
}

void Tape::backward(Var out) {
  if (out.id >= size_) throw std::out_of_range("backward: node not on tape");
  Node& root = nodes_[out.id];
  if (root.value.size() != 1) throw std::invalid_argument("backward: output must be a 1 x 1 node");
  for (std::uint32_t i = 0; i <= out.id; ++i) {
    Node& n = nodes_[i];
    if (n.needs_grad) n.grad.setZero(n.value.rows(), n.value.cols());
  }
  root.grad.setOnes(1, 1);
  for (std::uint32_t i = out.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.needs_grad) backprop(n);
  }
}

void Tape::backprop(Node& n) {
  Node& in_a = nodes_[n.a];
  Node& in_b = nodes_[n.b];
  switch (n.op) {
    case Op::Constant:
    case Op::Variable:
      break;
    case Op::Layer: {
      // Pre-activation gradient from the stored output.
      switch (n.act) {
        case Activation::Tanh:
          scratch_ = (n.grad.array() * (1.0 - n.value.array().square())).matrix();
          break;
        case Activation::Relu:
          scratch_ = (n.value.array() > 0.0).select(n.grad.array(), 0.0).matrix();
          break;
        case Activation::Identity:
          scratch_ = n.grad * n.s0;
          break;
      }
      if (n.layer_grad != nullptr) {
        n.layer_grad->weight.noalias() += scratch_ * in_a.value.transpose();
        n.layer_grad->bias.noalias() += scratch_.rowwise().sum();
      }
      if (in_a.needs_grad) in_a.grad.noalias() += n.layer->weight.transpose() * scratch_;
      break;
    }
    case Op::AffineScalar:
      if (in_a.needs_grad) in_a.grad.array() += n.grad.array() * n.s0;
      break;
    case Op::Add:
      if (in_a.needs_grad) in_a.grad += n.grad;
      if (in_b.needs_grad) in_b.grad += n.grad;
      break;
    case Op::Sub:
      if (in_a.needs_grad) in_a.grad += n.grad;
      if (in_b.needs_grad) in_b.grad -= n.grad;
      break;
    case Op::Mul:
      if (in_a.needs_grad) in_a.grad.array() += n.grad.array() * in_b.value.array();
      if (in_b.needs_grad) in_b.grad.array() += n.grad.array() * in_a.value.array();
      break;
    case Op::MulConst:
      if (in_a.needs_grad) in_a.grad.array() += n.grad.array() * n.aux.array();
      break;
    case Op::ColumnSum:
      if (in_a.needs_grad) in_a.grad.rowwise() += n.grad.row(0);
      break;
    case Op::Sum:
      if (in_a.needs_grad) in_a.grad.array() += n.grad(0, 0);
      break;
    case Op::Select:
      if (in_a.needs_grad) in_a.grad.array() += (n.aux.array() != 0.0).select(0.0, n.grad.array());
      if (in_b.needs_grad) in_b.grad.array() += (n.aux.array() != 0.0).select(n.grad.array(), 0.0);
      break;
    case Op::Linearized:
      if (in_a.needs_grad) in_a.grad.array() += n.aux.array().rowwise() * n.grad.row(0).array();
      if (in_b.needs_grad) in_b.grad.array() += n.aux2.array().rowwise() * n.grad.row(0).array();
      break;
    case Op::Mse:
      if (in_a.needs_grad) {
        in_a.grad.array() += n.aux.array() * (2.0 * n.grad(0, 0) / static_cast<double>(n.aux.size()));
      }
      break;
  }
}

}  // namespace deepbarrier::nn
