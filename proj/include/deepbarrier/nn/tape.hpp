#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace deepbarrier::nn {

using Matrix = Eigen::MatrixXd;

enum class Activation : std::uint8_t { Tanh, Relu, Identity };

struct DenseLayer {
  Matrix weight;          // out x in
  Eigen::VectorXd bias;   // out
};

/// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t id = 0;
};

/// Reverse-mode differentiation over batched matrices (features x batch).
///
/// Operations are appended in evaluation order, so the node index is a
/// topological order; backward() walks it once in reverse. Node storage is
/// kept across clear() calls and reused when shapes repeat, which is the
/// common case when the same graph is rebuilt every mini-batch.
class Tape {
 public:
  void clear() noexcept { size_ = 0; }
  std::size_t size() const noexcept { return size_; }

  /// Leaf without gradient.
  Var constant(const Eigen::Ref<const Matrix>& value);
  /// Leaf whose gradient is kept and can be read after backward().
  Var variable(const Eigen::Ref<const Matrix>& value);

  /// scale * act(W x + b); scale must be 1 unless act is Identity.
  /// Parameter gradients accumulate into layer_grad when it is non-null.
  Var layer(Var x, const DenseLayer& layer, DenseLayer* layer_grad, Activation act, double scale = 1.0);

  /// a * x + shift, elementwise.
  Var affine_scalar(Var x, double a, double shift = 0.0);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var mul_const(Var a, const Eigen::Ref<const Matrix>& c);
  /// 1 x batch sums over rows.
  Var column_sum(Var a);
  /// 1 x 1 sum over all elements.
  Var sum(Var a);
  /// mask(i,j) != 0 ? b : a. Gradients route by the same mask.
  Var select(Var a, Var b, const Eigen::Ref<const Matrix>& mask);
  /// 1 x batch node with a caller-computed value and local partials:
  /// d value(0, p) / d a(k, p) = da(k, p), likewise for b.
  Var linearized(const Eigen::Ref<const Matrix>& value, Var a, const Eigen::Ref<const Matrix>& da, Var b,
                 const Eigen::Ref<const Matrix>& db);
  /// 1 x 1 mean over all elements of (a - target)^2.
  Var mean_squared_error(Var a, const Eigen::Ref<const Matrix>& target);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  /// Valid after backward() for nodes that take part in differentiation.
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  /// Seeds d out / d out = 1 for a 1 x 1 node and propagates to every
  /// recorded node before it.
  void backward(Var out);

 private:
  enum class Op : std::uint8_t {
    Constant, Variable, Layer, AffineScalar, Add, Sub, Mul, MulConst, ColumnSum, Sum, Select, Linearized, Mse
  };

  struct Node {
    Op op = Op::Constant;
    bool needs_grad = false;
    Activation act = Activation::Identity;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double s0 = 0.0;
    double s1 = 0.0;
    const DenseLayer* layer = nullptr;
    DenseLayer* layer_grad = nullptr;
    Matrix value;
    Matrix grad;
    Matrix aux;
    Matrix aux2;
  };

  Node& push(Op op);
  bool needs(Var v) const { return nodes_[v.id].needs_grad; }
  void backprop(Node& node);

  std::vector<Node> nodes_;
  std::size_t size_ = 0;
  Matrix scratch_;
};

/// Elementwise activation shared by the taped and the plain forward paths.
void activate(Activation act, Matrix& values);

}  // namespace deepbarrier::nn
