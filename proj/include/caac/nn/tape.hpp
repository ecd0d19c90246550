#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "caac/nn/params.hpp"

namespace caac::nn {

/// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t id = 0;
};

/// Reverse-mode computation record over vectors.
///
/// Every operation appends a node holding its output vector. Parameter leaves
/// reference the ParameterSet storage directly (no copy), so a set must not be
/// modified while a tape that references it is alive. After `backward(root)`
/// the gradient of every node is available, and `collect` adds the gradients of
/// one ParameterSet's leaves into a Gradients buffer.
///
/// `clear()` keeps the arenas' capacity; one tape per thread can be reused for
/// an entire training run without reallocating.
class Tape {
 public:
  Var constant(std::span<const double> values);
  Var constant(double value);
  /// Leaf for parameter `index` of `set`; a matrix leaf when the tensor is rank 2.
  Var param(const ParameterSet& set, std::size_t index);

  Var matvec(Var matrix, Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var scale(Var a, double s);
  Var scale_by(Var vec, Var scalar);  // vec * scalar, scalar a size-1 var
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var leaky_relu(Var a, double slope);
  Var concat(Var a, Var b);
  Var sum(Var a);
  Var dot(Var a, Var b);
  Var square(Var a);
  Var squared_norm(Var a);
  Var softmax(Var a);
  Var stack(std::span<const Var> scalars);
  Var element(Var a, std::size_t k);
  Var add_n(std::span<const Var> terms);

  std::span<const double> value(Var v) const;
  double scalar(Var v) const;
  std::span<const double> grad(Var v) const;
  std::size_t size(Var v) const { return nodes_[v.id].size; }
  std::size_t node_count() const { return nodes_.size(); }

  /// Seeds d(root)/d(root) = 1 and propagates to every node. Root must be size 1.
  void backward(Var root);
  /// Adds gradients of all leaves referencing `set` into `out`.
  void collect(const ParameterSet& set, Gradients& out) const;

  void clear();

 private:
  enum class Op : std::uint8_t {
    constant,
    param,
    matvec,
    add,
    sub,
    mul,
    scale,
    scale_by,
    tanh,
    sigmoid,
    leaky_relu,
    concat,
    sum,
    dot,
    square,
    squared_norm,
    softmax,
    stack,
    element,
    add_n,
  };

  struct Node {
    Op op = Op::constant;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::uint32_t offset = 0;  // into values_ / grads_
    std::uint32_t size = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::uint32_t list_offset = 0;  // into inputs_ for stack / add_n
    std::uint32_t list_size = 0;
    double attr = 0.0;
    const double* external = nullptr;  // parameter storage
    const ParameterSet* set = nullptr;
    std::uint32_t param_index = 0;
  };

  Var push(Node node);
  Node& node(Var v) { return nodes_[v.id]; }
  const Node& node(Var v) const { return nodes_[v.id]; }
  const double* vals(const Node& n) const {
    return n.external != nullptr ? n.external : values_.data() + n.offset;
  }
  double* out_vals(const Node& n) { return values_.data() + n.offset; }
  double* grads(const Node& n) { return grads_.data() + n.offset; }
  void require_same_size(Var a, Var b, const char* op) const;

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<std::uint32_t> inputs_;
  std::uint32_t grad_extent_ = 0;
  bool has_grads_ = false;
};

}  // namespace caac::nn
