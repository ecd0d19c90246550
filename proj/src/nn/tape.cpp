#include "caac/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "caac/errors.hpp"

namespace caac::nn {

namespace {

double sigmoid_of(double x) {
  if (x >= 0.0) {
    const double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

}  // namespace

Var Tape::push(Node n) {
  n.offset = grad_extent_;
  grad_extent_ += n.size;
  if (values_.size() < grad_extent_) {
    values_.resize(std::max<std::size_t>(grad_extent_, values_.size() * 2));
  }
  nodes_.push_back(n);
  has_grads_ = false;
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Tape::clear() {
  nodes_.clear();
  inputs_.clear();
  grad_extent_ = 0;
  has_grads_ = false;
}

void Tape::require_same_size(Var a, Var b, const char* op) const {
  if (node(a).size != node(b).size) {
    throw ArgumentError(std::string(op) + ": operand sizes differ (" +
                        std::to_string(node(a).size) + " vs " + std::to_string(node(b).size) +
                        ")");
  }
}

Var Tape::constant(std::span<const double> v) {
  Node n;
  n.op = Op::constant;
  n.size = static_cast<std::uint32_t>(v.size());
  Var out = push(n);
  std::copy(v.begin(), v.end(), out_vals(node(out)));
  return out;
}

Var Tape::constant(double value) { return constant(std::span<const double>(&value, 1)); }

Var Tape::param(const ParameterSet& set, std::size_t index) {
  const Tensor& t = set[index].value;
  Node n;
  n.op = Op::param;
  n.size = static_cast<std::uint32_t>(t.size());
  n.rows = static_cast<std::uint32_t>(t.rows());
  n.cols = static_cast<std::uint32_t>(t.shape.size() >= 2 ? t.cols() : t.size());
  n.external = t.data.data();
  n.set = &set;
  n.param_index = static_cast<std::uint32_t>(index);
  return push(n);
}

Var Tape::matvec(Var matrix, Var x) {
  const Node& m = node(matrix);
  if (m.op != Op::param || m.rows * m.cols != m.size) {
    throw ArgumentError("matvec: left operand must be a matrix parameter");
  }
  if (node(x).size != m.cols) {
    throw ArgumentError("matvec: input length " + std::to_string(node(x).size) +
                        " does not match matrix columns " + std::to_string(m.cols));
  }
  Node n;
  n.op = Op::matvec;
  n.a = matrix.id;
  n.b = x.id;
  n.size = m.rows;
  Var out = push(n);
  const Node& mm = node(matrix);
  const double* w = vals(mm);
  const double* xv = vals(node(x));
  double* y = out_vals(node(out));
  const std::uint32_t cols = mm.cols;
  for (std::uint32_t r = 0; r < mm.rows; ++r) {
    const double* row = w + static_cast<std::size_t>(r) * cols;
    double acc = 0.0;
    for (std::uint32_t c = 0; c < cols; ++c) acc += row[c] * xv[c];
    y[r] = acc;
  }
  return out;
}

Var Tape::add(Var a, Var b) {
  require_same_size(a, b, "add");
  Node n;
  n.op = Op::add;
  n.a = a.id;
  n.b = b.id;
  n.size = node(a).size;
  Var out = push(n);
  const double* x = vals(node(a));
  const double* y = vals(node(b));
  double* o = out_vals(node(out));
  for (std::uint32_t i = 0; i < node(out).size; ++i) o[i] = x[i] + y[i];
  return out;
}

Var Tape::sub(Var a, Var b) {
  require_same_size(a, b, "sub");
  Node n;
  n.op = Op::sub;
  n.a = a.id;
  n.b = b.id;
  n.size = node(a).size;
  Var out = push(n);
  const double* x = vals(node(a));
  const double* y = vals(node(b));
  double* o = out_vals(node(out));
  for (std::uint32_t i = 0; i < node(out).size; ++i) o[i] = x[i] - y[i];
  return out;
}

Var Tape::mul(Var a, Var b) {
  require_same_size(a, b, "mul");
  Node n;
  n.op = Op::mul;
  n.a = a.id;
  n.b = b.id;
  n.size = node(a).size;
  Var out = push(n);
  const double* x = vals(node(a));
  const double* y = vals(node(b));
  double* o = out_vals(node(out));
  for (std::uint32_t i = 0; i < node(out).size; ++i) o[i] = x[i] * y[i];
  return out;
}

Var Tape::scale(Var a, double s) {
  Node n;
  n.op = Op::scale;
  n.a = a.id;
  n.size = node(a).size;
  n.attr = s;
  Var out = push(n);
  const double* x = vals(node(a));
  double* o = out_vals(node(out));
  for (std::uint32_t i = 0; i < node(out).size; ++i) o[i] = x[i] * s;
  return out;
}

Var Tape::scale_by(Var vec, Var scalar) {
  if (node(scalar).size != 1) throw ArgumentError("scale_by: scalar operand must have size 1");
  Node n;
  n.op = Op::scale_by;
  n.a = vec.id;
  n.b = scalar.id;
  n.size = node(vec).size;
  Var out = push(n);
  const double* x = vals(node(vec));
  const double s = vals(node(scalar))[0];
  double* o = out_vals(node(out));
  for (std::uint32_t i = 0; i < node(out).size; ++i) o[i] = x[i] * s;
  return out;
}

Var Tape::tanh(Var a) {
  Node n;
  n.op = Op::tanh;
  n.a = a.id;
  n.size = node(a).size;
  Var out = push(n);
  const double* x = vals(node(a));
  double* o = out_vals(node(out));
  for (std::uint32_t i = 0; i < node(out).size; ++i) o[i] = std::tanh(x[i]);
  return out;
}

Var Tape::sigmoid(Var a) {
  Node n;
  n.op = Op::sigmoid;
  n.a = a.id;
  n.size = node(a).size;
  Var out = push(n);
  const double* x = vals(node(a));
  double* o = out_vals(node(out));
  for (std::uint32_t i = 0; i < node(out).size; ++i) o[i] = sigmoid_of(x[i]);
  return out;
}

Var Tape::leaky_relu(Var a, double slope) {
  Node n;
  n.op = Op::leaky_relu;
  n.a = a.id;
  n.size = node(a).size;
  n.attr = slope;
  Var out = push(n);
  const double* x = vals(node(a));
  double* o = out_vals(node(out));
  for (std::uint32_t i = 0; i < node(out).size; ++i) o[i] = x[i] >= 0.0 ? x[i] : slope * x[i];
  return out;
}

Var Tape::concat(Var a, Var b) {
  Node n;
  n.op = Op::concat;
  n.a = a.id;
  n.b = b.id;
  n.size = node(a).size + node(b).size;
  Var out = push(n);
  const Node& na = node(a);
  const Node& nb = node(b);
  double* o = out_vals(node(out));
  std::copy_n(vals(na), na.size, o);
  std::copy_n(vals(nb), nb.size, o + na.size);
  return out;
}

Var Tape::sum(Var a) {
  Node n;
  n.op = Op::sum;
  n.a = a.id;
  n.size = 1;
  Var out = push(n);
  const double* x = vals(node(a));
  double acc = 0.0;
  for (std::uint32_t i = 0; i < node(a).size; ++i) acc += x[i];
  out_vals(node(out))[0] = acc;
  return out;
}

Var Tape::dot(Var a, Var b) {
  require_same_size(a, b, "dot");
  Node n;
  n.op = Op::dot;
  n.a = a.id;
  n.b = b.id;
  n.size = 1;
  Var out = push(n);
  const double* x = vals(node(a));
  const double* y = vals(node(b));
  double acc = 0.0;
  for (std::uint32_t i = 0; i < node(a).size; ++i) acc += x[i] * y[i];
  out_vals(node(out))[0] = acc;
  return out;
}

Var Tape::square(Var a) {
  Node n;
  n.op = Op::square;
  n.a = a.id;
  n.size = node(a).size;
  Var out = push(n);
  const double* x = vals(node(a));
  double* o = out_vals(node(out));
  for (std::uint32_t i = 0; i < node(out).size; ++i) o[i] = x[i] * x[i];
  return out;
}

Var Tape::squared_norm(Var a) {
  Node n;
  n.op = Op::squared_norm;
  n.a = a.id;
  n.size = 1;
  Var out = push(n);
  const double* x = vals(node(a));
  double acc = 0.0;
  for (std::uint32_t i = 0; i < node(a).size; ++i) acc += x[i] * x[i];
  out_vals(node(out))[0] = acc;
  return out;
}

Var Tape::softmax(Var a) {
  if (node(a).size == 0) throw ArgumentError("softmax: empty input");
  Node n;
  n.op = Op::softmax;
  n.a = a.id;
  n.size = node(a).size;
  Var out = push(n);
  const double* x = vals(node(a));
  double* o = out_vals(node(out));
  const std::uint32_t len = node(out).size;
  const double mx = *std::max_element(x, x + len);
  double total = 0.0;
  for (std::uint32_t i = 0; i < len; ++i) {
    o[i] = std::exp(x[i] - mx);
    total += o[i];
  }
  for (std::uint32_t i = 0; i < len; ++i) o[i] /= total;
  return out;
}

Var Tape::stack(std::span<const Var> scalars) {
  Node n;
  n.op = Op::stack;
  n.size = static_cast<std::uint32_t>(scalars.size());
  n.list_offset = static_cast<std::uint32_t>(inputs_.size());
  n.list_size = n.size;
  for (Var s : scalars) {
    if (node(s).size != 1) throw ArgumentError("stack: every operand must have size 1");
    inputs_.push_back(s.id);
  }
  Var out = push(n);
  double* o = out_vals(node(out));
  for (std::size_t i = 0; i < scalars.size(); ++i) o[i] = vals(node(scalars[i]))[0];
  return out;
}

Var Tape::element(Var a, std::size_t k) {
  if (k >= node(a).size) throw ArgumentError("element: index out of range");
  Node n;
  n.op = Op::element;
  n.a = a.id;
  n.size = 1;
  n.attr = static_cast<double>(k);
  Var out = push(n);
  out_vals(node(out))[0] = vals(node(a))[k];
  return out;
}

Var Tape::add_n(std::span<const Var> terms) {
  if (terms.empty()) throw ArgumentError("add_n: no operands");
  Node n;
  n.op = Op::add_n;
  n.size = node(terms[0]).size;
  n.list_offset = static_cast<std::uint32_t>(inputs_.size());
  n.list_size = static_cast<std::uint32_t>(terms.size());
  for (Var t : terms) {
    require_same_size(terms[0], t, "add_n");
    inputs_.push_back(t.id);
  }
  Var out = push(n);
  double* o = out_vals(node(out));
  const std::uint32_t len = node(out).size;
  std::fill_n(o, len, 0.0);
  for (Var t : terms) {
    const double* x = vals(node(t));
    for (std::uint32_t i = 0; i < len; ++i) o[i] += x[i];
  }
  return out;
}

std::span<const double> Tape::value(Var v) const {
  const Node& n = node(v);
  return {vals(n), n.size};
}

double Tape::scalar(Var v) const {
  const Node& n = node(v);
  if (n.size != 1) throw ArgumentError("scalar: value has size " + std::to_string(n.size));
  return vals(n)[0];
}

std::span<const double> Tape::grad(Var v) const {
  if (!has_grads_) throw StateError("grad: backward has not been run");
  const Node& n = node(v);
  return {grads_.data() + n.offset, n.size};
}

void Tape::backward(Var root) {
  if (node(root).size != 1) {
    throw ArgumentError("backward: root must be a scalar, got size " +
                        std::to_string(node(root).size));
  }
  if (grads_.size() < grad_extent_) grads_.resize(values_.size());
  std::fill_n(grads_.begin(), grad_extent_, 0.0);
  grads_[node(root).offset] = 1.0;

  for (std::uint32_t id = root.id + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    const double* g = grads_.data() + n.offset;
    switch (n.op) {
      case Op::constant:
      case Op::param:
        break;
      case Op::matvec: {
        const Node& m = nodes_[n.a];
        const Node& x = nodes_[n.b];
        const double* w = vals(m);
        const double* xv = vals(x);
        double* gw = grads_.data() + m.offset;
        double* gx = grads_.data() + x.offset;
        const std::uint32_t cols = m.cols;
        for (std::uint32_t r = 0; r < m.rows; ++r) {
          const double gr = g[r];
          if (gr == 0.0) continue;
          const double* row = w + static_cast<std::size_t>(r) * cols;
          double* grow = gw + static_cast<std::size_t>(r) * cols;
          for (std::uint32_t c = 0; c < cols; ++c) {
            grow[c] += gr * xv[c];
            gx[c] += gr * row[c];
          }
        }
        break;
      }
      case Op::add: {
        double* ga = grads_.data() + nodes_[n.a].offset;
        double* gb = grads_.data() + nodes_[n.b].offset;
        for (std::uint32_t i = 0; i < n.size; ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      }
      case Op::sub: {
        double* ga = grads_.data() + nodes_[n.a].offset;
        double* gb = grads_.data() + nodes_[n.b].offset;
        for (std::uint32_t i = 0; i < n.size; ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      }
      case Op::mul: {
        const double* x = vals(nodes_[n.a]);
        const double* y = vals(nodes_[n.b]);
        double* ga = grads_.data() + nodes_[n.a].offset;
        double* gb = grads_.data() + nodes_[n.b].offset;
        for (std::uint32_t i = 0; i < n.size; ++i) {
          ga[i] += g[i] * y[i];
          gb[i] += g[i] * x[i];
        }
        break;
      }
      case Op::scale: {
        double* ga = grads_.data() + nodes_[n.a].offset;
        for (std::uint32_t i = 0; i < n.size; ++i) ga[i] += g[i] * n.attr;
        break;
      }
      case Op::scale_by: {
        const double* x = vals(nodes_[n.a]);
        const double s = vals(nodes_[n.b])[0];
        double* ga = grads_.data() + nodes_[n.a].offset;
        double gs = 0.0;
        for (std::uint32_t i = 0; i < n.size; ++i) {
          ga[i] += g[i] * s;
          gs += g[i] * x[i];
        }
        grads_[nodes_[n.b].offset] += gs;
        break;
      }
      case Op::tanh: {
        const double* y = values_.data() + n.offset;
        double* ga = grads_.data() + nodes_[n.a].offset;
        for (std::uint32_t i = 0; i < n.size; ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
        break;
      }
      case Op::sigmoid: {
        const double* y = values_.data() + n.offset;
        double* ga = grads_.data() + nodes_[n.a].offset;
        for (std::uint32_t i = 0; i < n.size; ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
        break;
      }
      case Op::leaky_relu: {
        const double* x = vals(nodes_[n.a]);
        double* ga = grads_.data() + nodes_[n.a].offset;
        for (std::uint32_t i = 0; i < n.size; ++i) ga[i] += x[i] >= 0.0 ? g[i] : n.attr * g[i];
        break;
      }
      case Op::concat: {
        const Node& na = nodes_[n.a];
        const Node& nb = nodes_[n.b];
        double* ga = grads_.data() + na.offset;
        double* gb = grads_.data() + nb.offset;
        for (std::uint32_t i = 0; i < na.size; ++i) ga[i] += g[i];
        for (std::uint32_t i = 0; i < nb.size; ++i) gb[i] += g[na.size + i];
        break;
      }
      case Op::sum: {
        const Node& na = nodes_[n.a];
        double* ga = grads_.data() + na.offset;
        for (std::uint32_t i = 0; i < na.size; ++i) ga[i] += g[0];
        break;
      }
      case Op::dot: {
        const Node& na = nodes_[n.a];
        const Node& nb = nodes_[n.b];
        const double* x = vals(na);
        const double* y = vals(nb);
        double* ga = grads_.data() + na.offset;
        double* gb = grads_.data() + nb.offset;
        for (std::uint32_t i = 0; i < na.size; ++i) {
          ga[i] += g[0] * y[i];
          gb[i] += g[0] * x[i];
        }
        break;
      }
      case Op::square: {
        const double* x = vals(nodes_[n.a]);
        double* ga = grads_.data() + nodes_[n.a].offset;
        for (std::uint32_t i = 0; i < n.size; ++i) ga[i] += 2.0 * x[i] * g[i];
        break;
      }
      case Op::squared_norm: {
        const Node& na = nodes_[n.a];
        const double* x = vals(na);
        double* ga = grads_.data() + na.offset;
        for (std::uint32_t i = 0; i < na.size; ++i) ga[i] += 2.0 * x[i] * g[0];
        break;
      }
      case Op::softmax: {
        const double* y = values_.data() + n.offset;
        double* ga = grads_.data() + nodes_[n.a].offset;
        double inner = 0.0;
        for (std::uint32_t i = 0; i < n.size; ++i) inner += g[i] * y[i];
        for (std::uint32_t i = 0; i < n.size; ++i) ga[i] += y[i] * (g[i] - inner);
        break;
      }
      case Op::stack: {
        for (std::uint32_t i = 0; i < n.list_size; ++i) {
          grads_[nodes_[inputs_[n.list_offset + i]].offset] += g[i];
        }
        break;
      }
      case Op::element: {
        grads_[nodes_[n.a].offset + static_cast<std::uint32_t>(n.attr)] += g[0];
        break;
      }
      case Op::add_n: {
        for (std::uint32_t k = 0; k < n.list_size; ++k) {
          double* gt = grads_.data() + nodes_[inputs_[n.list_offset + k]].offset;
          for (std::uint32_t i = 0; i < n.size; ++i) gt[i] += g[i];
        }
        break;
      }
    }
  }
  has_grads_ = true;
}

void Tape::collect(const ParameterSet& set, Gradients& out) const {
  if (!has_grads_) throw StateError("collect: backward has not been run");
  if (!out.matches(set)) throw ArgumentError("collect: gradient buffer does not match parameters");
  for (const Node& n : nodes_) {
    if (n.op != Op::param || n.set != &set) continue;
    auto& dst = out[n.param_index];
    const double* g = grads_.data() + n.offset;
    for (std::uint32_t i = 0; i < n.size; ++i) dst[i] += g[i];
  }
}

}  // namespace caac::nn
