// Dense float64 tensors with reverse-mode automatic differentiation.
//
// Tensors are cheap handles onto shared nodes. Every op records its parents
// and an adjoint closure; backward() replays the closures in reverse
// topological order. All reductions run in a fixed order, so identical
// inputs give bit-identical values and gradients across runs.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace fuzzyattn {

// Shape/contract violations: the caller asked for something impossible.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Numeric breakdown at runtime (NaN input, non-convergence, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated lazily, same length as value
  bool requires_grad = false;
  bool leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

}  // namespace detail

// Whether newly created ops record the graph (thread-local).
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_vector(Shape shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar_value(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::int64_t ndim() const { return static_cast<std::int64_t>(shape().size()); }
  std::int64_t size() const;
  std::int64_t rows() const;  // 2-D only
  std::int64_t cols() const;  // 2-D only

  std::vector<double>& data();
  const std::vector<double>& data() const;
  double scalar() const;
  double at(std::int64_t r, std::int64_t c) const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool has_grad() const;
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  void zero_grad();

  // Reverse-mode sweep from a scalar. Leaf gradients accumulate across
  // calls; intermediate gradients are reset on every sweep.
  void backward() const;

  std::shared_ptr<detail::Node> node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Elementwise and structural ops. All inputs must be defined.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_rowvec(const Tensor& x, const Tensor& v);
// Adds `tile` ([s, m]) to every consecutive s-row group of x ([g*s, m]).
Tensor add_tiled_rows(const Tensor& x, const Tensor& tile);
Tensor relu(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor square(const Tensor& x);

// Matrix product over the trailing two axes. Leading batch axes must match
// exactly, or one operand may omit them entirely.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);  // 2-D

Tensor sum(const Tensor& x);  // scalar
// Mean over each consecutive group of `group_rows` rows: [g*k, m] -> [g, m].
Tensor mean_rows(const Tensor& x, std::int64_t group_rows);

// Numerically stable softmax along `axis` (1-D or 2-D input). Rejects
// non-finite input.
Tensor softmax(const Tensor& x, int axis);

// Per-row normalization to zero mean / unit variance, then affine.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps);

// z[s,r] = -sum_d (q[s,d] - centers[r,d])^2 / (2 * widths[r,d]^2)
Tensor neg_scaled_sqdist(const Tensor& q, const Tensor& centers,
                         const Tensor& widths);

Tensor slice_rows(const Tensor& x, std::int64_t start, std::int64_t count);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor reshape(const Tensor& x, Shape shape);

// Mean over rows of -log softmax(logits)[label]; logits [n, c].
Tensor softmax_cross_entropy_mean(const Tensor& logits,
                                  const std::vector<int>& labels);

}  // namespace fuzzyattn
