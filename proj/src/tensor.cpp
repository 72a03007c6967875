#include "fuzzyattn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>
#include <utility>

namespace fuzzyattn {

namespace {

thread_local bool g_grad_enabled = true;

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

// ---------------------------------------------------------------------------
// dense kernels (row-major)

// c[n,m] = a[n,k] * b[k,m]
void gemm_nn(const double* a, const double* b, double* c, std::int64_t n,
             std::int64_t k, std::int64_t m) {
  std::fill(c, c + n * m, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * m;
    for (std::int64_t l = 0; l < k; ++l) {
      const double av = arow[l];
      const double* brow = b + l * m;
      for (std::int64_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[n,m] += a[n,k] * b[m,k]^T
void gemm_nt_acc(const double* a, const double* b, double* c, std::int64_t n,
                 std::int64_t k, std::int64_t m) {
  for (std::int64_t i = 0; i < n; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * m;
    for (std::int64_t j = 0; j < m; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (std::int64_t l = 0; l < k; ++l) acc += arow[l] * brow[l];
      crow[j] += acc;
    }
  }
}

// c[k,m] += a[n,k]^T * b[n,m]
void gemm_tn_acc(const double* a, const double* b, double* c, std::int64_t n,
                 std::int64_t k, std::int64_t m) {
  for (std::int64_t l = 0; l < n; ++l) {
    const double* arow = a + l * k;
    const double* brow = b + l * m;
    for (std::int64_t i = 0; i < k; ++i) {
      const double av = arow[i];
      double* crow = c + i * m;
      for (std::int64_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// ---------------------------------------------------------------------------
// graph plumbing

NodePtr leaf_node(Shape shape, std::vector<double> value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  n->leaf = true;
  return n;
}

Tensor make_op(Shape shape, std::vector<double> value,
               std::vector<NodePtr> parents,
               std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->leaf = false;
  bool track = g_grad_enabled;
  if (track) {
    bool any = false;
    for (const auto& p : parents) any = any || p->requires_grad;
    track = any;
  }
  n->requires_grad = track;
  if (track) {
    n->parents = std::move(parents);
    n->backprop = std::move(backprop);
  }
  return Tensor(std::move(n));
}

void check_defined(const Tensor& t, const char* what) {
  if (!t.defined()) throw ContractError(std::string(what) + ": undefined tensor");
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
}

void check_2d(const Tensor& t, const char* op) {
  if (t.ndim() != 2) {
    throw ShapeError(std::string(op) + ": expected 2-D tensor, got " +
                     shape_str(t.shape()));
  }
}

}  // namespace

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string out = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

// ---------------------------------------------------------------------------
// Tensor

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  for (auto d : shape) {
    if (d <= 0) throw ShapeError("zeros: non-positive dimension in " + shape_str(shape));
  }
  std::vector<double> v(static_cast<size_t>(shape_numel(shape)), 0.0);
  return Tensor(leaf_node(std::move(shape), std::move(v), requires_grad));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.data().begin(), t.data().end(), value);
  return t;
}

Tensor Tensor::from_vector(Shape shape, std::vector<double> values,
                           bool requires_grad) {
  if (shape_numel(shape) != static_cast<std::int64_t>(values.size())) {
    throw ShapeError("from_vector: " + std::to_string(values.size()) +
                     " values do not fill shape " + shape_str(shape));
  }
  return Tensor(leaf_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar_value(double value) {
  return from_vector({1}, {value}, false);
}

const Shape& Tensor::shape() const {
  check_defined(*this, "shape");
  return node_->shape;
}

std::int64_t Tensor::size() const {
  check_defined(*this, "size");
  return static_cast<std::int64_t>(node_->value.size());
}

std::int64_t Tensor::rows() const {
  check_2d(*this, "rows");
  return shape()[0];
}

std::int64_t Tensor::cols() const {
  check_2d(*this, "cols");
  return shape()[1];
}

std::vector<double>& Tensor::data() {
  check_defined(*this, "data");
  return node_->value;
}

const std::vector<double>& Tensor::data() const {
  check_defined(*this, "data");
  return node_->value;
}

double Tensor::scalar() const {
  if (size() != 1) {
    throw ContractError("scalar: tensor has shape " + shape_str(shape()));
  }
  return node_->value[0];
}

double Tensor::at(std::int64_t r, std::int64_t c) const {
  check_2d(*this, "at");
  return node_->value[static_cast<size_t>(r * cols() + c)];
}

bool Tensor::requires_grad() const {
  check_defined(*this, "requires_grad");
  return node_->requires_grad;
}

void Tensor::set_requires_grad(bool value) {
  check_defined(*this, "set_requires_grad");
  if (!node_->leaf) throw ContractError("set_requires_grad: only leaves");
  node_->requires_grad = value;
}

bool Tensor::has_grad() const {
  check_defined(*this, "has_grad");
  return node_->grad.size() == node_->value.size();
}

std::vector<double>& Tensor::grad() {
  check_defined(*this, "grad");
  if (!has_grad()) throw ContractError("grad: no gradient populated");
  return node_->grad;
}

const std::vector<double>& Tensor::grad() const {
  check_defined(*this, "grad");
  if (!has_grad()) throw ContractError("grad: no gradient populated");
  return node_->grad;
}

void Tensor::zero_grad() {
  check_defined(*this, "zero_grad");
  node_->grad.assign(node_->value.size(), 0.0);
}

void Tensor::backward() const {
  check_defined(*this, "backward");
  if (size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_str(shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS; parents are visited in recorded order so the
  // replay order is identical across runs.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [cur, idx] = stack.back();
    if (idx < cur->parents.size()) {
      Node* next = cur->parents[idx].get();
      ++idx;
      if (next->requires_grad && seen.insert(next).second) {
        stack.emplace_back(next, 0);
      }
    } else {
      order.push_back(cur);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    n->ensure_grad();
    if (!n->leaf) std::fill(n->grad.begin(), n->grad.end(), 0.0);
  }
  Node* root = node_.get();
  root->grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop) n->backprop(*n);
  }
}

// ---------------------------------------------------------------------------
// ops

Tensor add(const Tensor& a, const Tensor& b) {
  check_defined(a, "add");
  check_defined(b, "add");
  check_same_shape(a, b, "add");
  std::vector<double> out(a.data());
  const auto& bv = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  Node* pa = a.node().get();
  Node* pb = b.node().get();
  return make_op(a.shape(), std::move(out), {a.node(), b.node()},
                 [pa, pb](Node& self) {
                   if (pa->requires_grad) {
                     pa->ensure_grad();
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       pa->grad[i] += self.grad[i];
                   }
                   if (pb->requires_grad) {
                     pb->ensure_grad();
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       pb->grad[i] += self.grad[i];
                   }
                 });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_defined(a, "sub");
  check_defined(b, "sub");
  check_same_shape(a, b, "sub");
  std::vector<double> out(a.data());
  const auto& bv = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  Node* pa = a.node().get();
  Node* pb = b.node().get();
  return make_op(a.shape(), std::move(out), {a.node(), b.node()},
                 [pa, pb](Node& self) {
                   if (pa->requires_grad) {
                     pa->ensure_grad();
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       pa->grad[i] += self.grad[i];
                   }
                   if (pb->requires_grad) {
                     pb->ensure_grad();
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       pb->grad[i] -= self.grad[i];
                   }
                 });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_defined(a, "mul");
  check_defined(b, "mul");
  check_same_shape(a, b, "mul");
  std::vector<double> out(a.data());
  const auto& bv = b.data();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  Node* pa = a.node().get();
  Node* pb = b.node().get();
  return make_op(a.shape(), std::move(out), {a.node(), b.node()},
                 [pa, pb](Node& self) {
                   if (pa->requires_grad) {
                     pa->ensure_grad();
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       pa->grad[i] += self.grad[i] * pb->value[i];
                   }
                   if (pb->requires_grad) {
                     pb->ensure_grad();
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       pb->grad[i] += self.grad[i] * pa->value[i];
                   }
                 });
}

Tensor scale(const Tensor& a, double factor) {
  check_defined(a, "scale");
  std::vector<double> out(a.data());
  for (double& v : out) v *= factor;
  Node* pa = a.node().get();
  return make_op(a.shape(), std::move(out), {a.node()},
                 [pa, factor](Node& self) {
                   if (!pa->requires_grad) return;
                   pa->ensure_grad();
                   for (size_t i = 0; i < self.grad.size(); ++i)
                     pa->grad[i] += factor * self.grad[i];
                 });
}

Tensor add_rowvec(const Tensor& x, const Tensor& v) {
  check_defined(x, "add_rowvec");
  check_defined(v, "add_rowvec");
  check_2d(x, "add_rowvec");
  if (v.ndim() != 1 || v.size() != x.cols()) {
    throw ShapeError("add_rowvec: vector " + shape_str(v.shape()) +
                     " does not match columns of " + shape_str(x.shape()));
  }
  const std::int64_t n = x.rows(), m = x.cols();
  std::vector<double> out(x.data());
  const auto& vv = v.data();
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < m; ++j) out[static_cast<size_t>(i * m + j)] += vv[static_cast<size_t>(j)];
  Node* px = x.node().get();
  Node* pv = v.node().get();
  return make_op(x.shape(), std::move(out), {x.node(), v.node()},
                 [px, pv, n, m](Node& self) {
                   if (px->requires_grad) {
                     px->ensure_grad();
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       px->grad[i] += self.grad[i];
                   }
                   if (pv->requires_grad) {
                     pv->ensure_grad();
                     for (std::int64_t i = 0; i < n; ++i)
                       for (std::int64_t j = 0; j < m; ++j)
                         pv->grad[static_cast<size_t>(j)] +=
                             self.grad[static_cast<size_t>(i * m + j)];
                   }
                 });
}

Tensor add_tiled_rows(const Tensor& x, const Tensor& tile) {
  check_defined(x, "add_tiled_rows");
  check_defined(tile, "add_tiled_rows");
  check_2d(x, "add_tiled_rows");
  check_2d(tile, "add_tiled_rows");
  const std::int64_t s = tile.rows(), m = tile.cols();
  if (x.cols() != m || x.rows() % s != 0) {
    throw ShapeError("add_tiled_rows: tile " + shape_str(tile.shape()) +
                     " does not tile " + shape_str(x.shape()));
  }
  const std::int64_t groups = x.rows() / s;
  std::vector<double> out(x.data());
  const auto& tv = tile.data();
  for (std::int64_t g = 0; g < groups; ++g) {
    double* block = out.data() + g * s * m;
    for (std::int64_t i = 0; i < s * m; ++i) block[i] += tv[static_cast<size_t>(i)];
  }
  Node* px = x.node().get();
  Node* pt = tile.node().get();
  return make_op(x.shape(), std::move(out), {x.node(), tile.node()},
                 [px, pt, groups, s, m](Node& self) {
                   if (px->requires_grad) {
                     px->ensure_grad();
                     for (size_t i = 0; i < self.grad.size(); ++i)
                       px->grad[i] += self.grad[i];
                   }
                   if (pt->requires_grad) {
                     pt->ensure_grad();
                     for (std::int64_t g = 0; g < groups; ++g) {
                       const double* block = self.grad.data() + g * s * m;
                       for (std::int64_t i = 0; i < s * m; ++i)
                         pt->grad[static_cast<size_t>(i)] += block[i];
                     }
                   }
                 });
}

Tensor relu(const Tensor& x) {
  check_defined(x, "relu");
  std::vector<double> out(x.data());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  Node* px = x.node().get();
  return make_op(x.shape(), std::move(out), {x.node()}, [px](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i)
      if (px->value[i] > 0.0) px->grad[i] += self.grad[i];
  });
}

Tensor exp(const Tensor& x) {
  check_defined(x, "exp");
  std::vector<double> out(x.data());
  for (double& v : out) v = std::exp(v);
  Node* px = x.node().get();
  return make_op(x.shape(), std::move(out), {x.node()}, [px](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i)
      px->grad[i] += self.grad[i] * self.value[i];
  });
}

Tensor log(const Tensor& x) {
  check_defined(x, "log");
  std::vector<double> out(x.data());
  for (double& v : out) v = std::log(v);
  Node* px = x.node().get();
  return make_op(x.shape(), std::move(out), {x.node()}, [px](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i)
      px->grad[i] += self.grad[i] / px->value[i];
  });
}

Tensor softplus(const Tensor& x) {
  check_defined(x, "softplus");
  std::vector<double> out(x.data());
  for (double& v : out) {
    // log(1 + e^v) without overflow on either tail
    v = std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
  }
  Node* px = x.node().get();
  return make_op(x.shape(), std::move(out), {x.node()}, [px](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i) {
      const double sig = 1.0 / (1.0 + std::exp(-px->value[i]));
      px->grad[i] += self.grad[i] * sig;
    }
  });
}

Tensor square(const Tensor& x) {
  check_defined(x, "square");
  std::vector<double> out(x.data());
  for (double& v : out) v *= v;
  Node* px = x.node().get();
  return make_op(x.shape(), std::move(out), {x.node()}, [px](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i)
      px->grad[i] += self.grad[i] * 2.0 * px->value[i];
  });
}

namespace {

struct MatmulDims {
  std::int64_t batch;  // number of trailing-matrix pairs
  std::int64_t n, k, m;
  bool a_batched, b_batched;
};

MatmulDims matmul_dims(const Tensor& a, const Tensor& b) {
  if (a.ndim() < 2 || b.ndim() < 2) {
    throw ShapeError("matmul: operands must have >= 2 dims, got " +
                     shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  MatmulDims d;
  d.n = sa[sa.size() - 2];
  d.k = sa[sa.size() - 1];
  if (sb[sb.size() - 2] != d.k) {
    throw ShapeError("matmul: inner dimensions disagree for " + shape_str(sa) +
                     " and " + shape_str(sb));
  }
  d.m = sb[sb.size() - 1];
  Shape batch_a(sa.begin(), sa.end() - 2);
  Shape batch_b(sb.begin(), sb.end() - 2);
  if (!batch_a.empty() && !batch_b.empty() && batch_a != batch_b) {
    throw ShapeError("matmul: batch dimensions disagree for " + shape_str(sa) +
                     " and " + shape_str(sb));
  }
  const Shape& batch = batch_a.empty() ? batch_b : batch_a;
  d.batch = shape_numel(batch);
  d.a_batched = !batch_a.empty();
  d.b_batched = !batch_b.empty();
  return d;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_defined(a, "matmul");
  check_defined(b, "matmul");
  const MatmulDims d = matmul_dims(a, b);

  Shape out_shape;
  const Shape& batch_src = d.a_batched ? a.shape() : b.shape();
  out_shape.assign(batch_src.begin(), batch_src.end() - 2);
  out_shape.push_back(d.n);
  out_shape.push_back(d.m);

  std::vector<double> out(static_cast<size_t>(d.batch * d.n * d.m));
  const double* ap = a.data().data();
  const double* bp = b.data().data();
  for (std::int64_t t = 0; t < d.batch; ++t) {
    const double* at = ap + (d.a_batched ? t * d.n * d.k : 0);
    const double* bt = bp + (d.b_batched ? t * d.k * d.m : 0);
    gemm_nn(at, bt, out.data() + t * d.n * d.m, d.n, d.k, d.m);
  }

  Node* pa = a.node().get();
  Node* pb = b.node().get();
  return make_op(std::move(out_shape), std::move(out), {a.node(), b.node()},
                 [pa, pb, d](Node& self) {
                   const double* gp = self.grad.data();
                   if (pa->requires_grad) {
                     pa->ensure_grad();
                     for (std::int64_t t = 0; t < d.batch; ++t) {
                       const double* gt = gp + t * d.n * d.m;
                       const double* bt =
                           pb->value.data() + (d.b_batched ? t * d.k * d.m : 0);
                       double* da =
                           pa->grad.data() + (d.a_batched ? t * d.n * d.k : 0);
                       gemm_nt_acc(gt, bt, da, d.n, d.m, d.k);
                     }
                   }
                   if (pb->requires_grad) {
                     pb->ensure_grad();
                     for (std::int64_t t = 0; t < d.batch; ++t) {
                       const double* gt = gp + t * d.n * d.m;
                       const double* at =
                           pa->value.data() + (d.a_batched ? t * d.n * d.k : 0);
                       double* db =
                           pb->grad.data() + (d.b_batched ? t * d.k * d.m : 0);
                       gemm_tn_acc(at, gt, db, d.n, d.k, d.m);
                     }
                   }
                 });
}

Tensor transpose(const Tensor& x) {
  check_defined(x, "transpose");
  check_2d(x, "transpose");
  const std::int64_t n = x.rows(), m = x.cols();
  std::vector<double> out(static_cast<size_t>(n * m));
  const auto& xv = x.data();
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < m; ++j)
      out[static_cast<size_t>(j * n + i)] = xv[static_cast<size_t>(i * m + j)];
  Node* px = x.node().get();
  return make_op({m, n}, std::move(out), {x.node()}, [px, n, m](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < m; ++j)
        px->grad[static_cast<size_t>(i * m + j)] +=
            self.grad[static_cast<size_t>(j * n + i)];
  });
}

Tensor sum(const Tensor& x) {
  check_defined(x, "sum");
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  Node* px = x.node().get();
  return make_op({1}, {acc}, {x.node()}, [px](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    const double g = self.grad[0];
    for (double& dv : px->grad) dv += g;
  });
}

Tensor mean_rows(const Tensor& x, std::int64_t group_rows) {
  check_defined(x, "mean_rows");
  check_2d(x, "mean_rows");
  if (group_rows <= 0 || x.rows() % group_rows != 0) {
    throw ShapeError("mean_rows: group of " + std::to_string(group_rows) +
                     " rows does not divide " + shape_str(x.shape()));
  }
  const std::int64_t groups = x.rows() / group_rows, m = x.cols();
  std::vector<double> out(static_cast<size_t>(groups * m), 0.0);
  const auto& xv = x.data();
  for (std::int64_t g = 0; g < groups; ++g)
    for (std::int64_t i = 0; i < group_rows; ++i)
      for (std::int64_t j = 0; j < m; ++j)
        out[static_cast<size_t>(g * m + j)] +=
            xv[static_cast<size_t>((g * group_rows + i) * m + j)];
  const double inv = 1.0 / static_cast<double>(group_rows);
  for (double& v : out) v *= inv;
  Node* px = x.node().get();
  return make_op({groups, m}, std::move(out), {x.node()},
                 [px, groups, group_rows, m, inv](Node& self) {
                   if (!px->requires_grad) return;
                   px->ensure_grad();
                   for (std::int64_t g = 0; g < groups; ++g)
                     for (std::int64_t i = 0; i < group_rows; ++i)
                       for (std::int64_t j = 0; j < m; ++j)
                         px->grad[static_cast<size_t>((g * group_rows + i) * m + j)] +=
                             inv * self.grad[static_cast<size_t>(g * m + j)];
                 });
}

namespace {

// softmax over contiguous stretches of `width` values spaced `stride` apart
void softmax_lanes(const std::vector<double>& in, std::vector<double>& out,
                   std::int64_t lanes, std::int64_t width, std::int64_t lane_stride,
                   std::int64_t elem_stride) {
  for (std::int64_t l = 0; l < lanes; ++l) {
    const std::int64_t base = l * lane_stride;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < width; ++i)
      mx = std::max(mx, in[static_cast<size_t>(base + i * elem_stride)]);
    double denom = 0.0;
    for (std::int64_t i = 0; i < width; ++i) {
      const size_t idx = static_cast<size_t>(base + i * elem_stride);
      out[idx] = std::exp(in[idx] - mx);
      denom += out[idx];
    }
    const double inv = 1.0 / denom;
    for (std::int64_t i = 0; i < width; ++i)
      out[static_cast<size_t>(base + i * elem_stride)] *= inv;
  }
}

}  // namespace

Tensor softmax(const Tensor& x, int axis) {
  check_defined(x, "softmax");
  if (x.ndim() != 1 && x.ndim() != 2) {
    throw ShapeError("softmax: expected 1-D or 2-D tensor, got " +
                     shape_str(x.shape()));
  }
  if (axis < 0 || axis >= x.ndim()) {
    throw ShapeError("softmax: axis " + std::to_string(axis) +
                     " out of range for " + shape_str(x.shape()));
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw NumericError("softmax: non-finite input");
  }

  std::int64_t lanes, width, lane_stride, elem_stride;
  if (x.ndim() == 1) {
    lanes = 1;
    width = x.size();
    lane_stride = 0;
    elem_stride = 1;
  } else if (axis == 1) {
    lanes = x.rows();
    width = x.cols();
    lane_stride = x.cols();
    elem_stride = 1;
  } else {
    lanes = x.cols();
    width = x.rows();
    lane_stride = 1;
    elem_stride = x.cols();
  }

  std::vector<double> out(x.data().size());
  softmax_lanes(x.data(), out, lanes, width, lane_stride, elem_stride);

  Node* px = x.node().get();
  return make_op(x.shape(), std::move(out), {x.node()},
                 [px, lanes, width, lane_stride, elem_stride](Node& self) {
                   if (!px->requires_grad) return;
                   px->ensure_grad();
                   for (std::int64_t l = 0; l < lanes; ++l) {
                     const std::int64_t base = l * lane_stride;
                     double dot = 0.0;
                     for (std::int64_t i = 0; i < width; ++i) {
                       const size_t idx = static_cast<size_t>(base + i * elem_stride);
                       dot += self.grad[idx] * self.value[idx];
                     }
                     for (std::int64_t i = 0; i < width; ++i) {
                       const size_t idx = static_cast<size_t>(base + i * elem_stride);
                       px->grad[idx] += self.value[idx] * (self.grad[idx] - dot);
                     }
                   }
                 });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps) {
  check_defined(x, "layer_norm");
  check_defined(gamma, "layer_norm");
  check_defined(beta, "layer_norm");
  check_2d(x, "layer_norm");
  if (eps <= 0.0) throw ContractError("layer_norm: eps must be positive");
  const std::int64_t n = x.rows(), m = x.cols();
  if (gamma.ndim() != 1 || gamma.size() != m || beta.ndim() != 1 || beta.size() != m) {
    throw ShapeError("layer_norm: affine params must be length " +
                     std::to_string(m) + ", got " + shape_str(gamma.shape()) +
                     " and " + shape_str(beta.shape()));
  }

  std::vector<double> out(static_cast<size_t>(n * m));
  std::vector<double> xhat(static_cast<size_t>(n * m));
  std::vector<double> inv_std(static_cast<size_t>(n));
  const auto& xv = x.data();
  const auto& gv = gamma.data();
  const auto& bv = beta.data();
  for (std::int64_t i = 0; i < n; ++i) {
    const double* row = xv.data() + i * m;
    double mean = 0.0;
    for (std::int64_t j = 0; j < m; ++j) mean += row[j];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::int64_t j = 0; j < m; ++j) {
      const double d = row[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(m);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(i)] = is;
    for (std::int64_t j = 0; j < m; ++j) {
      const double h = (row[j] - mean) * is;
      xhat[static_cast<size_t>(i * m + j)] = h;
      out[static_cast<size_t>(i * m + j)] = gv[static_cast<size_t>(j)] * h + bv[static_cast<size_t>(j)];
    }
  }

  Node* px = x.node().get();
  Node* pg = gamma.node().get();
  Node* pb = beta.node().get();
  return make_op(
      x.shape(), std::move(out), {x.node(), gamma.node(), beta.node()},
      [px, pg, pb, n, m, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Node& self) {
        const double inv_m = 1.0 / static_cast<double>(m);
        if (pg->requires_grad) pg->ensure_grad();
        if (pb->requires_grad) pb->ensure_grad();
        if (px->requires_grad) px->ensure_grad();
        for (std::int64_t i = 0; i < n; ++i) {
          const double* grow = self.grad.data() + i * m;
          const double* hrow = xhat.data() + i * m;
          if (pg->requires_grad || pb->requires_grad) {
            for (std::int64_t j = 0; j < m; ++j) {
              if (pg->requires_grad) pg->grad[static_cast<size_t>(j)] += grow[j] * hrow[j];
              if (pb->requires_grad) pb->grad[static_cast<size_t>(j)] += grow[j];
            }
          }
          if (!px->requires_grad) continue;
          // dxhat = dy * gamma; dx = inv_std*(dxhat - mean(dxhat) - xhat*mean(dxhat*xhat))
          double mean_dh = 0.0, mean_dh_h = 0.0;
          for (std::int64_t j = 0; j < m; ++j) {
            const double dh = grow[j] * pg->value[static_cast<size_t>(j)];
            mean_dh += dh;
            mean_dh_h += dh * hrow[j];
          }
          mean_dh *= inv_m;
          mean_dh_h *= inv_m;
          const double is = inv_std[static_cast<size_t>(i)];
          for (std::int64_t j = 0; j < m; ++j) {
            const double dh = grow[j] * pg->value[static_cast<size_t>(j)];
            px->grad[static_cast<size_t>(i * m + j)] +=
                is * (dh - mean_dh - hrow[j] * mean_dh_h);
          }
        }
      });
}

Tensor neg_scaled_sqdist(const Tensor& q, const Tensor& centers,
                         const Tensor& widths) {
  check_defined(q, "neg_scaled_sqdist");
  check_defined(centers, "neg_scaled_sqdist");
  check_defined(widths, "neg_scaled_sqdist");
  check_2d(q, "neg_scaled_sqdist");
  check_2d(centers, "neg_scaled_sqdist");
  check_same_shape(centers, widths, "neg_scaled_sqdist");
  if (q.cols() != centers.cols()) {
    throw ShapeError("neg_scaled_sqdist: query " + shape_str(q.shape()) +
                     " vs centers " + shape_str(centers.shape()));
  }
  const std::int64_t s = q.rows(), r = centers.rows(), d = q.cols();
  std::vector<double> out(static_cast<size_t>(s * r));
  const auto& qv = q.data();
  const auto& mv = centers.data();
  const auto& wv = widths.data();
  for (std::int64_t i = 0; i < s; ++i) {
    const double* qrow = qv.data() + i * d;
    for (std::int64_t j = 0; j < r; ++j) {
      const double* mrow = mv.data() + j * d;
      const double* wrow = wv.data() + j * d;
      double acc = 0.0;
      for (std::int64_t l = 0; l < d; ++l) {
        const double diff = qrow[l] - mrow[l];
        acc += diff * diff / (2.0 * wrow[l] * wrow[l]);
      }
      out[static_cast<size_t>(i * r + j)] = -acc;
    }
  }
  Node* pq = q.node().get();
  Node* pm = centers.node().get();
  Node* pw = widths.node().get();
  return make_op(
      {s, r}, std::move(out), {q.node(), centers.node(), widths.node()},
      [pq, pm, pw, s, r, d](Node& self) {
        if (pq->requires_grad) pq->ensure_grad();
        if (pm->requires_grad) pm->ensure_grad();
        if (pw->requires_grad) pw->ensure_grad();
        for (std::int64_t i = 0; i < s; ++i) {
          const double* qrow = pq->value.data() + i * d;
          for (std::int64_t j = 0; j < r; ++j) {
            const double g = self.grad[static_cast<size_t>(i * r + j)];
            if (g == 0.0) continue;
            const double* mrow = pm->value.data() + j * d;
            const double* wrow = pw->value.data() + j * d;
            for (std::int64_t l = 0; l < d; ++l) {
              const double w = wrow[l];
              const double diff = qrow[l] - mrow[l];
              const double dq = -g * diff / (w * w);
              if (pq->requires_grad) pq->grad[static_cast<size_t>(i * d + l)] += dq;
              if (pm->requires_grad) pm->grad[static_cast<size_t>(j * d + l)] -= dq;
              if (pw->requires_grad)
                pw->grad[static_cast<size_t>(j * d + l)] += g * diff * diff / (w * w * w);
            }
          }
        }
      });
}

Tensor slice_rows(const Tensor& x, std::int64_t start, std::int64_t count) {
  check_defined(x, "slice_rows");
  check_2d(x, "slice_rows");
  if (start < 0 || count <= 0 || start + count > x.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") out of range for " +
                     shape_str(x.shape()));
  }
  const std::int64_t m = x.cols();
  std::vector<double> out(x.data().begin() + start * m,
                          x.data().begin() + (start + count) * m);
  Node* px = x.node().get();
  return make_op({count, m}, std::move(out), {x.node()},
                 [px, start, m](Node& self) {
                   if (!px->requires_grad) return;
                   px->ensure_grad();
                   for (size_t i = 0; i < self.grad.size(); ++i)
                     px->grad[static_cast<size_t>(start * m) + i] += self.grad[i];
                 });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no tensors");
  const std::int64_t m = parts.front().cols();
  std::int64_t total = 0;
  for (const auto& p : parts) {
    check_2d(p, "concat_rows");
    if (p.cols() != m) {
      throw ShapeError("concat_rows: column mismatch " + shape_str(p.shape()));
    }
    total += p.rows();
  }
  std::vector<double> out;
  out.reserve(static_cast<size_t>(total * m));
  std::vector<NodePtr> parents;
  std::vector<std::int64_t> offsets;
  std::int64_t off = 0;
  for (const auto& p : parts) {
    out.insert(out.end(), p.data().begin(), p.data().end());
    parents.push_back(p.node());
    offsets.push_back(off);
    off += p.rows() * m;
  }
  std::vector<Node*> raw;
  for (auto& p : parents) raw.push_back(p.get());
  return make_op({total, m}, std::move(out), std::move(parents),
                 [raw, offsets](Node& self) {
                   for (size_t t = 0; t < raw.size(); ++t) {
                     Node* p = raw[t];
                     if (!p->requires_grad) continue;
                     p->ensure_grad();
                     const size_t base = static_cast<size_t>(offsets[t]);
                     for (size_t i = 0; i < p->value.size(); ++i)
                       p->grad[i] += self.grad[base + i];
                   }
                 });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  check_defined(a, "concat_cols");
  check_defined(b, "concat_cols");
  check_2d(a, "concat_cols");
  check_2d(b, "concat_cols");
  if (a.rows() != b.rows()) {
    throw ShapeError("concat_cols: row mismatch " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
  const std::int64_t n = a.rows(), ma = a.cols(), mb = b.cols();
  std::vector<double> out(static_cast<size_t>(n * (ma + mb)));
  for (std::int64_t i = 0; i < n; ++i) {
    std::copy_n(a.data().data() + i * ma, ma, out.data() + i * (ma + mb));
    std::copy_n(b.data().data() + i * mb, mb, out.data() + i * (ma + mb) + ma);
  }
  Node* pa = a.node().get();
  Node* pb = b.node().get();
  return make_op({n, ma + mb}, std::move(out), {a.node(), b.node()},
                 [pa, pb, n, ma, mb](Node& self) {
                   for (std::int64_t i = 0; i < n; ++i) {
                     const double* grow = self.grad.data() + i * (ma + mb);
                     if (pa->requires_grad) {
                       pa->ensure_grad();
                       for (std::int64_t j = 0; j < ma; ++j)
                         pa->grad[static_cast<size_t>(i * ma + j)] += grow[j];
                     }
                     if (pb->requires_grad) {
                       pb->ensure_grad();
                       for (std::int64_t j = 0; j < mb; ++j)
                         pb->grad[static_cast<size_t>(i * mb + j)] += grow[ma + j];
                     }
                   }
                 });
}

Tensor reshape(const Tensor& x, Shape shape) {
  check_defined(x, "reshape");
  if (shape_numel(shape) != x.size()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " +
                     shape_str(shape));
  }
  Node* px = x.node().get();
  return make_op(std::move(shape), x.data(), {x.node()}, [px](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i) px->grad[i] += self.grad[i];
  });
}

Tensor softmax_cross_entropy_mean(const Tensor& logits,
                                  const std::vector<int>& labels) {
  check_defined(logits, "softmax_cross_entropy_mean");
  check_2d(logits, "softmax_cross_entropy_mean");
  const std::int64_t n = logits.rows(), c = logits.cols();
  if (static_cast<std::int64_t>(labels.size()) != n) {
    throw ShapeError("softmax_cross_entropy_mean: " +
                     std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " rows");
  }
  for (int l : labels) {
    if (l < 0 || l >= c)
      throw ContractError("softmax_cross_entropy_mean: label out of range");
  }

  std::vector<double> probs(static_cast<size_t>(n * c));
  softmax_lanes(logits.data(), probs, n, c, c, 1);
  double loss = 0.0;
  const auto& lv = logits.data();
  for (std::int64_t i = 0; i < n; ++i) {
    const double* row = lv.data() + i * c;
    double mx = row[0];
    for (std::int64_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (std::int64_t j = 0; j < c; ++j) denom += std::exp(row[j] - mx);
    loss += std::log(denom) - (row[labels[static_cast<size_t>(i)]] - mx);
  }
  loss /= static_cast<double>(n);

  Node* pl = logits.node().get();
  return make_op({1}, {loss}, {logits.node()},
                 [pl, n, c, labels, probs = std::move(probs)](Node& self) {
                   if (!pl->requires_grad) return;
                   pl->ensure_grad();
                   const double g = self.grad[0] / static_cast<double>(n);
                   for (std::int64_t i = 0; i < n; ++i) {
                     for (std::int64_t j = 0; j < c; ++j) {
                       double delta = probs[static_cast<size_t>(i * c + j)];
                       if (j == labels[static_cast<size_t>(i)]) delta -= 1.0;
                       pl->grad[static_cast<size_t>(i * c + j)] += g * delta;
                     }
                   }
                 });
}

}  // namespace fuzzyattn
