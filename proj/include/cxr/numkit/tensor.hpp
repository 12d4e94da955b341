#pragma once

// Dense row-major float64 tensor with reverse-mode gradient tracking.
//
// A Tensor is a cheap handle onto a shared graph node. Ops build new nodes
// that remember how to push gradients back to their inputs; calling
// backward() on a scalar walks the graph once in reverse topological order,
// accumulating into every reachable node that requires a gradient. Leaf
// gradients accumulate across calls until zero_grad().

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cxr::numkit {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Epsilon added to the variance inside layer_norm.
inline constexpr double kLayerNormEpsilon = 1e-5;
/// Default ignore index for cross_entropy targets.
inline constexpr std::int64_t kIgnoreIndex = -100;

namespace detail {
struct Node;
}

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> data() const;
  /// Writable view of the values. Intended for leaves (parameters, inputs).
  std::span<double> mutable_data();
  double item() const;

  bool requires_grad() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Seeds d(self)/d(self) = 1 and propagates. Self must hold one element.
  void backward();

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

/// While alive, ops on this thread do not record backward information.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// ---- differentiable ops ---------------------------------------------------

/// (m x k) * (k x n). Both operands rank 2.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Elementwise with suffix broadcasting: the smaller operand's shape must equal
// the trailing dims of the larger one (a single element always broadcasts).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

/// tanh approximation.
Tensor gelu(const Tensor& x);
Tensor softmax(const Tensor& x, int axis = -1);
/// Normalizes over the last axis; gain and bias have shape {last dim}.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);

/// Rows of a rank-2 table selected by id.
Tensor embedding_lookup(const Tensor& table, std::span<const std::int64_t> ids);

/// Mean negative log-likelihood over rows whose target != ignore_index.
/// With class_weights, each row counts with weight w[target] and the sum is
/// divided by the total weight of the counted rows.
Tensor cross_entropy(const Tensor& logits, std::span<const std::int64_t> targets,
                     std::int64_t ignore_index = kIgnoreIndex,
                     std::span<const double> class_weights = {});

Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
/// Mean over rows of a rank-2 tensor, shape {cols}.
Tensor mean_rows(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

/// Multi-head scaled dot-product self-attention over already projected
/// q, k, v of shape {T, d}; d must divide by num_heads. Query i sees key j
/// when j < prefix or j <= i: the first `prefix` positions form a
/// bidirectional block that never sees later positions, and the rest is
/// causal. prefix >= T gives full bidirectional attention.
Tensor masked_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t num_heads,
                        std::size_t prefix);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

// ---- raw kernels shared with graph-free inference paths ------------------

namespace kernels {
double gelu(double x);
double gelu_derivative(double x);
/// In place over one row.
void softmax_row(std::span<double> row);
void layer_norm_row(std::span<const double> in, std::span<const double> gain,
                    std::span<const double> bias, std::span<double> out);
/// out (m x n) = a (m x k) * b (k x n), all row-major.
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> out,
            std::size_t m, std::size_t k, std::size_t n);
/// One query row against n cached keys/values (row-major {n, d}), all
/// visible. out has d entries.
void attend_one(std::span<const double> q, std::span<const double> keys, std::span<const double> values,
                std::size_t n, std::size_t num_heads, std::span<double> out);
}  // namespace kernels

}  // namespace cxr::numkit
