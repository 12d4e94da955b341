#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "cxr/error.hpp"
#include "cxr/numkit/tensor.hpp"
#include "node.hpp"

namespace cxr::numkit {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

Tensor wrap(NodePtr node) { return Tensor(std::move(node)); }

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                     shape_string(t.shape()));
  }
}

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
}

bool is_suffix(const Shape& small, const Shape& big) {
  return small.size() <= big.size() && std::equal(small.rbegin(), small.rend(), big.rbegin());
}

Shape broadcast_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return a.shape();
  if (b.size() == 1 || is_suffix(b.shape(), a.shape())) return a.shape();
  if (a.size() == 1 || is_suffix(a.shape(), b.shape())) return b.shape();
  mismatch(op, a.shape(), b.shape());
}

void accumulate(Node& target, std::span<const double> delta) {
  if (!target.requires_grad) return;
  auto& g = target.grad_buffer();
  for (std::size_t i = 0; i < delta.size(); ++i) g[i] += delta[i];
}

template <typename Fwd, typename DA, typename DB>
Tensor binary(const Tensor& a, const Tensor& b, const char* op, Fwd fwd, DA da, DB db) {
  Shape out_shape = broadcast_shape(a, b, op);
  const std::size_t n = element_count(out_shape);
  const auto av = a.data();
  const auto bv = b.data();
  const std::size_t an = av.size();
  const std::size_t bn = bv.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[i % an], bv[i % bn]);
  return wrap(detail::make_result(std::move(out_shape), std::move(out), {a.node(), b.node()},
                                  [da, db](Node& self) {
                                    Node& pa = *self.parents[0];
                                    Node& pb = *self.parents[1];
                                    const std::size_t an = pa.data.size();
                                    const std::size_t bn = pb.data.size();
                                    if (pa.requires_grad) {
                                      auto& ga = pa.grad_buffer();
                                      for (std::size_t i = 0; i < self.grad.size(); ++i)
                                        ga[i % an] += self.grad[i] * da(pa.data[i % an], pb.data[i % bn]);
                                    }
                                    if (pb.requires_grad) {
                                      auto& gb = pb.grad_buffer();
                                      for (std::size_t i = 0; i < self.grad.size(); ++i)
                                        gb[i % bn] += self.grad[i] * db(pa.data[i % an], pb.data[i % bn]);
                                    }
                                  }));
}

struct AxisLayout {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisLayout axis_layout(const Shape& shape, int axis, const char* op) {
  const int rank = static_cast<int>(shape.size());
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) {
    throw ShapeError(std::string(op) + ": axis out of range for shape " + shape_string(shape));
  }
  AxisLayout l;
  for (int i = 0; i < axis; ++i) l.outer *= shape[i];
  l.extent = shape[axis];
  for (int i = axis + 1; i < rank; ++i) l.inner *= shape[i];
  if (l.extent == 0) throw ShapeError(std::string(op) + ": empty axis in shape " + shape_string(shape));
  return l;
}

}  // namespace

// ---- kernels ----------------------------------------------------------------

namespace kernels {

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluK = 0.044715;
}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluK * x * x * x))); }

double gelu_derivative(double x) {
  const double u = kGeluC * (x + kGeluK * x * x * x);
  const double t = std::tanh(u);
  const double du = kGeluC * (1.0 + 3.0 * kGeluK * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

void softmax_row(std::span<double> row) {
  const double peak = *std::max_element(row.begin(), row.end());
  double total = 0.0;
  for (double& v : row) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : row) v /= total;
}

void layer_norm_row(std::span<const double> in, std::span<const double> gain, std::span<const double> bias,
                    std::span<double> out) {
  const std::size_t d = in.size();
  double mu = 0.0;
  for (double v : in) mu += v;
  mu /= static_cast<double>(d);
  double var = 0.0;
  for (double v : in) var += (v - mu) * (v - mu);
  var /= static_cast<double>(d);
  const double inv_std = 1.0 / std::sqrt(var + kLayerNormEpsilon);
  for (std::size_t j = 0; j < d; ++j) out[j] = (in[j] - mu) * inv_std * gain[j] + bias[j];
}

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> out, std::size_t m,
            std::size_t k, std::size_t n) {
  MatMap c(out.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  if (k == 0) {
    c.setZero();
    return;
  }
  ConstMatMap am(a.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  ConstMatMap bm(b.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  c.noalias() = am * bm;
}

}  // namespace kernels

// ---- linear algebra ---------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) mismatch("matmul", a.shape(), b.shape());
  std::vector<double> out(m * n);
  kernels::matmul(a.data(), b.data(), out, m, k, n);
  return wrap(detail::make_result({m, n}, std::move(out), {a.node(), b.node()}, [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const auto M = static_cast<Eigen::Index>(m);
    const auto K = static_cast<Eigen::Index>(k);
    const auto N = static_cast<Eigen::Index>(n);
    ConstMatMap g(self.grad.data(), M, N);
    if (pa.requires_grad) {
      MatMap ga(pa.grad_buffer().data(), M, K);
      ga.noalias() += g * ConstMatMap(pb.data.data(), K, N).transpose();
    }
    if (pb.requires_grad) {
      MatMap gb(pb.grad_buffer().data(), K, N);
      gb.noalias() += ConstMatMap(pa.data.data(), M, K).transpose() * g;
    }
  }));
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  const auto av = a.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  return wrap(detail::make_result({n, m}, std::move(out), {a.node()}, [m, n](Node& self) {
    Node& pa = *self.parents[0];
    auto& ga = pa.grad_buffer();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += self.grad[j * m + i];
  }));
}

// ---- elementwise --------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v *= factor;
  return wrap(detail::make_result(x.shape(), std::move(out), {x.node()}, [factor](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
  }));
}

Tensor gelu(const Tensor& x) {
  std::vector<double> out(x.size());
  const auto xv = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = kernels::gelu(xv[i]);
  return wrap(detail::make_result(x.shape(), std::move(out), {x.node()}, [](Node& self) {
    Node& px = *self.parents[0];
    auto& g = px.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * kernels::gelu_derivative(px.data[i]);
  }));
}

Tensor softmax(const Tensor& x, int axis) {
  const AxisLayout l = axis_layout(x.shape(), axis, "softmax");
  std::vector<double> out(x.data().begin(), x.data().end());
  std::vector<double> lane(l.extent);
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t i = 0; i < l.inner; ++i) {
      const std::size_t base = o * l.extent * l.inner + i;
      for (std::size_t k = 0; k < l.extent; ++k) lane[k] = out[base + k * l.inner];
      kernels::softmax_row(lane);
      for (std::size_t k = 0; k < l.extent; ++k) out[base + k * l.inner] = lane[k];
    }
  }
  return wrap(detail::make_result(x.shape(), std::move(out), {x.node()}, [l](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t o = 0; o < l.outer; ++o) {
      for (std::size_t i = 0; i < l.inner; ++i) {
        const std::size_t base = o * l.extent * l.inner + i;
        double dot = 0.0;
        for (std::size_t k = 0; k < l.extent; ++k) {
          const std::size_t at = base + k * l.inner;
          dot += self.grad[at] * self.data[at];
        }
        for (std::size_t k = 0; k < l.extent; ++k) {
          const std::size_t at = base + k * l.inner;
          g[at] += self.data[at] * (self.grad[at] - dot);
        }
      }
    }
  }));
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  if (x.rank() == 0) throw ShapeError("layer_norm: scalar input");
  const std::size_t d = x.shape().back();
  if (gain.shape() != Shape{d}) mismatch("layer_norm gain", x.shape(), gain.shape());
  if (bias.shape() != Shape{d}) mismatch("layer_norm bias", x.shape(), bias.shape());
  if (d == 0) throw ShapeError("layer_norm: empty last axis");
  const std::size_t rows = x.size() / d;
  const auto xv = x.data();
  const auto gv = gain.data();
  const auto bv = bias.data();
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(rows);
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mu) * inv_std[r];
      xhat[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
  }
  return wrap(detail::make_result(
      x.shape(), std::move(out), {x.node(), gain.node(), bias.node()},
      [d, rows, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        Node& px = *self.parents[0];
        Node& pg = *self.parents[1];
        Node& pb = *self.parents[2];
        if (pg.requires_grad || pb.requires_grad) {
          auto& gg = pg.grad_buffer();
          auto& gb = pb.grad_buffer();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < d; ++j) {
              gg[j] += self.grad[r * d + j] * xhat[r * d + j];
              gb[j] += self.grad[r * d + j];
            }
          }
        }
        if (!px.requires_grad) return;
        auto& gx = px.grad_buffer();
        const double inv_d = 1.0 / static_cast<double>(d);
        for (std::size_t r = 0; r < rows; ++r) {
          double mean_dh = 0.0, mean_dh_h = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double dh = self.grad[r * d + j] * pg.data[j];
            mean_dh += dh;
            mean_dh_h += dh * xhat[r * d + j];
          }
          mean_dh *= inv_d;
          mean_dh_h *= inv_d;
          for (std::size_t j = 0; j < d; ++j) {
            const double dh = self.grad[r * d + j] * pg.data[j];
            gx[r * d + j] += inv_std[r] * (dh - mean_dh - xhat[r * d + j] * mean_dh_h);
          }
        }
      }));
}

// ---- indexing -------------------------------------------------------------------

Tensor embedding_lookup(const Tensor& table, std::span<const std::int64_t> ids) {
  require_rank(table, 2, "embedding_lookup");
  const std::size_t rows = table.dim(0), d = table.dim(1);
  std::vector<std::int64_t> idx(ids.begin(), ids.end());
  std::vector<double> out(idx.size() * d);
  const auto tv = table.data();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= rows) {
      throw ShapeError("embedding_lookup: id " + std::to_string(idx[i]) + " outside table of shape " +
                       shape_string(table.shape()));
    }
    std::copy_n(tv.begin() + static_cast<std::ptrdiff_t>(idx[i] * d), d, out.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  const std::size_t n = idx.size();
  return wrap(detail::make_result({n, d}, std::move(out), {table.node()},
                                  [d, idx = std::move(idx)](Node& self) {
                                    auto& g = self.parents[0]->grad_buffer();
                                    for (std::size_t i = 0; i < idx.size(); ++i) {
                                      const std::size_t base = static_cast<std::size_t>(idx[i]) * d;
                                      for (std::size_t j = 0; j < d; ++j) g[base + j] += self.grad[i * d + j];
                                    }
                                  }));
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::int64_t> targets, std::int64_t ignore_index,
                     std::span<const double> class_weights) {
  require_rank(logits, 2, "cross_entropy");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  if (targets.size() != n) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                     shape_string(logits.shape()));
  }
  if (!class_weights.empty() && class_weights.size() != c) {
    throw ShapeError("cross_entropy: " + std::to_string(class_weights.size()) + " class weights for " +
                     std::to_string(c) + " classes");
  }
  if (c == 0) throw ShapeError("cross_entropy: empty class axis");

  const auto lv = logits.data();
  std::vector<double> probs(n * c, 0.0);
  std::vector<double> row_weight(n, 0.0);
  std::vector<std::int64_t> tgt(targets.begin(), targets.end());
  double total_weight = 0.0;
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (tgt[r] == ignore_index) continue;
    if (tgt[r] < 0 || static_cast<std::size_t>(tgt[r]) >= c) {
      throw ShapeError("cross_entropy: target " + std::to_string(tgt[r]) + " outside " + std::to_string(c) +
                       " classes");
    }
    std::span<double> p(probs.data() + r * c, c);
    std::copy_n(lv.begin() + static_cast<std::ptrdiff_t>(r * c), c, p.begin());
    const double peak = *std::max_element(p.begin(), p.end());
    double z = 0.0;
    for (double v : p) z += std::exp(v - peak);
    const double log_z = peak + std::log(z);
    const double w = class_weights.empty() ? 1.0 : class_weights[static_cast<std::size_t>(tgt[r])];
    loss += w * (log_z - p[static_cast<std::size_t>(tgt[r])]);
    for (double& v : p) v = std::exp(v - log_z);
    row_weight[r] = w;
    total_weight += w;
  }
  if (total_weight <= 0.0) throw ShapeError("cross_entropy: no counted targets");
  loss /= total_weight;
  return wrap(detail::make_result(
      {}, {loss}, {logits.node()},
      [n, c, ignore_index, total_weight, probs = std::move(probs), row_weight = std::move(row_weight),
       tgt = std::move(tgt)](Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        const double upstream = self.grad[0] / total_weight;
        for (std::size_t r = 0; r < n; ++r) {
          if (tgt[r] == ignore_index) continue;
          const double k = upstream * row_weight[r];
          for (std::size_t j = 0; j < c; ++j) g[r * c + j] += k * probs[r * c + j];
          g[r * c + static_cast<std::size_t>(tgt[r])] -= k;
        }
      }));
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t cols = parts[0].rank() == 2 ? parts[0].dim(1) : 0;
  std::size_t rows = 0;
  std::vector<NodePtr> parents;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    require_rank(p, 2, "concat_rows");
    if (p.dim(1) != cols) mismatch("concat_rows", parts[0].shape(), p.shape());
    offsets.push_back(rows * cols);
    rows += p.dim(0);
    parents.push_back(p.node());
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (const auto& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  return wrap(detail::make_result({rows, cols}, std::move(out), std::move(parents),
                                  [offsets = std::move(offsets)](Node& self) {
                                    for (std::size_t i = 0; i < self.parents.size(); ++i) {
                                      Node& p = *self.parents[i];
                                      accumulate(p, std::span<const double>(self.grad).subspan(offsets[i], p.data.size()));
                                    }
                                  }));
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = parts[0].rank() == 2 ? parts[0].dim(0) : 0;
  std::size_t cols = 0;
  std::vector<NodePtr> parents;
  std::vector<std::size_t> col_offsets;
  for (const auto& p : parts) {
    require_rank(p, 2, "concat_cols");
    if (p.dim(0) != rows) mismatch("concat_cols", parts[0].shape(), p.shape());
    col_offsets.push_back(cols);
    cols += p.dim(1);
    parents.push_back(p.node());
  }
  std::vector<double> out(rows * cols);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::size_t w = parts[i].dim(1);
    const auto pv = parts[i].data();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(pv.begin() + static_cast<std::ptrdiff_t>(r * w), w,
                  out.begin() + static_cast<std::ptrdiff_t>(r * cols + col_offsets[i]));
  }
  return wrap(detail::make_result({rows, cols}, std::move(out), std::move(parents),
                                  [rows, cols, col_offsets = std::move(col_offsets)](Node& self) {
                                    for (std::size_t i = 0; i < self.parents.size(); ++i) {
                                      Node& p = *self.parents[i];
                                      if (!p.requires_grad) continue;
                                      const std::size_t w = p.shape[1];
                                      auto& g = p.grad_buffer();
                                      for (std::size_t r = 0; r < rows; ++r)
                                        for (std::size_t j = 0; j < w; ++j)
                                          g[r * w + j] += self.grad[r * cols + col_offsets[i] + j];
                                    }
                                  }));
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  require_rank(x, 2, "slice_rows");
  if (begin + count > x.dim(0)) {
    throw ShapeError("slice_rows: rows [" + std::to_string(begin) + "," + std::to_string(begin + count) +
                     ") outside " + shape_string(x.shape()));
  }
  const std::size_t cols = x.dim(1);
  const auto xv = x.data();
  std::vector<double> out(xv.begin() + static_cast<std::ptrdiff_t>(begin * cols),
                          xv.begin() + static_cast<std::ptrdiff_t>((begin + count) * cols));
  return wrap(detail::make_result({count, cols}, std::move(out), {x.node()}, [begin, cols](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[begin * cols + i] += self.grad[i];
  }));
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  require_rank(x, 2, "slice_cols");
  if (begin + count > x.dim(1)) {
    throw ShapeError("slice_cols: cols [" + std::to_string(begin) + "," + std::to_string(begin + count) +
                     ") outside " + shape_string(x.shape()));
  }
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  const auto xv = x.data();
  std::vector<double> out(rows * count);
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(xv.begin() + static_cast<std::ptrdiff_t>(r * cols + begin), count,
                out.begin() + static_cast<std::ptrdiff_t>(r * count));
  return wrap(detail::make_result({rows, count}, std::move(out), {x.node()}, [rows, cols, begin, count](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < count; ++j) g[r * cols + begin + j] += self.grad[r * count + j];
  }));
}

Tensor mean_rows(const Tensor& x) {
  require_rank(x, 2, "mean_rows");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (rows == 0) throw ShapeError("mean_rows: no rows");
  const auto xv = x.data();
  std::vector<double> out(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < cols; ++j) out[j] += xv[r * cols + j];
  const double inv = 1.0 / static_cast<double>(rows);
  for (double& v : out) v *= inv;
  return wrap(detail::make_result({cols}, std::move(out), {x.node()}, [rows, cols, inv](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < cols; ++j) g[r * cols + j] += inv * self.grad[j];
  }));
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  return wrap(detail::make_result({}, {total}, {x.node()}, [](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (double& v : g) v += self.grad[0];
  }));
}

Tensor mean(const Tensor& x) {
  if (x.size() == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (element_count(shape) != x.size()) mismatch("reshape", x.shape(), shape);
  std::vector<double> out(x.data().begin(), x.data().end());
  return wrap(detail::make_result(std::move(shape), std::move(out), {x.node()},
                                  [](Node& self) { accumulate(*self.parents[0], self.grad); }));
}

}  // namespace cxr::numkit
