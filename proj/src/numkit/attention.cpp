#include <Eigen/Core>
#include <cmath>
#include <limits>

#include "cxr/error.hpp"
#include "cxr/numkit/tensor.hpp"
#include "node.hpp"

namespace cxr::numkit {

using detail::Node;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

inline bool visible(std::size_t i, std::size_t j, std::size_t prefix) { return j < prefix || j <= i; }

}  // namespace

Tensor masked_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t num_heads,
                        std::size_t prefix) {
  if (q.rank() != 2 || q.shape() != k.shape() || q.shape() != v.shape()) {
    throw ShapeError("masked_attention: q, k, v must share one rank-2 shape, got " + shape_string(q.shape()) + ", " +
                     shape_string(k.shape()) + ", " + shape_string(v.shape()));
  }
  const std::size_t t = q.dim(0), d = q.dim(1);
  if (num_heads == 0 || d % num_heads != 0) {
    throw ShapeError("masked_attention: width " + std::to_string(d) + " not divisible by " +
                     std::to_string(num_heads) + " heads");
  }
  const std::size_t dh = d / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const auto T = static_cast<Eigen::Index>(t), D = static_cast<Eigen::Index>(d), DH = static_cast<Eigen::Index>(dh);

  ConstMatMap qm(q.data().data(), T, D), km(k.data().data(), T, D), vm(v.data().data(), T, D);
  // Attention probabilities per head, {heads, T, T}.
  std::vector<double> probs(num_heads * t * t);
  std::vector<double> out(t * d);
  MatMap om(out.data(), T, D);
  for (std::size_t h = 0; h < num_heads; ++h) {
    const auto H = static_cast<Eigen::Index>(h) * DH;
    MatMap p(probs.data() + h * t * t, T, T);
    p.noalias() = qm.middleCols(H, DH) * km.middleCols(H, DH).transpose();
    for (std::size_t i = 0; i < t; ++i) {
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < t; ++j)
        if (visible(i, j, prefix)) peak = std::max(peak, p(i, j) * scale);
      double total = 0;
      for (std::size_t j = 0; j < t; ++j) {
        const double e = visible(i, j, prefix) ? std::exp(p(i, j) * scale - peak) : 0.0;
        p(i, j) = e;
        total += e;
      }
      p.row(i) /= total;
    }
    om.middleCols(H, DH).noalias() = p * vm.middleCols(H, DH);
  }

  return Tensor(detail::make_result(
      {t, d}, std::move(out), {q.node(), k.node(), v.node()},
      [t, d, num_heads, dh, scale, probs = std::move(probs)](Node& self) {
        Node& pq = *self.parents[0];
        Node& pk = *self.parents[1];
        Node& pv = *self.parents[2];
        const auto T = static_cast<Eigen::Index>(t), D = static_cast<Eigen::Index>(d);
        const auto DH = static_cast<Eigen::Index>(dh);
        ConstMatMap g(self.grad.data(), T, D);
        ConstMatMap qm(pq.data.data(), T, D), km(pk.data.data(), T, D), vm(pv.data.data(), T, D);
        RowMatrix dp(T, T);
        for (std::size_t h = 0; h < num_heads; ++h) {
          const auto H = static_cast<Eigen::Index>(h) * DH;
          ConstMatMap p(probs.data() + h * t * t, T, T);
          if (pv.requires_grad) {
            MatMap gv(pv.grad_buffer().data(), T, D);
            gv.middleCols(H, DH).noalias() += p.transpose() * g.middleCols(H, DH);
          }
          if (!pq.requires_grad && !pk.requires_grad) continue;
          dp.noalias() = g.middleCols(H, DH) * vm.middleCols(H, DH).transpose();
          // Softmax backward; masked entries have p = 0 and stay 0.
          for (Eigen::Index i = 0; i < T; ++i) {
            const double dot = p.row(i).dot(dp.row(i));
            for (Eigen::Index j = 0; j < T; ++j) dp(i, j) = p(i, j) * (dp(i, j) - dot) * scale;
          }
          if (pq.requires_grad) {
            MatMap gq(pq.grad_buffer().data(), T, D);
            gq.middleCols(H, DH).noalias() += dp * km.middleCols(H, DH);
          }
          if (pk.requires_grad) {
            MatMap gk(pk.grad_buffer().data(), T, D);
            gk.middleCols(H, DH).noalias() += dp.transpose() * qm.middleCols(H, DH);
          }
        }
      }));
}

namespace kernels {

void attend_one(std::span<const double> q, std::span<const double> keys, std::span<const double> values,
                std::size_t n, std::size_t num_heads, std::span<double> out) {
  const std::size_t d = q.size();
  const std::size_t dh = d / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<double> scores(n);
  for (std::size_t h = 0; h < num_heads; ++h) {
    const std::size_t off = h * dh;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t c = 0; c < dh; ++c) s += q[off + c] * keys[j * d + off + c];
      scores[j] = s * scale;
    }
    softmax_row(scores);
    for (std::size_t c = 0; c < dh; ++c) out[off + c] = 0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < dh; ++c) out[off + c] += scores[j] * values[j * d + off + c];
  }
}

}  // namespace kernels

}  // namespace cxr::numkit
