#pragma once

// Dense building blocks with explicit forward caches and analytic backward passes.
// Activations are row-per-position matrices (L x width).

#include <cmath>
#include <limits>
#include <string>
#include <numbers>
#include <vector>

#include "cmg/model/params.hpp"

namespace cmg::model {

using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// allowed(i, j): query row i may attend key column j.
inline MaskMatrix make_mask(MaskKind kind, Eigen::Index queries, Eigen::Index keys) {
  MaskMatrix m(queries, keys);
  for (Eigen::Index i = 0; i < queries; ++i) {
    for (Eigen::Index j = 0; j < keys; ++j) {
      switch (kind) {
        case MaskKind::full: m(i, j) = true; break;
        case MaskKind::causal: m(i, j) = j <= i; break;
        case MaskKind::transposed: m(i, j) = j >= i; break;
        case MaskKind::diagonal: m(i, j) = j == i; break;
      }
    }
  }
  return m;
}

/// Query position i may attend key positions j >= i.
inline MaskMatrix transposed_causal_mask(int L) {
  if (L < 1) throw ArgumentError("mask length must be >= 1");
  return make_mask(MaskKind::transposed, L, L);
}

inline MaskMatrix causal_mask(int L) { return make_mask(MaskKind::causal, L, L); }

// --- linear --------------------------------------------------------------------

inline Mat linear_forward(const Mat& x, const LinearParams& p) {
  Mat y = x * p.w;
  y.rowwise() += p.b.row(0);
  return y;
}

/// Accumulates parameter gradients into `g`; returns dL/dx.
inline Mat linear_backward(const Mat& x, const Mat& dy, const LinearParams& p, LinearParams& g) {
  g.w.noalias() += x.transpose() * dy;
  g.b += dy.colwise().sum();
  return dy * p.w.transpose();
}

// --- layer norm ----------------------------------------------------------------

inline constexpr double kLayerNormEps = 1e-5;

struct LayerNormCache {
  Mat xhat;
  Eigen::VectorXd inv_std;
};

inline Mat layer_norm_forward(const Mat& x, const LayerNormParams& p, LayerNormCache& cache) {
  const auto d = static_cast<double>(x.cols());
  cache.xhat.resize(x.rows(), x.cols());
  cache.inv_std.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).sum() / d;
    const double var = (x.row(r).array() - mean).square().sum() / d;
    cache.inv_std(r) = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.xhat.row(r) = (x.row(r).array() - mean) * cache.inv_std(r);
  }
  Mat y = cache.xhat.array().rowwise() * p.gamma.row(0).array();
  y.rowwise() += p.beta.row(0);
  return y;
}

inline Mat layer_norm_backward(const Mat& dy, const LayerNormParams& p, const LayerNormCache& cache,
                               LayerNormParams& g) {
  g.gamma += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  g.beta += dy.colwise().sum();
  const Mat dxhat = dy.array().rowwise() * p.gamma.row(0).array();
  const auto d = static_cast<double>(dy.cols());
  Mat dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dxhat.row(r).sum() / d;
    const double mean_dx = dxhat.row(r).dot(cache.xhat.row(r)) / d;
    dx.row(r) = cache.inv_std(r) * (dxhat.row(r).array() - mean_d - cache.xhat.row(r).array() * mean_dx).matrix();
  }
  return dx;
}

// --- activation ------------------------------------------------------------------

/// tanh-approximated GELU (smooth, so finite differences stay accurate).
inline constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
inline constexpr double kGeluA = 0.044715;

inline double gelu(double u) { return 0.5 * u * (1.0 + std::tanh(kGeluC * (u + kGeluA * u * u * u))); }

/// Derivative given t = tanh(c (u + a u^3)).
inline double gelu_grad_from_tanh(double u, double t) {
  return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * u * u);
}

inline double gelu_grad(double u) { return gelu_grad_from_tanh(u, std::tanh(kGeluC * (u + kGeluA * u * u * u))); }

// --- feed-forward ------------------------------------------------------------------

struct FeedForwardCache {
  Mat x, pre, tanh_term, hidden;
};

inline Mat feed_forward(const Mat& x, const FeedForwardParams& p, FeedForwardCache& cache) {
  cache.x = x;
  cache.pre = linear_forward(x, p.in);
  cache.tanh_term = cache.pre.unaryExpr([](double u) { return std::tanh(kGeluC * (u + kGeluA * u * u * u)); });
  cache.hidden = (0.5 * cache.pre.array() * (1.0 + cache.tanh_term.array())).matrix();
  return linear_forward(cache.hidden, p.out);
}

inline Mat feed_forward_backward(const Mat& dy, const FeedForwardParams& p, const FeedForwardCache& cache,
                                 FeedForwardParams& g) {
  Mat dh = linear_backward(cache.hidden, dy, p.out, g.out);
  dh.array() *= cache.pre.binaryExpr(cache.tanh_term, [](double u, double t) { return gelu_grad_from_tanh(u, t); }).array();
  return linear_backward(cache.x, dh, p.in, g.in);
}

// --- attention ----------------------------------------------------------------------

/// Row-wise softmax over allowed positions; disallowed weights are exactly 0.
inline Mat masked_softmax(const Mat& scores, const MaskMatrix& mask) {
  Mat p = Mat::Zero(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < scores.cols(); ++j)
      if (mask(i, j)) mx = std::max(mx, scores(i, j));
    if (mx == -std::numeric_limits<double>::infinity())
      throw ArgumentError("attention: mask row " + std::to_string(i) + " allows no positions");
    double sum = 0.0;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (!mask(i, j)) continue;
      p(i, j) = std::exp(scores(i, j) - mx);
      sum += p(i, j);
    }
    p.row(i) /= sum;
  }
  return p;
}

/// Single-head scaled dot-product attention on already-projected Q, K, V.
inline Mat attention(const Mat& q, const Mat& k, const Mat& v, const MaskMatrix& mask) {
  if (q.cols() != k.cols() || k.rows() != v.rows() || mask.rows() != q.rows() || mask.cols() != k.rows())
    throw ArgumentError("attention: shape mismatch");
  const Mat scores = (q * k.transpose()) / std::sqrt(static_cast<double>(q.cols()));
  return masked_softmax(scores, mask) * v;
}

struct AttentionCache {
  Mat xq, xkv, q, k, v, concat;
  Eigen::Index seq_len = 0;
  std::vector<Mat> weights;  // [sequence * n_heads + head], queries x keys
};

/// Multi-head scaled dot-product attention: heads are column blocks of Q/K/V,
/// concatenated and passed through the output projection. Rows hold consecutive
/// sequences of `seq_len` positions; attention never crosses a sequence boundary.
inline Mat attention_forward(const Mat& xq, const Mat& xkv, const AttentionParams& p, const MaskMatrix& mask,
                             int n_heads, AttentionCache& cache, Eigen::Index seq_len = 0) {
  if (seq_len == 0) seq_len = xq.rows();
  if (xq.rows() != xkv.rows() && seq_len != xq.rows()) throw ArgumentError("attention: stacked shapes differ");
  if (xq.rows() % seq_len != 0) throw ArgumentError("attention: rows not a multiple of sequence length");
  const Eigen::Index n_seq = xq.rows() / seq_len;
  const Eigen::Index kv_len = xkv.rows() / n_seq;
  if (mask.rows() != seq_len || mask.cols() != kv_len) throw ArgumentError("attention: mask shape mismatch");
  cache.xq = xq;
  cache.xkv = xkv;
  cache.seq_len = seq_len;
  cache.q = linear_forward(xq, p.q);
  cache.k = linear_forward(xkv, p.k);
  cache.v = linear_forward(xkv, p.v);
  const Eigen::Index dh = cache.q.cols() / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  cache.concat.resize(xq.rows(), cache.q.cols());
  cache.weights.resize(static_cast<std::size_t>(n_seq * n_heads));
  for (Eigen::Index s = 0; s < n_seq; ++s) {
    for (int h = 0; h < n_heads; ++h) {
      const auto qh = cache.q.block(s * seq_len, h * dh, seq_len, dh);
      const auto kh = cache.k.block(s * kv_len, h * dh, kv_len, dh);
      const auto vh = cache.v.block(s * kv_len, h * dh, kv_len, dh);
      Mat& w = cache.weights[static_cast<std::size_t>(s * n_heads + h)];
      w = masked_softmax((qh * kh.transpose()) * scale, mask);
      cache.concat.block(s * seq_len, h * dh, seq_len, dh).noalias() = w * vh;
    }
  }
  return linear_forward(cache.concat, p.o);
}

struct AttentionGrads {
  Mat dxq, dxkv;
};

inline AttentionGrads attention_backward(const Mat& dy, const AttentionParams& p, const AttentionCache& cache,
                                         int n_heads, AttentionParams& g) {
  const Mat dconcat = linear_backward(cache.concat, dy, p.o, g.o);
  const Eigen::Index dh = cache.q.cols() / n_heads;
  const Eigen::Index seq_len = cache.seq_len, n_seq = cache.q.rows() / seq_len, kv_len = cache.k.rows() / n_seq;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Mat dq(cache.q.rows(), cache.q.cols()), dk(cache.k.rows(), cache.k.cols()), dv(cache.v.rows(), cache.v.cols());
  for (Eigen::Index s = 0; s < n_seq; ++s) {
    for (int h = 0; h < n_heads; ++h) {
      const Mat& w = cache.weights[static_cast<std::size_t>(s * n_heads + h)];
      const auto dout = dconcat.block(s * seq_len, h * dh, seq_len, dh);
      const Mat dw = dout * cache.v.block(s * kv_len, h * dh, kv_len, dh).transpose();
      dv.block(s * kv_len, h * dh, kv_len, dh).noalias() = w.transpose() * dout;
      // softmax Jacobian, row-wise: ds = w * (dw - <dw, w>)
      const Eigen::VectorXd inner = (dw.array() * w.array()).rowwise().sum();
      const Mat ds = (w.array() * (dw.colwise() - inner).array()).matrix() * scale;
      dq.block(s * seq_len, h * dh, seq_len, dh).noalias() = ds * cache.k.block(s * kv_len, h * dh, kv_len, dh);
      dk.block(s * kv_len, h * dh, kv_len, dh).noalias() = ds.transpose() * cache.q.block(s * seq_len, h * dh, seq_len, dh);
    }
  }
  AttentionGrads out;
  out.dxq = linear_backward(cache.xq, dq, p.q, g.q);
  out.dxkv = linear_backward(cache.xkv, dk, p.k, g.k);
  out.dxkv += linear_backward(cache.xkv, dv, p.v, g.v);
  return out;
}

// --- LSTM ------------------------------------------------------------------------------

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmCache {
  Mat x;                 // N x d, N = sequences * seq_len
  Mat gates;             // N x 4h, post-activation [i f g o]
  Mat cell_tanh;         // N x h
  Mat h_prev, c_prev;    // N x h, state fed into each step
  Eigen::Index seq_len = 0;
  LstmDirection direction = LstmDirection::forward;
};

namespace detail {

inline Mat gather_rows(const Mat& m, Eigen::Index first, Eigen::Index stride, Eigen::Index count) {
  Mat out(count, m.cols());
  for (Eigen::Index b = 0; b < count; ++b) out.row(b) = m.row(first + b * stride);
  return out;
}

inline void scatter_rows(Mat& m, const Mat& src, Eigen::Index first, Eigen::Index stride) {
  for (Eigen::Index b = 0; b < src.rows(); ++b) m.row(first + b * stride) = src.row(b);
}

}  // namespace detail

/// Runs one LSTM per stacked sequence; returns the hidden state at every row.
inline Mat lstm_forward(const Mat& x, const LstmParams& p, LstmDirection dir, LstmCache& cache,
                        Eigen::Index seq_len = 0) {
  if (seq_len == 0) seq_len = x.rows();
  if (x.rows() % seq_len != 0) throw ArgumentError("lstm: rows not a multiple of sequence length");
  const Eigen::Index N = x.rows(), B = N / seq_len, H = p.wh.rows();
  cache.x = x;
  cache.seq_len = seq_len;
  cache.direction = dir;
  cache.gates.resize(N, 4 * H);
  cache.cell_tanh.resize(N, H);
  cache.h_prev.resize(N, H);
  cache.c_prev.resize(N, H);
  Mat xw = x * p.wx;
  xw.rowwise() += p.b.row(0);
  Mat out(N, H);
  Mat h = Mat::Zero(B, H), c = Mat::Zero(B, H);
  for (Eigen::Index step = 0; step < seq_len; ++step) {
    const Eigen::Index t = dir == LstmDirection::forward ? step : seq_len - 1 - step;
    detail::scatter_rows(cache.h_prev, h, t, seq_len);
    detail::scatter_rows(cache.c_prev, c, t, seq_len);
    Mat z = detail::gather_rows(xw, t, seq_len, B);
    z.noalias() += h * p.wh;
    z.leftCols(2 * H) = z.leftCols(2 * H).unaryExpr([](double v) { return sigmoid(v); });
    z.middleCols(2 * H, H) = z.middleCols(2 * H, H).array().tanh().matrix();
    z.rightCols(H) = z.rightCols(H).unaryExpr([](double v) { return sigmoid(v); });
    c = (z.middleCols(H, H).array() * c.array() + z.leftCols(H).array() * z.middleCols(2 * H, H).array()).matrix();
    const Mat ct = c.array().tanh().matrix();
    h = (z.rightCols(H).array() * ct.array()).matrix();
    detail::scatter_rows(cache.gates, z, t, seq_len);
    detail::scatter_rows(cache.cell_tanh, ct, t, seq_len);
    detail::scatter_rows(out, h, t, seq_len);
  }
  return out;
}

inline Mat lstm_backward(const Mat& dh_out, const LstmParams& p, const LstmCache& cache, LstmParams& g) {
  const Eigen::Index L = cache.seq_len, N = cache.x.rows(), B = N / L, H = p.wh.rows();
  Mat dz_all(N, 4 * H);
  Mat dh_carry = Mat::Zero(B, H), dc_carry = Mat::Zero(B, H);
  for (Eigen::Index step = L - 1; step >= 0; --step) {
    const Eigen::Index t = cache.direction == LstmDirection::forward ? step : L - 1 - step;
    const Mat gates = detail::gather_rows(cache.gates, t, L, B);
    const auto i = gates.leftCols(H).array(), f = gates.middleCols(H, H).array(),
               gg = gates.middleCols(2 * H, H).array(), o = gates.rightCols(H).array();
    const Mat dh = detail::gather_rows(dh_out, t, L, B) + dh_carry;
    const Mat ct = detail::gather_rows(cache.cell_tanh, t, L, B);
    const Mat c_prev = detail::gather_rows(cache.c_prev, t, L, B);
    const Mat dc = (dh.array() * o * (1.0 - ct.array().square())).matrix() + dc_carry;
    Mat dz(B, 4 * H);
    dz.leftCols(H) = (dc.array() * gg * i * (1.0 - i)).matrix();
    dz.middleCols(H, H) = (dc.array() * c_prev.array() * f * (1.0 - f)).matrix();
    dz.middleCols(2 * H, H) = (dc.array() * i * (1.0 - gg.square())).matrix();
    dz.rightCols(H) = (dh.array() * ct.array() * o * (1.0 - o)).matrix();
    dc_carry = (dc.array() * f).matrix();
    detail::scatter_rows(dz_all, dz, t, L);
    dh_carry.noalias() = dz * p.wh.transpose();
  }
  g.wx.noalias() += cache.x.transpose() * dz_all;
  g.wh.noalias() += cache.h_prev.transpose() * dz_all;
  g.b += dz_all.colwise().sum();
  return dz_all * p.wx.transpose();
}

}  // namespace cmg::model
