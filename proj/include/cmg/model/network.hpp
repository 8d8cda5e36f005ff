#pragma once

// The encoder-decoder forecaster:
//
//   embed = X W_in + b_in + positional
//   encoder (pre-norm): self-attention under the encoder mask, feed-forward, final norm -> memory
//   decoder (pre-norm): self-attention under the decoder mask (diagonal by default),
//                       cross-attention over memory under the transposed causal mask,
//                       feed-forward, final norm
//   LSTM over the decoder rows -> per-position classifier logits (L x classes)
//
// With the default masks and a backward-running LSTM, the logits at position i
// depend only on encoder rows j >= i.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cmg/dataset.hpp"
#include "cmg/model/layers.hpp"
#include "cmg/model/params.hpp"
#include "cmg/target.hpp"

namespace cmg::model {

struct ForwardCache {
  Eigen::Index n_seq = 1;
  Mat enc_in, dec_in;
  LayerNormCache enc_n1, enc_n2, enc_n3;
  AttentionCache enc_attn;
  FeedForwardCache enc_ff;
  LayerNormCache dec_n1, dec_n2, dec_n3, dec_n4;
  AttentionCache dec_attn, cross_attn;
  FeedForwardCache dec_ff;
  Mat memory, dec_out;
  LstmCache lstm;
  Mat hidden;
  MaskMatrix enc_mask, dec_mask, cross_mask;
};

struct ForwardResult {
  Mat logits;  // L x n_classes
  ForwardCache cache;
};

inline Mat to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ArgumentError("to_matrix: empty input");
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw ArgumentError("to_matrix: ragged rows");
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

namespace detail {

inline void require_finite(const Mat& m, const char* layer) {
  if (!m.allFinite()) throw NumericalError(std::string("non-finite activation in ") + layer);
}

}  // namespace detail

/// Forward pass over `n_seq` windows stacked row-wise (each `window` rows long).
inline ForwardResult forward(const CmgParams& p, const Mat& enc_in, const Mat& dec_in, Eigen::Index n_seq = 1) {
  const ModelConfig& cfg = p.config;
  const Eigen::Index L = cfg.window, N = n_seq * L;
  if (n_seq < 1 || enc_in.rows() != N || dec_in.rows() != N || enc_in.cols() != cfg.n_features ||
      dec_in.cols() != cfg.n_features)
    throw ArgumentError("forward: input shape does not match model config");
  ForwardResult r;
  ForwardCache& c = r.cache;
  c.n_seq = n_seq;
  c.enc_in = enc_in;
  c.dec_in = dec_in;
  c.enc_mask = make_mask(cfg.encoder_mask, L, L);
  c.dec_mask = make_mask(cfg.decoder_mask, L, L);
  c.cross_mask = make_mask(cfg.cross_mask, L, L);
  const Mat pos = n_seq == 1 ? p.positional : Mat(p.positional.replicate(n_seq, 1));

  // encoder
  Mat h = linear_forward(enc_in, p.input) + pos;
  detail::require_finite(h, "encoder embedding");
  const Mat e1 = layer_norm_forward(h, p.enc_norm_attn, c.enc_n1);
  h += attention_forward(e1, e1, p.enc_self, c.enc_mask, cfg.n_heads, c.enc_attn, L);
  h += feed_forward(layer_norm_forward(h, p.enc_norm_ff, c.enc_n2), p.enc_ff, c.enc_ff);
  c.memory = layer_norm_forward(h, p.enc_norm_out, c.enc_n3);
  detail::require_finite(c.memory, "encoder");

  // decoder
  Mat g = linear_forward(dec_in, p.input) + pos;
  detail::require_finite(g, "decoder embedding");
  const Mat n1 = layer_norm_forward(g, p.dec_norm_self, c.dec_n1);
  g += attention_forward(n1, n1, p.dec_self, c.dec_mask, cfg.n_heads, c.dec_attn, L);
  g += attention_forward(layer_norm_forward(g, p.dec_norm_cross, c.dec_n2), c.memory, p.cross, c.cross_mask,
                         cfg.n_heads, c.cross_attn, L);
  detail::require_finite(g, "cross-attention");
  g += feed_forward(layer_norm_forward(g, p.dec_norm_ff, c.dec_n3), p.dec_ff, c.dec_ff);
  c.dec_out = layer_norm_forward(g, p.dec_norm_out, c.dec_n4);
  detail::require_finite(c.dec_out, "decoder");

  c.hidden = lstm_forward(c.dec_out, p.lstm, cfg.lstm_direction, c.lstm, L);
  detail::require_finite(c.hidden, "lstm");
  r.logits = linear_forward(c.hidden, p.classifier);
  detail::require_finite(r.logits, "classifier");
  return r;
}

inline ForwardResult forward(const CmgParams& p, const SequenceWindow& w) {
  return forward(p, to_matrix(w.encoder_input), to_matrix(w.decoder_input));
}

/// Backpropagates dL/dlogits through the network, accumulating into `g`.
inline void backward(const CmgParams& p, const ForwardCache& c, const Mat& dlogits, CmgParams& g) {
  const int heads = p.config.n_heads;
  const Mat dhidden = linear_backward(c.hidden, dlogits, p.classifier, g.classifier);
  const Mat ddec_out = lstm_backward(dhidden, p.lstm, c.lstm, g.lstm);

  // decoder, reverse order
  Mat dg = layer_norm_backward(ddec_out, p.dec_norm_out, c.dec_n4, g.dec_norm_out);
  dg += layer_norm_backward(feed_forward_backward(dg, p.dec_ff, c.dec_ff, g.dec_ff), p.dec_norm_ff, c.dec_n3,
                            g.dec_norm_ff);
  const AttentionGrads cross = attention_backward(dg, p.cross, c.cross_attn, heads, g.cross);
  dg += layer_norm_backward(cross.dxq, p.dec_norm_cross, c.dec_n2, g.dec_norm_cross);
  const AttentionGrads self = attention_backward(dg, p.dec_self, c.dec_attn, heads, g.dec_self);
  dg += layer_norm_backward(self.dxq + self.dxkv, p.dec_norm_self, c.dec_n1, g.dec_norm_self);
  linear_backward(c.dec_in, dg, p.input, g.input);

  // encoder, reverse order
  Mat dh = layer_norm_backward(cross.dxkv, p.enc_norm_out, c.enc_n3, g.enc_norm_out);
  dh += layer_norm_backward(feed_forward_backward(dh, p.enc_ff, c.enc_ff, g.enc_ff), p.enc_norm_ff, c.enc_n2,
                            g.enc_norm_ff);
  const AttentionGrads enc = attention_backward(dh, p.enc_self, c.enc_attn, heads, g.enc_self);
  dh += layer_norm_backward(enc.dxq + enc.dxkv, p.enc_norm_attn, c.enc_n1, g.enc_norm_attn);
  linear_backward(c.enc_in, dh, p.input, g.input);
}

struct LossGrad {
  double loss = 0.0;
  CmgParams grad;
};

/// Softmax cross-entropy summed over rows; writes dL/dlogits (unscaled) into `dlogits`.
inline double cross_entropy(const Mat& logits, const std::vector<std::size_t>& targets, Mat& dlogits) {
  dlogits.resize(logits.rows(), logits.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(r).array() - mx).exp().matrix();
    const double s = e.sum();
    const auto t = static_cast<Eigen::Index>(targets[static_cast<std::size_t>(r)]);
    loss += -(logits(r, t) - mx - std::log(s));
    dlogits.row(r) = e / s;
    dlogits(r, t) -= 1.0;
  }
  return loss;
}

struct StackedBatch {
  Mat enc, dec;
  std::vector<std::size_t> targets;
  Eigen::Index n_seq = 0;
};

inline StackedBatch stack_batch(const std::vector<const SequenceWindow*>& batch) {
  if (batch.empty()) throw ArgumentError("loss_and_grad: empty batch");
  const auto L = static_cast<Eigen::Index>(batch.front()->length());
  const auto F = static_cast<Eigen::Index>(batch.front()->encoder_input.front().size());
  StackedBatch b;
  b.n_seq = static_cast<Eigen::Index>(batch.size());
  b.enc.resize(b.n_seq * L, F);
  b.dec.resize(b.n_seq * L, F);
  for (Eigen::Index s = 0; s < b.n_seq; ++s) {
    const SequenceWindow& w = *batch[static_cast<std::size_t>(s)];
    if (static_cast<Eigen::Index>(w.length()) != L || w.encoder_input.size() != w.length() ||
        w.decoder_input.size() != w.length())
      throw ArgumentError("loss_and_grad: windows differ in length");
    b.enc.middleRows(s * L, L) = to_matrix(w.encoder_input);
    b.dec.middleRows(s * L, L) = to_matrix(w.decoder_input);
    for (int label : w.labels) b.targets.push_back(label_to_index(label));
  }
  return b;
}

/// Mean cross-entropy over every position of every window, with exact gradients.
inline LossGrad loss_and_grad(const CmgParams& p, const std::vector<const SequenceWindow*>& batch) {
  const StackedBatch b = stack_batch(batch);
  LossGrad out{0.0, zeros_like(p)};
  const ForwardResult fr = forward(p, b.enc, b.dec, b.n_seq);
  Mat dlogits;
  const double scale = 1.0 / static_cast<double>(b.targets.size());
  out.loss = cross_entropy(fr.logits, b.targets, dlogits) * scale;
  if (!std::isfinite(out.loss)) throw NumericalError("loss_and_grad: non-finite loss");
  dlogits *= scale;
  backward(p, fr.cache, dlogits, out.grad);
  return out;
}

inline LossGrad loss_and_grad(const CmgParams& p, const std::vector<SequenceWindow>& batch) {
  std::vector<const SequenceWindow*> ptrs;
  for (const auto& w : batch) ptrs.push_back(&w);
  return loss_and_grad(p, ptrs);
}

inline double loss_only(const CmgParams& p, const std::vector<SequenceWindow>& batch) {
  std::vector<const SequenceWindow*> ptrs;
  for (const auto& w : batch) ptrs.push_back(&w);
  const StackedBatch b = stack_batch(ptrs);
  Mat dl;
  return cross_entropy(forward(p, b.enc, b.dec, b.n_seq).logits, b.targets, dl) / static_cast<double>(b.targets.size());
}

/// Argmax with ties to the lower index.
inline std::size_t argmax_row(const Mat& logits, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < logits.cols(); ++j)
    if (logits(row, j) > logits(row, best)) best = j;
  return static_cast<std::size_t>(best);
}

enum class Direction { bearish = -1, bullish = 1 };

inline Direction direction_of(int label) { return label > 0 ? Direction::bullish : Direction::bearish; }

struct Prediction {
  int label = 1;
  Direction direction = Direction::bullish;
};

inline Prediction prediction_from_logits(const Mat& logits) {
  const int label = index_to_label(argmax_row(logits, logits.rows() - 1));
  return {label, direction_of(label)};
}

inline Prediction predict_next(const CmgParams& p, const SequenceWindow& w) {
  return prediction_from_logits(forward(p, w).logits);
}

}  // namespace cmg::model
