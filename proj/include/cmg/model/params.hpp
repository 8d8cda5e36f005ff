#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "cmg/common.hpp"

namespace cmg::model {

using Mat = Eigen::MatrixXd;

/// Which key positions a query row may attend to.
enum class MaskKind {
  full,        // every position
  causal,      // j <= i
  transposed,  // j >= i (current and later positions only)
  diagonal,    // j == i
};

enum class LstmDirection {
  forward,   // position 0 -> L-1
  backward,  // position L-1 -> 0
};

struct ModelConfig {
  int d_model = 32;
  int n_heads = 2;
  int d_ff = 64;
  int lstm_hidden = 32;
  int window = 16;
  int n_features = 19;
  int n_classes = 6;
  std::uint64_t seed = 42;

  MaskKind encoder_mask = MaskKind::transposed;
  MaskKind decoder_mask = MaskKind::diagonal;
  MaskKind cross_mask = MaskKind::transposed;
  LstmDirection lstm_direction = LstmDirection::backward;

  int head_dim() const { return d_model / n_heads; }

  void validate() const {
    if (d_model < 1 || n_heads < 1 || d_ff < 1 || lstm_hidden < 1 || window < 1 || n_features < 1 || n_classes < 2)
      throw ArgumentError("model config: all dimensions must be >= 1");
    if (d_model % n_heads != 0) throw ArgumentError("model config: n_heads must divide d_model");
  }
};

struct LinearParams {
  Mat w;  // in x out
  Mat b;  // 1 x out
};

struct LayerNormParams {
  Mat gamma;  // 1 x d
  Mat beta;   // 1 x d
};

struct AttentionParams {
  LinearParams q, k, v, o;
};

struct FeedForwardParams {
  LinearParams in, out;
};

/// Gate blocks are laid out as [input, forget, cell, output].
struct LstmParams {
  Mat wx;  // d_model x 4h
  Mat wh;  // h x 4h
  Mat b;   // 1 x 4h
};

/// All weights of the encoder-decoder + LSTM classifier. The same type holds gradients.
struct CmgParams {
  ModelConfig config;

  LinearParams input;
  Mat positional;  // L x d_model, sinusoidal, not trained

  LayerNormParams enc_norm_attn, enc_norm_ff, enc_norm_out;
  AttentionParams enc_self;
  FeedForwardParams enc_ff;

  LayerNormParams dec_norm_self, dec_norm_cross, dec_norm_ff, dec_norm_out;
  AttentionParams dec_self, cross;
  FeedForwardParams dec_ff;

  LstmParams lstm;
  LinearParams classifier;

  /// Visits every tensor in checkpoint order. `trainable` is false only for the positional table.
  template <typename Self, typename F>
  static void visit_impl(Self& p, F&& f) {
    auto lin = [&](const std::string& n, auto& l) {
      f(n + ".w", l.w, true);
      f(n + ".b", l.b, true);
    };
    auto norm = [&](const std::string& n, auto& l) {
      f(n + ".gamma", l.gamma, true);
      f(n + ".beta", l.beta, true);
    };
    auto attn = [&](const std::string& n, auto& a) {
      lin(n + ".q", a.q);
      lin(n + ".k", a.k);
      lin(n + ".v", a.v);
      lin(n + ".o", a.o);
    };
    auto ff = [&](const std::string& n, auto& a) {
      lin(n + ".in", a.in);
      lin(n + ".out", a.out);
    };
    lin("input", p.input);
    f("positional", p.positional, false);
    norm("enc.norm_attn", p.enc_norm_attn);
    attn("enc.self", p.enc_self);
    norm("enc.norm_ff", p.enc_norm_ff);
    ff("enc.ff", p.enc_ff);
    norm("enc.norm_out", p.enc_norm_out);
    norm("dec.norm_self", p.dec_norm_self);
    attn("dec.self", p.dec_self);
    norm("dec.norm_cross", p.dec_norm_cross);
    attn("dec.cross", p.cross);
    norm("dec.norm_ff", p.dec_norm_ff);
    ff("dec.ff", p.dec_ff);
    norm("dec.norm_out", p.dec_norm_out);
    f("lstm.wx", p.lstm.wx, true);
    f("lstm.wh", p.lstm.wh, true);
    f("lstm.b", p.lstm.b, true);
    lin("classifier", p.classifier);
  }

  template <typename F>
  void visit(F&& f) {
    visit_impl(*this, std::forward<F>(f));
  }
  template <typename F>
  void visit(F&& f) const {
    visit_impl(*this, std::forward<F>(f));
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    visit([&](const std::string&, const Mat& m, bool) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

  bool all_finite() const {
    bool ok = true;
    visit([&](const std::string&, const Mat& m, bool) { ok = ok && m.allFinite(); });
    return ok;
  }
};

inline Mat sinusoidal_positions(int length, int d_model) {
  Mat pe(length, d_model);
  for (int pos = 0; pos < length; ++pos) {
    for (int i = 0; i < d_model; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / d_model);
      pe(pos, i) = (i % 2 == 0) ? std::sin(pos * rate) : std::cos(pos * rate);
    }
  }
  return pe;
}

/// Rounds every entry to the nearest float; checkpoints store float32.
inline void round_to_float(Mat& m) {
  m = m.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
}

/// Allocates tensors for `cfg`; every entry zero.
inline CmgParams zero_params(const ModelConfig& cfg) {
  cfg.validate();
  const int d = cfg.d_model, ff = cfg.d_ff, h = cfg.lstm_hidden;
  auto lin = [](int in, int out) { return LinearParams{Mat::Zero(in, out), Mat::Zero(1, out)}; };
  auto norm = [](int n) { return LayerNormParams{Mat::Zero(1, n), Mat::Zero(1, n)}; };
  auto attn = [&] { return AttentionParams{lin(d, d), lin(d, d), lin(d, d), lin(d, d)}; };
  auto ffp = [&] { return FeedForwardParams{lin(d, ff), lin(ff, d)}; };
  CmgParams p;
  p.config = cfg;
  p.input = lin(cfg.n_features, d);
  p.positional = Mat::Zero(cfg.window, d);
  p.enc_norm_attn = p.enc_norm_ff = p.enc_norm_out = norm(d);
  p.dec_norm_self = p.dec_norm_cross = p.dec_norm_ff = p.dec_norm_out = norm(d);
  p.enc_self = attn();
  p.dec_self = attn();
  p.cross = attn();
  p.enc_ff = ffp();
  p.dec_ff = ffp();
  p.lstm = LstmParams{Mat::Zero(d, 4 * h), Mat::Zero(h, 4 * h), Mat::Zero(1, 4 * h)};
  p.classifier = lin(h, cfg.n_classes);
  return p;
}

inline CmgParams zeros_like(const CmgParams& p) { return zero_params(p.config); }

/// Uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases, unit layer-norm gains,
/// forget-gate bias 1. All values are float-representable.
inline CmgParams init_params(const ModelConfig& cfg) {
  CmgParams p = zero_params(cfg);
  std::mt19937_64 rng(derive_seed(cfg.seed, "model/init"));
  p.visit([&](const std::string& name, Mat& m, bool) {
    const bool is_bias = name.ends_with(".b") || name == "lstm.b";
    if (name.ends_with(".gamma")) {
      m.setOnes();
    } else if (name.ends_with(".beta") || is_bias || name == "positional") {
      m.setZero();
    } else {
      const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = uniform(rng, -limit, limit);
    }
  });
  p.lstm.b.block(0, cfg.lstm_hidden, 1, cfg.lstm_hidden).setOnes();
  p.positional = sinusoidal_positions(cfg.window, cfg.d_model);
  p.visit([](const std::string&, Mat& m, bool) { round_to_float(m); });
  return p;
}

}  // namespace cmg::model
