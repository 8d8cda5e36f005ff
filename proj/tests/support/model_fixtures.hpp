#pragma once

#include <random>
#include <vector>

#include "cmg/dataset.hpp"
#include "cmg/model/network.hpp"

namespace cmg::testing {

inline model::ModelConfig tiny_config(std::uint64_t seed, int window = 4) {
  model::ModelConfig c;
  c.d_model = 8;
  c.n_heads = 2;
  c.d_ff = 16;
  c.lstm_hidden = 8;
  c.window = window;
  c.n_features = 5;
  c.seed = seed;
  return c;
}

inline SequenceWindow random_window(std::mt19937_64& rng, int L, int F, double lo = -2.0, double hi = 2.0) {
  SequenceWindow w;
  for (int i = 0; i < L; ++i) {
    std::vector<double> row(static_cast<std::size_t>(F));
    for (auto& v : row) v = uniform(rng, lo, hi);
    w.encoder_input.push_back(row);
    w.labels.push_back(kClassLabels[static_cast<std::size_t>(rng() % kClassLabels.size())]);
  }
  w.decoder_input = w.encoder_input;
  return w;
}

/// Largest |analytic - numeric| / max(|analytic|, |numeric|, floor) over every trainable entry.
inline double max_gradient_error(model::CmgParams p, const std::vector<SequenceWindow>& batch, double eps = 1e-4,
                                 double floor = 1e-7) {
  const auto lg = model::loss_and_grad(p, batch);
  std::vector<const model::Mat*> grads;
  lg.grad.visit([&](const std::string&, const model::Mat& m, bool) { grads.push_back(&m); });
  double worst = 0.0;
  std::size_t idx = 0;
  p.visit([&](const std::string&, model::Mat& m, bool trainable) {
    const model::Mat& g = *grads[idx++];
    if (!trainable) return;
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      const double orig = m.data()[k];
      m.data()[k] = orig + eps;
      const double up = model::loss_only(p, batch);
      m.data()[k] = orig - eps;
      const double down = model::loss_only(p, batch);
      m.data()[k] = orig;
      const double num = (up - down) / (2.0 * eps);
      const double a = g.data()[k];
      const double rel = std::abs(a - num) / std::max({std::abs(a), std::abs(num), floor});
      worst = std::max(worst, rel);
    }
  });
  return worst;
}

}  // namespace cmg::testing
