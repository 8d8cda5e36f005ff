#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "cmg/model/network.hpp"

namespace cmg::model {

struct TrainConfig {
  double lr = 1e-3;
  int max_epochs = 200;
  int patience = 10;
  int batch_size = 32;
  double clip_norm = 1.0;
  double val_fraction = 0.15;  // of train days, taken from the end
  std::uint64_t seed = 42;

  void validate() const {
    if (patience < 1) throw ArgumentError("train config: patience must be >= 1");
    if (!(val_fraction > 0.0 && val_fraction < 0.5)) throw ArgumentError("train config: val fraction must be in (0, 0.5)");
    if (max_epochs < 1 || batch_size < 1) throw ArgumentError("train config: epochs and batch size must be >= 1");
    if (!(lr >= 0.0) || !(clip_norm > 0.0)) throw ArgumentError("train config: lr >= 0 and clip > 0 required");
  }
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  CmgParams params;  // best-validation snapshot
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

/// Fraction of windows whose last-position argmax matches the last label.
inline double last_position_accuracy(const CmgParams& p, const std::vector<SequenceWindow>& windows) {
  if (windows.empty()) throw ArgumentError("accuracy: no windows");
  std::size_t hit = 0;
  for (const auto& w : windows)
    if (predict_next(p, w).label == w.labels.back()) ++hit;
  return static_cast<double>(hit) / static_cast<double>(windows.size());
}

namespace detail {

inline std::vector<Mat*> trainable_tensors(CmgParams& p) {
  std::vector<Mat*> out;
  p.visit([&](const std::string&, Mat& m, bool trainable) {
    if (trainable) out.push_back(&m);
  });
  return out;
}

/// Fisher-Yates driven by the raw engine output, so the permutation is identical across standard libraries.
inline void seeded_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace detail

/// Adam with bias correction. Parameters are rounded to float after every step.
class Adam {
 public:
  Adam(const CmgParams& like, double lr) : lr_(lr), m_(zeros_like(like)), v_(zeros_like(like)) {}

  void step(CmgParams& p, CmgParams& g) {
    ++t_;
    auto ps = detail::trainable_tensors(p);
    auto gs = detail::trainable_tensors(g);
    auto ms = detail::trainable_tensors(m_);
    auto vs = detail::trainable_tensors(v_);
    const double c1 = 1.0 - std::pow(kBeta1, t_), c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t k = 0; k < ps.size(); ++k) {
      Mat& m = *ms[k];
      Mat& v = *vs[k];
      const Mat& gr = *gs[k];
      m = kBeta1 * m + (1.0 - kBeta1) * gr;
      v = kBeta2 * v + (1.0 - kBeta2) * gr.cwiseProduct(gr);
      *ps[k] -= (lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps)).matrix();
      round_to_float(*ps[k]);
    }
  }

  static constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

 private:
  double lr_;
  int t_ = 0;
  CmgParams m_, v_;
};

/// Scales `g` so its global L2 norm is at most `max_norm`; returns the pre-clip norm.
inline double clip_global_norm(CmgParams& g, double max_norm) {
  double sq = 0.0;
  for (Mat* m : detail::trainable_tensors(g)) sq += m->squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm)
    for (Mat* m : detail::trainable_tensors(g)) *m *= max_norm / norm;
  return norm;
}

/// Mini-batch Adam with early stopping on validation last-position accuracy.
/// Stops after `patience` consecutive epochs without strict improvement.
inline TrainResult train(CmgParams params, const std::vector<SequenceWindow>& train_set,
                         const std::vector<SequenceWindow>& val_set, const TrainConfig& tc) {
  tc.validate();
  if (train_set.empty() || val_set.empty()) throw ArgumentError("train: empty train or validation set");
  std::mt19937_64 rng(derive_seed(tc.seed, "train/shuffle"));
  Adam opt(params, tc.lr);
  TrainResult res;
  res.params = params;
  double best = -1.0;
  int since_best = 0;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    detail::seeded_shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    try {
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tc.batch_size)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(tc.batch_size));
        std::vector<const SequenceWindow*> batch;
        for (std::size_t k = start; k < end; ++k) batch.push_back(&train_set[order[k]]);
        LossGrad lg = loss_and_grad(params, batch);
        clip_global_norm(lg.grad, tc.clip_norm);
        opt.step(params, lg.grad);
        loss_sum += lg.loss;
        ++batches;
      }
      if (!params.all_finite()) throw NumericalError("non-finite parameters");
    } catch (const NumericalError& e) {
      throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    EpochRecord rec{epoch, loss_sum / static_cast<double>(batches), last_position_accuracy(params, val_set)};
    res.history.push_back(rec);
    if (rec.val_accuracy > best) {
      best = rec.val_accuracy;
      res.params = params;
      res.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= tc.patience) {
      break;
    }
  }
  return res;
}

}  // namespace cmg::model
