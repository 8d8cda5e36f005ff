#pragma once

// Classical baselines on the same EventSamples as the CMG model:
// softmax regression over the six classes, binary logistic regression on
// direction, and Gaussian naive Bayes.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmg/common.hpp"
#include "cmg/dataset.hpp"

namespace cmg::baselines {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct ClassPrediction {
  int label = 1;      // six-class label, or +-1 for binary models
  int direction = 1;  // +1 bullish, -1 bearish
};

struct LinearModel {
  Mat weights;              // C x F
  Vec bias;                 // C
  std::vector<int> classes; // label of each row, ascending
  bool binary = false;      // true: classes are directions {-1, +1}
};

struct GnbModel {
  std::vector<int> classes;
  Vec log_prior;  // C
  Mat mean;       // C x F
  Mat var;        // C x F, >= kVarianceFloor
};

inline constexpr double kVarianceFloor = 1e-9;

struct GdOptions {
  double l2 = 1e-3;
  double lr = 0.1;
  int epochs = 500;
};

namespace detail {

inline Mat design(const std::vector<EventSample>& s) {
  if (s.empty()) throw ArgumentError("baselines: no samples");
  const auto F = static_cast<Eigen::Index>(s.front().features.size());
  Mat x(static_cast<Eigen::Index>(s.size()), F);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (static_cast<Eigen::Index>(s[i].features.size()) != F) throw ArgumentError("baselines: ragged features");
    for (Eigen::Index j = 0; j < F; ++j) x(static_cast<Eigen::Index>(i), j) = s[i].features[static_cast<std::size_t>(j)];
  }
  return x;
}

inline std::vector<int> distinct(const std::vector<int>& labels) {
  std::vector<int> c = labels;
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

inline std::vector<std::size_t> indices_of(const std::vector<int>& labels, const std::vector<int>& classes) {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), l) - classes.begin()));
  return out;
}

inline Eigen::Index argmax_lowest(const Vec& v) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < v.size(); ++k)
    if (v(k) > v(best)) best = k;
  return best;
}

}  // namespace detail

// --- softmax regression ---------------------------------------------------------

struct LossGrad {
  double loss = 0.0;
  Mat dw;
  Vec db;
};

/// Mean cross-entropy + l2 * ||W||^2 / 2 and its exact gradient.
inline LossGrad softmax_loss_and_grad(const Mat& w, const Vec& b, const Mat& x, const std::vector<std::size_t>& y,
                                      double l2) {
  const Eigen::Index n = x.rows();
  Mat logits = x * w.transpose();
  logits.rowwise() += b.transpose();
  LossGrad out;
  Mat p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - mx).exp().matrix();
    const double s = p.row(i).sum();
    p.row(i) /= s;
    out.loss -= logits(i, static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)])) - mx - std::log(s);
  }
  for (Eigen::Index i = 0; i < n; ++i) p(i, static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)])) -= 1.0;
  const double inv = 1.0 / static_cast<double>(n);
  out.loss = out.loss * inv + 0.5 * l2 * w.squaredNorm();
  out.dw = p.transpose() * x * inv + l2 * w;
  out.db = p.colwise().sum().transpose() * inv;
  return out;
}

inline LinearModel fit_softmax(const Mat& x, const std::vector<int>& labels, const GdOptions& opt) {
  const auto classes = detail::distinct(labels);
  if (classes.size() < 2) throw DataError("baselines: need at least 2 classes, found " + std::to_string(classes.size()));
  const auto y = detail::indices_of(labels, classes);
  const auto C = static_cast<Eigen::Index>(classes.size());
  LinearModel m{Mat::Zero(C, x.cols()), Vec::Zero(C), classes, false};
  for (int e = 0; e < opt.epochs; ++e) {
    const LossGrad g = softmax_loss_and_grad(m.weights, m.bias, x, y, opt.l2);
    if (!std::isfinite(g.loss)) throw NumericalError("baselines: non-finite loss at epoch " + std::to_string(e + 1));
    // explicit step on the data term, implicit step on the ridge term: stable for any l2
    m.weights = (m.weights - opt.lr * (g.dw - opt.l2 * m.weights)) / (1.0 + opt.lr * opt.l2);
    m.bias -= opt.lr * g.db;
  }
  return m;
}

/// Six-class softmax regression, full-batch proximal gradient descent from zero.
inline LinearModel fit_multinomial_lr(const std::vector<EventSample>& samples, const GdOptions& opt = {}) {
  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(s.label);
  return fit_softmax(detail::design(samples), labels, opt);
}

// --- binary logistic regression -----------------------------------------------------

struct BinaryLossGrad {
  double loss = 0.0;
  Vec dw;
  double db = 0.0;
};

/// Mean logistic loss + l2 * ||w||^2 / 2 for targets t in {0, 1}.
inline BinaryLossGrad logistic_loss_and_grad(const Vec& w, double b, const Mat& x, const std::vector<int>& t,
                                             double l2) {
  const Eigen::Index n = x.rows();
  const Vec z = (x * w).array() + b;
  Vec r(n);
  BinaryLossGrad out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double zi = z(i);
    // log(1 + e^z) - t z, stable for both signs
    out.loss += std::max(zi, 0.0) + std::log1p(std::exp(-std::abs(zi))) - t[static_cast<std::size_t>(i)] * zi;
    r(i) = 1.0 / (1.0 + std::exp(-zi)) - t[static_cast<std::size_t>(i)];
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.loss = out.loss * inv + 0.5 * l2 * w.squaredNorm();
  out.dw = x.transpose() * r * inv + l2 * w;
  out.db = r.sum() * inv;
  return out;
}

/// Logistic regression on sign(label). Row 0 (bearish) is pinned at zero so the
/// decision rule is sigmoid(w.x + b) > 0.5, ties to bearish.
inline LinearModel fit_binary_lr(const std::vector<EventSample>& samples, const GdOptions& opt = {}) {
  const Mat x = detail::design(samples);
  std::vector<int> t;
  for (const auto& s : samples) t.push_back(s.direction() > 0 ? 1 : 0);
  if (std::all_of(t.begin(), t.end(), [&](int v) { return v == t.front(); }))
    throw DataError("baselines: binary LR needs both directions");
  Vec w = Vec::Zero(x.cols());
  double b = 0.0;
  for (int e = 0; e < opt.epochs; ++e) {
    const auto g = logistic_loss_and_grad(w, b, x, t, opt.l2);
    if (!std::isfinite(g.loss)) throw NumericalError("baselines: non-finite loss at epoch " + std::to_string(e + 1));
    w = (w - opt.lr * (g.dw - opt.l2 * w)) / (1.0 + opt.lr * opt.l2);
    b -= opt.lr * g.db;
  }
  LinearModel m{Mat::Zero(2, x.cols()), Vec::Zero(2), {-1, 1}, true};
  m.weights.row(1) = w.transpose();
  m.bias(1) = b;
  return m;
}

// --- Gaussian naive Bayes ---------------------------------------------------------------

inline GnbModel fit_gnb(const std::vector<EventSample>& samples) {
  const Mat x = detail::design(samples);
  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(s.label);
  GnbModel m;
  m.classes = detail::distinct(labels);
  const auto y = detail::indices_of(labels, m.classes);
  const auto C = static_cast<Eigen::Index>(m.classes.size());
  std::vector<double> count(m.classes.size(), 0.0);
  m.mean = Mat::Zero(C, x.cols());
  m.var = Mat::Zero(C, x.cols());
  for (std::size_t i = 0; i < y.size(); ++i) {
    count[y[i]] += 1.0;
    m.mean.row(static_cast<Eigen::Index>(y[i])) += x.row(static_cast<Eigen::Index>(i));
  }
  for (std::size_t c = 0; c < count.size(); ++c)
    if (count[c] < 2.0) throw DataError("baselines: class " + std::to_string(m.classes[c]) + " has fewer than 2 samples");
  for (Eigen::Index c = 0; c < C; ++c) m.mean.row(c) /= count[static_cast<std::size_t>(c)];
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(y[i]);
    m.var.row(c) += (x.row(static_cast<Eigen::Index>(i)) - m.mean.row(c)).array().square().matrix();
  }
  m.log_prior.resize(C);
  for (Eigen::Index c = 0; c < C; ++c) {
    m.var.row(c) /= count[static_cast<std::size_t>(c)];
    m.var.row(c) = m.var.row(c).cwiseMax(kVarianceFloor);
    m.log_prior(c) = std::log(count[static_cast<std::size_t>(c)] / static_cast<double>(y.size()));
  }
  return m;
}

inline Vec gnb_log_joint(const GnbModel& m, const std::vector<double>& f) {
  if (static_cast<Eigen::Index>(f.size()) != m.mean.cols()) throw ArgumentError("predict: feature dimension mismatch");
  const Eigen::Map<const Eigen::RowVectorXd> x(f.data(), static_cast<Eigen::Index>(f.size()));
  Vec lj = m.log_prior;
  for (Eigen::Index c = 0; c < lj.size(); ++c)
    lj(c) += -0.5 * ((2.0 * std::numbers::pi * m.var.row(c).array()).log() +
                     (x.array() - m.mean.row(c).array()).square() / m.var.row(c).array())
                        .sum();
  return lj;
}

inline Vec gnb_posterior(const GnbModel& m, const std::vector<double>& f) {
  const Vec lj = gnb_log_joint(m, f);
  const Vec e = (lj.array() - lj.maxCoeff()).exp().matrix();
  return e / e.sum();
}

// --- prediction ---------------------------------------------------------------------------

inline Vec scores(const LinearModel& m, const std::vector<double>& f) {
  if (static_cast<Eigen::Index>(f.size()) != m.weights.cols()) throw ArgumentError("predict: feature dimension mismatch");
  const Eigen::Map<const Vec> x(f.data(), static_cast<Eigen::Index>(f.size()));
  return m.weights * x + m.bias;
}

inline ClassPrediction predict(const LinearModel& m, const std::vector<double>& f) {
  const int label = m.classes[static_cast<std::size_t>(detail::argmax_lowest(scores(m, f)))];
  return {label, label > 0 ? 1 : -1};
}

inline ClassPrediction predict(const GnbModel& m, const std::vector<double>& f) {
  const int label = m.classes[static_cast<std::size_t>(detail::argmax_lowest(gnb_log_joint(m, f)))];
  return {label, label > 0 ? 1 : -1};
}

template <typename Model>
double accuracy(const Model& m, const std::vector<EventSample>& samples) {
  if (samples.empty()) throw ArgumentError("accuracy: no samples");
  std::size_t hit = 0;
  for (const auto& s : samples) {
    const auto p = predict(m, s.features);
    bool binary = false;
    if constexpr (requires { m.binary; }) binary = m.binary;
    hit += binary ? p.direction == s.direction() : p.label == s.label;
  }
  return static_cast<double>(hit) / static_cast<double>(samples.size());
}

// --- CSV weight dumps --------------------------------------------------------------------

inline void write_linear_csv(std::ostream& out, const LinearModel& m, const std::vector<std::string>& names) {
  out << "class,bias";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (Eigen::Index c = 0; c < m.weights.rows(); ++c) {
    out << m.classes[static_cast<std::size_t>(c)] << ',' << format_number(m.bias(c));
    for (Eigen::Index j = 0; j < m.weights.cols(); ++j) out << ',' << format_number(m.weights(c, j));
    out << '\n';
  }
}

inline void write_gnb_csv(std::ostream& out, const GnbModel& m, const std::vector<std::string>& names) {
  out << "class,prior,stat";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (Eigen::Index c = 0; c < m.mean.rows(); ++c) {
    for (const char* stat : {"mean", "var"}) {
      const Mat& src = std::string(stat) == "mean" ? m.mean : m.var;
      out << m.classes[static_cast<std::size_t>(c)] << ',' << format_number(std::exp(m.log_prior(c))) << ',' << stat;
      for (Eigen::Index j = 0; j < src.cols(); ++j) out << ',' << format_number(src(c, j));
      out << '\n';
    }
  }
}

}  // namespace cmg::baselines
