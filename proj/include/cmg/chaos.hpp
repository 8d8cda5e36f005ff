#pragma once

// Chaos-detection battery for scalar series: largest Lyapunov exponent,
// correlation dimension, approximate/sample entropy, DFA and spectral entropy,
// plus delay-embedding export for phase-space plots.

#include <algorithm>
#include <complex>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "cmg/common.hpp"

namespace cmg::chaos {

struct EmbeddingSpec {
  std::size_t m = 3;
  std::size_t tau = 1;

  std::size_t points(std::size_t n) const {
    const std::size_t span = (m - 1) * tau;
    return n > span ? n - span : 0;
  }
};

/// Row-major point set in R^m.
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> coords;

  std::size_t size() const { return dim ? coords.size() / dim : 0; }
  const double* operator[](std::size_t i) const { return coords.data() + i * dim; }
};

inline constexpr std::size_t kMinEmbeddedPoints = 10;

inline void check_spec(const EmbeddingSpec& spec) {
  if (spec.m < 1 || spec.tau < 1) throw ArgumentError("embedding: m and tau must be >= 1");
}

inline PointSet delay_embed(const Series& x, const EmbeddingSpec& spec,
                            std::size_t min_points = kMinEmbeddedPoints) {
  check_spec(spec);
  const std::size_t count = spec.points(x.size());
  if (count < std::max<std::size_t>(min_points, 1)) throw DataError("delay_embed: series too short for embedding");
  PointSet ps{spec.m, std::vector<double>(count * spec.m)};
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t k = 0; k < spec.m; ++k) ps.coords[i * spec.m + k] = x[i + k * spec.tau];
  return ps;
}

namespace detail {

inline double euclidean(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

inline double chebyshev(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) s = std::max(s, std::abs(a[k] - b[k]));
  return s;
}

inline void require_nonconstant(const Series& x, const char* what) {
  // exact comparison: a rounded stddev of a constant series can be a tiny positive number
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (x.empty() || *lo == *hi) throw DataError(std::string(what) + ": degenerate series");
}

}  // namespace detail

/// First lag where the autocorrelation drops below 1/e; 1 if none within n/4.
inline std::size_t autocorrelation_delay(const Series& x) {
  const double m = population_mean(x);
  double var = 0.0;
  for (double v : x) var += (v - m) * (v - m);
  if (var <= 0.0) return 1;
  const std::size_t max_lag = std::max<std::size_t>(1, x.size() / 4);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < x.size(); ++i) c += (x[i] - m) * (x[i + lag] - m);
    if (c / var < 1.0 / std::exp(1.0)) return lag;
  }
  return 1;
}

// --- Lyapunov ----------------------------------------------------------------

struct LyapunovOptions {
  std::size_t theiler = 0;  // 0 -> use tau
  std::size_t fit_first = 1;
  std::size_t fit_last = 10;
};

/// Mean log divergence curve <ln d(k)> for k = 0..k_max (Rosenstein).
inline Series rosenstein_divergence(const Series& x, const EmbeddingSpec& spec, std::size_t theiler,
                                    std::size_t k_max) {
  detail::require_nonconstant(x, "lyapunov");
  if (theiler < spec.tau) throw ArgumentError("lyapunov: theiler window must be >= tau");
  const PointSet ps = delay_embed(x, spec);
  const std::size_t total = ps.size();
  if (total <= k_max + 2) throw DataError("lyapunov: series too short for fit range");
  const std::size_t usable = total - k_max;

  std::vector<std::size_t> neighbor(usable, usable);
  for (std::size_t i = 0; i < usable; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < usable; ++j) {
      const std::size_t sep = i > j ? i - j : j - i;
      if (sep <= theiler) continue;
      const double d = detail::euclidean(ps[i], ps[j], ps.dim);
      if (d > 0.0 && d < best) {
        best = d;
        neighbor[i] = j;
      }
    }
  }

  Series curve(k_max + 1, 0.0);
  std::vector<std::size_t> counts(k_max + 1, 0);
  for (std::size_t i = 0; i < usable; ++i) {
    if (neighbor[i] == usable) continue;
    for (std::size_t k = 0; k <= k_max; ++k) {
      const double d = detail::euclidean(ps[i + k], ps[neighbor[i] + k], ps.dim);
      if (d > 0.0) {
        curve[k] += std::log(d);
        ++counts[k];
      }
    }
  }
  for (std::size_t k = 0; k <= k_max; ++k) {
    if (counts[k] == 0) throw NumericalError("lyapunov: no valid neighbor pairs");
    curve[k] /= static_cast<double>(counts[k]);
  }
  return curve;
}

/// Largest Lyapunov exponent per sample step.
inline double lyapunov_rosenstein(const Series& x, const EmbeddingSpec& spec, const LyapunovOptions& opt = {}) {
  check_spec(spec);
  if (opt.fit_last <= opt.fit_first) throw ArgumentError("lyapunov: empty fit range");
  const std::size_t theiler = opt.theiler ? opt.theiler : spec.tau;
  const Series curve = rosenstein_divergence(x, spec, theiler, opt.fit_last);
  Series ks, ys;
  for (std::size_t k = opt.fit_first; k <= opt.fit_last; ++k) {
    ks.push_back(static_cast<double>(k));
    ys.push_back(curve[k]);
  }
  return ols_slope(ks, ys);
}

// --- correlation dimension ----------------------------------------------------

struct CorrelationOptions {
  std::vector<double> radii;  // empty -> default log-spaced grid
  std::size_t theiler = 0;    // 0 -> use tau
  std::size_t fit_first = 0;  // radii index range of the scaling region;
  std::size_t fit_last = 0;   // both 0 -> middle third of the grid
};

inline constexpr std::size_t kMinCorrelationPoints = 500;
inline constexpr std::size_t kDefaultRadiusCount = 24;

/// Log-spaced radii spanning [extent * 10^-3, extent], extent = attractor diameter estimate.
inline std::vector<double> default_radii(const PointSet& ps, std::size_t count = kDefaultRadiusCount) {
  double extent = 0.0;
  for (std::size_t k = 0; k < ps.dim; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      lo = std::min(lo, ps[i][k]);
      hi = std::max(hi, ps[i][k]);
    }
    extent += (hi - lo) * (hi - lo);
  }
  extent = std::sqrt(extent);
  std::vector<double> r(count);
  for (std::size_t i = 0; i < count; ++i)
    r[i] = extent * std::pow(10.0, -3.0 + 3.0 * static_cast<double>(i) / static_cast<double>(count - 1));
  return r;
}

/// Correlation sums C(r) with Theiler exclusion.
inline Series correlation_sums(const PointSet& ps, const std::vector<double>& radii, std::size_t theiler) {
  if (!std::is_sorted(radii.begin(), radii.end())) throw ArgumentError("correlation: radii must be ascending");
  std::vector<std::size_t> hist(radii.size() + 1, 0);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + theiler + 1; j < ps.size(); ++j) {
      const double d = detail::euclidean(ps[i], ps[j], ps.dim);
      // first radius strictly greater than d
      const auto bin = static_cast<std::size_t>(std::upper_bound(radii.begin(), radii.end(), d) - radii.begin());
      ++hist[bin];
      ++pairs;
    }
  }
  if (pairs == 0) throw DataError("correlation: no admissible pairs");
  Series c(radii.size());
  std::size_t cum = 0;
  for (std::size_t b = 0; b < radii.size(); ++b) {
    cum += hist[b];
    c[b] = static_cast<double>(cum) / static_cast<double>(pairs);
  }
  return c;
}

inline double correlation_dimension(const Series& x, const EmbeddingSpec& spec, const CorrelationOptions& opt = {}) {
  detail::require_nonconstant(x, "correlation_dimension");
  const PointSet ps = delay_embed(x, spec);
  if (ps.size() < kMinCorrelationPoints) throw DataError("correlation_dimension: fewer than 500 embedded points");
  const std::vector<double> radii = opt.radii.empty() ? default_radii(ps) : opt.radii;
  if (radii.front() <= 0.0) throw DataError("correlation_dimension: all-zero distances");
  const std::size_t theiler = opt.theiler ? opt.theiler : spec.tau;
  const Series c = correlation_sums(ps, radii, theiler);

  std::size_t first = opt.fit_first, last = opt.fit_last;
  if (first == 0 && last == 0) {
    first = radii.size() / 3;
    last = (2 * radii.size()) / 3;
  }
  if (last >= radii.size() || first >= last) throw ArgumentError("correlation_dimension: bad fit range");
  Series lr, lc;
  for (std::size_t i = first; i <= last; ++i) {
    if (c[i] > 0.0 && c[i] < 1.0) {
      lr.push_back(std::log(radii[i]));
      lc.push_back(std::log(c[i]));
    }
  }
  if (lr.size() < 3) throw NumericalError("correlation_dimension: fewer than 3 radii with 0 < C(r) < 1");
  return ols_slope(lr, lc);
}

// --- entropies ------------------------------------------------------------------

inline double tolerance_from(const Series& x, double r_frac, const char* what) {
  const double sd = population_stddev(x);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (x.empty() || *lo == *hi || sd <= 0.0) throw DataError(std::string(what) + ": zero standard deviation (tolerance undefined)");
  return r_frac * sd;
}

/// Pincus ApEn with self-matches, Chebyshev distance.
inline double approx_entropy(const Series& x, std::size_t m = 2, double r_frac = 0.2) {
  if (m < 1) throw ArgumentError("approx_entropy: m must be >= 1");
  if (x.size() < m + 2) throw DataError("approx_entropy: series too short");
  const double r = tolerance_from(x, r_frac, "approx_entropy");
  auto phi = [&](std::size_t len) {
    const std::size_t count = x.size() - len + 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t matches = 0;
      for (std::size_t j = 0; j < count; ++j) {
        bool ok = true;
        for (std::size_t k = 0; k < len && ok; ++k) ok = std::abs(x[i + k] - x[j + k]) <= r;
        matches += ok;
      }
      acc += std::log(static_cast<double>(matches) / static_cast<double>(count));
    }
    return acc / static_cast<double>(count);
  };
  return phi(m) - phi(m + 1);
}

/// Richman-Moorman SampEn: -ln(A/B), self-matches excluded.
inline double sample_entropy(const Series& x, std::size_t m = 2, double r_frac = 0.2) {
  if (m < 1) throw ArgumentError("sample_entropy: m must be >= 1");
  if (x.size() < m + 2) throw DataError("sample_entropy: series too short");
  const double r = tolerance_from(x, r_frac, "sample_entropy");
  const std::size_t templates = x.size() - m;
  std::size_t a = 0, b = 0;
  for (std::size_t i = 0; i < templates; ++i) {
    for (std::size_t j = i + 1; j < templates; ++j) {
      bool ok = true;
      for (std::size_t k = 0; k < m && ok; ++k) ok = std::abs(x[i + k] - x[j + k]) <= r;
      if (!ok) continue;
      ++b;
      if (std::abs(x[i + m] - x[j + m]) <= r) ++a;
    }
  }
  if (a == 0 || b == 0) throw NumericalError("sample_entropy: undefined - no matches");
  return -std::log(static_cast<double>(a) / static_cast<double>(b));
}

// --- DFA --------------------------------------------------------------------------

inline constexpr std::size_t kDefaultDfaScales = 12;

/// Log-spaced integer scales in [10, n/4] (min scale lowered to 4 for short series).
inline std::vector<std::size_t> default_dfa_scales(std::size_t n) {
  const std::size_t hi = n / 4;
  const std::size_t lo = std::min<std::size_t>(10, std::max<std::size_t>(4, hi / 4));
  std::vector<std::size_t> s;
  if (hi < lo) return s;
  for (std::size_t i = 0; i < kDefaultDfaScales; ++i) {
    const double v = static_cast<double>(lo) *
                     std::pow(static_cast<double>(hi) / static_cast<double>(lo),
                              static_cast<double>(i) / static_cast<double>(kDefaultDfaScales - 1));
    const auto si = static_cast<std::size_t>(std::lround(v));
    if (s.empty() || s.back() != si) s.push_back(si);
  }
  return s;
}

/// Fluctuation F(s): RMS residual of linear detrending over non-overlapping windows.
inline double dfa_fluctuation(const Series& profile, std::size_t s) {
  const std::size_t windows = profile.size() / s;
  double ss = 0.0;
  // Window-local abscissa 0..s-1; its mean and variance are fixed.
  const double tm = (static_cast<double>(s) - 1.0) / 2.0;
  double tvar = 0.0;
  for (std::size_t t = 0; t < s; ++t) tvar += (static_cast<double>(t) - tm) * (static_cast<double>(t) - tm);
  for (std::size_t w = 0; w < windows; ++w) {
    const double* y = profile.data() + w * s;
    double ym = 0.0;
    for (std::size_t t = 0; t < s; ++t) ym += y[t];
    ym /= static_cast<double>(s);
    double cov = 0.0;
    for (std::size_t t = 0; t < s; ++t) cov += (static_cast<double>(t) - tm) * (y[t] - ym);
    const double slope = cov / tvar;
    for (std::size_t t = 0; t < s; ++t) {
      const double res = y[t] - ym - slope * (static_cast<double>(t) - tm);
      ss += res * res;
    }
  }
  return std::sqrt(ss / static_cast<double>(windows * s));
}

inline double dfa(const Series& x, std::vector<std::size_t> scales = {}) {
  if (scales.empty()) scales = default_dfa_scales(x.size());
  if (scales.size() < 4) throw DataError("dfa: need at least 4 scales (series too short?)");
  std::sort(scales.begin(), scales.end());
  if (scales.front() < 4) throw ArgumentError("dfa: minimum scale must be >= 4");
  if (scales.back() > x.size() / 4) throw DataError("dfa: series too short for maximum scale");
  detail::require_nonconstant(x, "dfa");
  const double mean = population_mean(x);
  Series profile(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) profile[i] = acc += x[i] - mean;
  Series ls, lf;
  for (std::size_t s : scales) {
    const double f = dfa_fluctuation(profile, s);
    if (!(f > 0.0)) throw NumericalError("dfa: zero fluctuation");
    ls.push_back(std::log(static_cast<double>(s)));
    lf.push_back(std::log(f));
  }
  return ols_slope(ls, lf);
}

// --- spectral entropy -----------------------------------------------------------

/// How each positive-frequency DFT bin is weighted before normalization.
enum class SpectralWeighting {
  amplitude,  // |X_k|
  power,      // |X_k|^2 (raw periodogram)
};

/// Shannon entropy (nats) of a nonnegative spectrum normalized to probabilities.
inline double entropy_of_spectrum(const Series& spectrum) {
  double total = 0.0;
  for (double v : spectrum) {
    if (v < 0.0 || !std::isfinite(v)) throw NumericalError("spectral_entropy: invalid spectrum value");
    total += v;
  }
  if (!(total > 0.0)) throw NumericalError("spectral_entropy: empty spectrum");
  double h = 0.0;
  for (double v : spectrum) {
    const double p = v / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

/// DFT magnitudes (or powers) at bins k = 1..floor(N/2); the DC bin is excluded.
inline Series positive_spectrum(const Series& x, SpectralWeighting w) {
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> out;
  Eigen::FFT<double> fft;
  fft.fwd(out, in);
  const std::size_t k = x.size() / 2;
  Series s(k);
  for (std::size_t i = 1; i <= k; ++i) s[i - 1] = w == SpectralWeighting::power ? std::norm(out[i]) : std::abs(out[i]);
  return s;
}

inline double spectral_entropy(const Series& x, SpectralWeighting w = SpectralWeighting::amplitude) {
  if (x.size() < 16) throw DataError("spectral_entropy: series too short (N < 16)");
  detail::require_nonconstant(x, "spectral_entropy");
  return entropy_of_spectrum(positive_spectrum(x, w));
}

// --- battery ------------------------------------------------------------------------

struct ChaosConfig {
  std::optional<EmbeddingSpec> embedding;  // unset -> m=3, tau from autocorrelation
  LyapunovOptions lyapunov;
  CorrelationOptions correlation;
  std::size_t entropy_m = 2;
  double r_frac = 0.2;
  SpectralWeighting spectral = SpectralWeighting::amplitude;
  std::string source = "z";  // which series the battery ran on
};

struct ChaosReport {
  double lambda = 0.0;
  double d2 = 0.0;
  double apen = 0.0;
  double sampen = 0.0;
  double dfa_alpha = 0.0;
  double spectral_entropy = 0.0;
  std::size_t n = 0;
  EmbeddingSpec embedding;
  std::size_t theiler = 0;
  double r_frac = 0.2;
  std::string source;
};

inline EmbeddingSpec default_embedding(const Series& x) { return {3, autocorrelation_delay(x)}; }

inline ChaosReport run_battery(const Series& x, const ChaosConfig& cfg = {}) {
  ChaosReport r;
  r.n = x.size();
  r.embedding = cfg.embedding.value_or(default_embedding(x));
  r.theiler = cfg.lyapunov.theiler ? cfg.lyapunov.theiler : r.embedding.tau;
  r.r_frac = cfg.r_frac;
  r.source = cfg.source;
  r.lambda = lyapunov_rosenstein(x, r.embedding, cfg.lyapunov);
  r.d2 = correlation_dimension(x, r.embedding, cfg.correlation);
  r.apen = approx_entropy(x, cfg.entropy_m, cfg.r_frac);
  r.sampen = sample_entropy(x, cfg.entropy_m, cfg.r_frac);
  r.dfa_alpha = dfa(x);
  r.spectral_entropy = spectral_entropy(x, cfg.spectral);
  return r;
}

struct GateThresholds {
  double min_lambda = 0.0;         // pass requires lambda > min_lambda
  double integer_d2_margin = 0.05;  // warn when |D2 - round(D2)| < margin
  double min_sampen = 0.05;        // warn when SampEn < this
};

struct GateResult {
  bool pass = false;
  std::vector<std::string> reasons;   // fatal
  std::vector<std::string> warnings;  // non-fatal flags
};

inline GateResult chaos_gate(const ChaosReport& r, const GateThresholds& t = {}) {
  GateResult g;
  g.pass = r.lambda > t.min_lambda;
  if (!g.pass) g.reasons.emplace_back("non-positive Lyapunov exponent");
  if (std::abs(r.d2 - std::round(r.d2)) < t.integer_d2_margin) g.warnings.emplace_back("integer-like correlation dimension");
  if (r.sampen < t.min_sampen) g.warnings.emplace_back("sample entropy below threshold");
  return g;
}

/// One header row plus one report row, fixed column order.
inline void write_report_csv(std::ostream& out, const std::string& index, const ChaosReport& r) {
  out << "Index,lambda,D2,ApEn,SampEn,DFA_alpha,Spectral_Entropy\n";
  out << index << ',' << format_number(r.lambda) << ',' << format_number(r.d2) << ',' << format_number(r.apen) << ','
      << format_number(r.sampen) << ',' << format_number(r.dfa_alpha) << ',' << format_number(r.spectral_entropy)
      << '\n';
}

// --- phase-space export --------------------------------------------------------------

struct ExportWindow {
  std::size_t start = 0;
  std::size_t length = 0;
};

inline std::vector<std::vector<double>> export_phase_space(const Series& x, const EmbeddingSpec& spec,
                                                           std::optional<ExportWindow> window = std::nullopt) {
  // Plots may use very short series; only one point is required here.
  const PointSet ps = delay_embed(x, spec, 1);
  std::size_t first = 0, count = ps.size();
  if (window) {
    if (window->length == 0 || window->start + window->length > ps.size())
      throw DataError("export_phase_space: window out of range");
    first = window->start;
    count = window->length;
  }
  std::vector<std::vector<double>> rows(count);
  for (std::size_t i = 0; i < count; ++i) rows[i].assign(ps[first + i], ps[first + i] + ps.dim);
  return rows;
}

inline void write_phase_space_csv(std::ostream& out, const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return;
  for (std::size_t k = 0; k < rows.front().size(); ++k) out << (k ? "," : "") << "x" << k;
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_number(row[k]);
    out << '\n';
  }
}

}  // namespace cmg::chaos
