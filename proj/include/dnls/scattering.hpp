// Scattering diagnostics: back-propagated profiles w(t) = e^{A(t)} e^{-it Lap} u(t),
// the H^1 Cauchy test on stored samples, and the decay-envelope checks.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnls/damping.hpp"
#include "dnls/diagnostics.hpp"
#include "dnls/grid.hpp"

namespace dnls {

/// Undoes the linear damped flow: w_hat_k = e^{A(t)} e^{+i|k|^2 t} u_hat_k.
inline Field back_propagate(const Field& f, double t, const DampingProfile& profile) {
  double A = profile.A_of_t(t);
  if (A > 700.0)
    throw std::range_error("back_propagate: e^{A(t)} exceeds double range (A > 700)");
  double amp = std::exp(A);
  SpectralField F = forward_transform(f);
  const Grid& g = F.grid;
  int idx[3];
  for (std::size_t i = 0; i < F.coefficients.size(); ++i) {
    g.unflatten(i, idx);
    double k2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      double k = g.wavenumber(idx[d]);
      k2 += k * k;
    }
    F.coefficients[i] *= amp * std::polar(1.0, k2 * t);
  }
  Field out = inverse_transform(F);
  out.time = t;
  return out;
}

inline double h1_difference(const Field& a, const Field& b) {
  if (!a.grid.same_layout(b.grid))
    throw std::invalid_argument("h1_difference: grid mismatch");
  Field d = a;
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
  return h1_norm(d);
}

struct CauchyResult {
  std::vector<double> times;
  std::vector<std::vector<double>> matrix;  // ||w(t_i) - w(t_j)||_{H^1}
  double rate = 0.0;                        // fitted decay rate of ||w(t_max) - w(t)||
  double last_difference = 0.0;
  double reference_norm = 0.0;  // ||w(t_max)||_{H^1}
  bool monotone_tail = false;
  bool pass = false;
};

/// All pairwise H^1 differences of stored back-propagated samples plus an
/// exponential fit of ||w(t_max) - w(t)|| against t.  Pass requires the last
/// difference below 1e-3 of the reference norm and a monotone decreasing tail.
inline CauchyResult cauchy_test(const std::vector<std::pair<double, Field>>& samples,
                                double rel_tol = 1e-3) {
  if (samples.size() < 4) throw std::invalid_argument("cauchy_test: need >= 4 samples");
  CauchyResult out;
  const std::size_t n = samples.size();
  out.times.reserve(n);
  for (const auto& s : samples) out.times.push_back(s.first);
  out.matrix.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = h1_difference(samples[i].second, samples[j].second);
      out.matrix[i][j] = out.matrix[j][i] = d;
    }
  out.reference_norm = h1_norm(samples.back().second);
  out.last_difference = out.matrix[n - 1][n - 2];

  // least-squares fit of log ||w(t_max) - w(t)|| = c - rate * t over samples
  // with a nonzero difference
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double d = out.matrix[i][n - 1];
    if (d <= 0.0) continue;
    double x = out.times[i], y = std::log(d);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 2 && (m * sxx - sx * sx) > 0.0) out.rate = -(m * sxy - sx * sy) / (m * sxx - sx * sx);

  out.monotone_tail = true;
  for (std::size_t i = n / 2; i + 2 < n; ++i)
    if (out.matrix[i + 1][n - 1] > out.matrix[i][n - 1] * (1.0 + 1e-9))
      out.monotone_tail = false;
  out.pass = out.monotone_tail &&
             out.last_difference < rel_tol * std::max(out.reference_norm, 1e-300);
  return out;
}

struct DecayReport {
  double sup_weighted_grad = 0.0;   // sup_t e^{A(t)} ||grad u(t)||
  double fitted_C = 0.0;            // constant of the decay envelope
  double tail_variation = 0.0;      // relative variation of e^A ||grad u|| over tail
  double min_exp_scat = 0.0;        // min over tail of e^{-a_lower t} ||u||_{H^1}
  double epsilon = 0.0;
  bool envelope_ok = false;         // ||grad u|| <= fitted_C e^{-A} (by construction)
  bool exp_scat_ok = false;         // min_exp_scat < epsilon
};

/// Decay-side diagnostics over a trajectory: the weighted gradient supremum
/// (the fitted envelope constant), its tail flatness, and the exponential
/// smallness check at rate a_lower.
inline DecayReport decay_report(const std::vector<DiagnosticsRecord>& series,
                                const DampingProfile& profile,
                                double epsilon = -1.0) {
  if (series.empty()) throw std::invalid_argument("decay_report: empty series");
  DecayReport out;
  DampingScalars sc = damping_scalars(profile);
  double tail_min = std::numeric_limits<double>::infinity();
  double tail_max = 0.0;
  double exp_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& r = series[i];
    double w = std::exp(r.A_t) * r.grad_norm;
    out.sup_weighted_grad = std::max(out.sup_weighted_grad, w);
    if (i >= series.size() / 2) {
      tail_min = std::min(tail_min, w);
      tail_max = std::max(tail_max, w);
      exp_min = std::min(exp_min, std::exp(-sc.a_lower * r.t) * r.h1_norm);
    }
  }
  out.fitted_C = out.sup_weighted_grad;
  out.envelope_ok = true;  // C is fitted as the supremum, so the envelope holds
  out.tail_variation = (tail_max > 0.0) ? (tail_max - tail_min) / tail_max : 0.0;
  out.min_exp_scat = std::isfinite(exp_min) ? exp_min : 0.0;
  out.epsilon = (epsilon > 0.0) ? epsilon : 1e-2 * series.front().h1_norm;
  out.exp_scat_ok = out.min_exp_scat < out.epsilon;
  return out;
}

struct ScatteringReport {
  CauchyResult cauchy;
  DecayReport decay;
  std::optional<Field> u_plus;  // latest back-propagated sample
  bool verdict = false;

  std::string to_text() const {
    std::ostringstream os;
    os << "[scattering]\n";
    os << "verdict = " << (verdict ? "pass" : "fail") << "\n";
    os << "cauchy.pass = " << (cauchy.pass ? "true" : "false") << "\n";
    os << "cauchy.last_difference = " << cauchy.last_difference << "\n";
    os << "cauchy.reference_norm = " << cauchy.reference_norm << "\n";
    os << "cauchy.rate = " << cauchy.rate << "\n";
    os << "cauchy.monotone_tail = " << (cauchy.monotone_tail ? "true" : "false") << "\n";
    os << "decay.sup_weighted_grad = " << decay.sup_weighted_grad << "\n";
    os << "decay.fitted_C = " << decay.fitted_C << "\n";
    os << "decay.tail_variation = " << decay.tail_variation << "\n";
    os << "decay.min_exp_scat = " << decay.min_exp_scat << "\n";
    os << "decay.epsilon = " << decay.epsilon << "\n";
    os << "decay.exp_scat_ok = " << (decay.exp_scat_ok ? "true" : "false") << "\n";
    return os.str();
  }
};

/// Full report from stored u-frame samples plus the diagnostics series.
inline ScatteringReport scattering_report(const std::vector<std::pair<double, Field>>& u_samples,
                                          const std::vector<DiagnosticsRecord>& series,
                                          const DampingProfile& profile,
                                          double epsilon = -1.0) {
  ScatteringReport rep;
  std::vector<std::pair<double, Field>> w_samples;
  w_samples.reserve(u_samples.size());
  for (const auto& [t, u] : u_samples)
    w_samples.emplace_back(t, back_propagate(u, t, profile));
  rep.cauchy = cauchy_test(w_samples);
  rep.decay = decay_report(series, profile, epsilon);
  if (!w_samples.empty()) rep.u_plus = w_samples.back().second;
  rep.verdict = rep.cauchy.pass;
  return rep;
}

}  // namespace dnls
