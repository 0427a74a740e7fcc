// Exponent calculators, sharp Gagliardo-Nirenberg constant estimation via the
// Weinstein ratio, and executable verifiers for the Gronwall and bootstrap
// lemmas used by the scattering arguments.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnls/damping.hpp"
#include "dnls/grid.hpp"

namespace dnls {

enum class Criticality {
  kMassSubcritical,
  kMassCritical,
  kIntercritical,
  kEnergyCriticalExcluded
};

struct ExponentSet {
  double sigma = 0.0;  // N (p-1) / 2
  double theta = 0.0;  // 2 (p-1)(p+1) / (4 - (N-2)(p-1))
  double q0 = 0.0;     // 4 (p+1) / (N (p-1))
  double r0 = 0.0;     // p + 1
  Criticality criticality = Criticality::kMassSubcritical;
};

/// Scaling exponents of the nonlinearity and the admissible Strichartz pair
/// (q0, r0) with 2/q0 + N/r0 = N/2.
inline ExponentSet exponents(int N, double p) {
  if (N < 1) throw std::domain_error("exponents: dimension must be positive");
  double p_max = (N >= 3) ? 1.0 + 4.0 / (N - 2) : std::numeric_limits<double>::infinity();
  if (!(p > 1.0 && p < p_max))
    throw std::domain_error("exponents: p outside the energy-subcritical range");
  ExponentSet e;
  e.sigma = 0.5 * N * (p - 1.0);
  e.theta = 2.0 * (p - 1.0) * (p + 1.0) / (4.0 - (N - 2) * (p - 1.0));
  e.q0 = 4.0 * (p + 1.0) / (N * (p - 1.0));
  e.r0 = p + 1.0;
  double p_mass = 1.0 + 4.0 / N;
  if (std::abs(p - p_mass) < 1e-12)
    e.criticality = Criticality::kMassCritical;
  else if (p < p_mass)
    e.criticality = Criticality::kMassSubcritical;
  else
    e.criticality = Criticality::kIntercritical;
  return e;
}

struct GNEstimate {
  double K = 0.0;  // estimated sharp constant
  double sigma = 0.0;
  std::optional<Field> trial_profile;
  double residual = 0.0;  // last relative improvement of the ratio
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Weinstein ratio J(u) = ||u||_{p+1}^{p+1} / (||u||_2^{p+1-sigma} ||grad u||_2^sigma)
inline double weinstein_ratio(const Field& u, double p, double sigma) {
  double num = lp_power_integral(u, p + 1.0);
  double m = mass(u);
  double g2 = gradient_norm_sq(u);
  if (m <= 0.0 || g2 <= 0.0) return 0.0;
  return num / (std::pow(std::sqrt(m), p + 1.0 - sigma) * std::pow(std::sqrt(g2), sigma));
}

}  // namespace detail

/// Maximizes the Weinstein ratio over real nonnegative profiles by projected
/// gradient ascent from a Gaussian seed (maximizers are real ground states).
/// K is the ratio at convergence.
inline GNEstimate gn_estimate(int N, double p, const Grid& grid) {
  ExponentSet ex = exponents(N, p);
  const double sigma = ex.sigma;
  if (grid.dim() != N) throw std::invalid_argument("gn_estimate: grid dimension mismatch");

  Field u(grid);
  int idx[3];
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    grid.unflatten(i, idx);
    double r2 = 0.0;
    for (int d = 0; d < N; ++d) {
      double x = grid.coordinate(idx[d]);
      r2 += x * x;
    }
    u.values[i] = std::exp(-0.5 * r2);
  }

  auto normalize = [](Field& f) {
    double m = std::sqrt(mass(f));
    for (auto& v : f.values) v /= m;
  };
  normalize(u);

  GNEstimate est;
  est.sigma = sigma;
  est.trial_profile = u;

  double J = detail::weinstein_ratio(u, p, sigma);
  double tau = 0.05;
  int flat_iters = 0;
  const int max_iters = 100000;

  for (int it = 0; it < max_iters; ++it) {
    // gradient of log J: (p+1) u^p / P - (p+1-sigma) u / M + sigma Lap u / G
    double P = lp_power_integral(u, p + 1.0);
    double M = mass(u);
    double G = gradient_norm_sq(u);
    SpectralField U = forward_transform(u);
    for (std::size_t i = 0; i < U.coefficients.size(); ++i) {
      grid.unflatten(i, idx);
      double k2 = 0.0;
      for (int d = 0; d < N; ++d) {
        double k = grid.wavenumber(idx[d]);
        k2 += k * k;
      }
      U.coefficients[i] *= -k2;  // Laplacian
    }
    Field lap = inverse_transform(U);
    Field grad(grid);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      double uv = u.values[i].real();
      double up = (p == 3.0) ? uv * uv * uv : std::pow(std::max(uv, 0.0), p);
      grad.values[i] = (p + 1.0) * up / P - (p + 1.0 - sigma) * uv / M +
                       sigma * lap.values[i].real() / G;
    }

    // backtracking ascent step with nonnegativity projection
    bool improved = false;
    for (int bt = 0; bt < 40; ++bt) {
      Field trial(grid);
      for (std::size_t i = 0; i < u.values.size(); ++i) {
        double v = u.values[i].real() + tau * grad.values[i].real();
        trial.values[i] = std::max(v, 0.0);
      }
      normalize(trial);
      double Jt = detail::weinstein_ratio(trial, p, sigma);
      if (Jt > J) {
        est.residual = (Jt - J) / Jt;
        u = trial;
        J = Jt;
        tau *= 1.2;
        improved = true;
        break;
      }
      tau *= 0.5;
    }
    est.iterations = it + 1;
    if (!improved || est.residual < 1e-10) {
      if (++flat_iters >= 50) {
        est.converged = true;
        break;
      }
    } else {
      flat_iters = 0;
    }
  }

  est.K = J;
  est.trial_profile = u;
  return est;
}

struct GronwallResult {
  bool hypotheses_ok = false;
  std::vector<double> bound_curve;
  bool satisfied = false;
  double max_hypothesis_violation = 0.0;
  double t0 = 0.0;  // beta = 1 branch: first time with g <= 1/2
};

/// Checks the integral-inequality hypothesis pointwise (trapezoidal integral
/// of h f^beta), then asserts the explicit a-priori bound:
///   beta < 1:  (2C + 2(1-beta)(2 beta)^{beta/(1-beta)} ||g||_inf
///               + 2(1-beta) int h) * exp(2 beta int h)
///   beta = 1:  (2C + sup_{[0,t0]} f) * exp(2 int h),  t0 the first sample
///              with g <= 1/2.
inline GronwallResult gronwall_verify(const std::vector<double>& times,
                                      const std::vector<double>& f,
                                      const std::vector<double>& g,
                                      const std::vector<double>& h, double C,
                                      double beta, double rel_slack = 1e-7) {
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("gronwall_verify: beta must lie in (0, 1]");
  if (!(C > 0.0)) throw std::invalid_argument("gronwall_verify: C must be positive");
  const std::size_t n = times.size();
  if (f.size() != n || g.size() != n || h.size() != n || n < 2)
    throw std::invalid_argument("gronwall_verify: inconsistent sample arrays");

  GronwallResult out;

  // running int_0^t h f^beta and int_0^t h (trapezoid)
  std::vector<double> int_hfb(n, 0.0), int_h(n, 0.0);
  auto fb = [&](std::size_t i) { return std::pow(f[i], beta); };
  for (std::size_t i = 1; i < n; ++i) {
    double dt = times[i] - times[i - 1];
    int_hfb[i] = int_hfb[i - 1] + 0.5 * (h[i] * fb(i) + h[i - 1] * fb(i - 1)) * dt;
    int_h[i] = int_h[i - 1] + 0.5 * (h[i] + h[i - 1]) * dt;
  }

  out.hypotheses_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    double rhs = C + g[i] * fb(i) + int_hfb[i];
    double viol = f[i] - rhs * (1.0 + rel_slack);
    out.max_hypothesis_violation = std::max(out.max_hypothesis_violation, viol);
    if (viol > 0.0) out.hypotheses_ok = false;
  }

  out.bound_curve.resize(n, 0.0);
  if (beta < 1.0) {
    double g_sup = 0.0;
    for (double gv : g) g_sup = std::max(g_sup, gv);
    double young = 2.0 * (1.0 - beta) * std::pow(2.0 * beta, beta / (1.0 - beta)) * g_sup;
    for (std::size_t i = 0; i < n; ++i)
      out.bound_curve[i] = (2.0 * C + young + 2.0 * (1.0 - beta) * int_h[i]) *
                           std::exp(2.0 * beta * int_h[i]);
  } else {
    // first sample where g drops to 1/2; the lemma needs g -> 0
    std::size_t i0 = n;
    for (std::size_t i = 0; i < n; ++i)
      if (g[i] <= 0.5) {
        i0 = i;
        break;
      }
    if (i0 == n) {
      out.hypotheses_ok = false;
      return out;
    }
    out.t0 = times[i0];
    double f_sup = 0.0;
    for (std::size_t i = 0; i <= i0; ++i) f_sup = std::max(f_sup, f[i]);
    for (std::size_t i = 0; i < n; ++i)
      out.bound_curve[i] = (2.0 * C + f_sup) * std::exp(2.0 * int_h[i]);
  }

  if (out.hypotheses_ok) {
    out.satisfied = true;
    for (std::size_t i = 0; i < n; ++i)
      if (f[i] > out.bound_curve[i] * (1.0 + rel_slack)) out.satisfied = false;
  }
  return out;
}

struct BootstrapResult {
  bool hypothesis_ok = false;   // X(t) <= a + b X(t)^theta pointwise
  bool smallness_ok = false;    // X(t0) <= a and a b^{1/(theta-1)} below threshold
  bool conclusion_ok = false;   // X(t) < theta a / (theta - 1) everywhere
  double threshold = 0.0;       // (theta-1) theta^{theta/(1-theta)}
  double bound = 0.0;           // theta a / (theta - 1)
};

/// Continuity-argument verifier: hypothesis and smallness condition checked
/// on the samples, conclusion bound asserted pointwise.
inline BootstrapResult bootstrap_verify(const std::vector<double>& X, double a, double b,
                                        double theta, double rel_slack = 1e-9) {
  if (!(theta > 1.0)) throw std::invalid_argument("bootstrap_verify: theta must exceed 1");
  if (!(a > 0.0 && b > 0.0))
    throw std::invalid_argument("bootstrap_verify: a and b must be positive");
  if (X.empty()) throw std::invalid_argument("bootstrap_verify: empty samples");
  BootstrapResult out;
  out.threshold = (theta - 1.0) * std::pow(theta, theta / (1.0 - theta));
  out.bound = theta * a / (theta - 1.0);
  out.hypothesis_ok = true;
  for (double x : X)
    if (x > (a + b * std::pow(x, theta)) * (1.0 + rel_slack)) out.hypothesis_ok = false;
  out.smallness_ok =
      X.front() <= a * (1.0 + rel_slack) && a * std::pow(b, 1.0 / (theta - 1.0)) < out.threshold;
  out.conclusion_ok = true;
  for (double x : X)
    if (!(x < out.bound)) out.conclusion_ok = false;
  return out;
}

/// (p-1) int_0^t a(s) e^{(1-p)A(s)} ds equals 1 - e^{(1-p)A(t)} exactly; the
/// quadrature check used in bootstrap preprocessing.  Returns the absolute
/// mismatch between the two routes.
inline double damping_phase_identity_residual(const DampingProfile& profile, double p,
                                              double t, int panels = 4096) {
  double closed = 1.0 - std::exp((1.0 - p) * profile.A_of_t(t));
  // composite Simpson on [0, t]
  double hstep = t / (2.0 * panels);
  auto integrand = [&](double s) {
    return profile.a_of_t(s) * std::exp((1.0 - p) * profile.A_of_t(s));
  };
  double s = integrand(0.0) + integrand(t);
  for (int i = 1; i < 2 * panels; ++i) s += (i % 2 ? 4.0 : 2.0) * integrand(hstep * i);
  double quad = (p - 1.0) * s * hstep / 3.0;
  return std::abs(quad - closed);
}

}  // namespace dnls
