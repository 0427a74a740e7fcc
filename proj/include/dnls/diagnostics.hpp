// Trajectory diagnostics: the mass/energy/virial quantities, the exact
// identity residual checks, space-time norm accumulation and the liminf test.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnls/damping.hpp"
#include "dnls/grid.hpp"

namespace dnls {

struct DiagnosticsRecord {
  double t = 0.0;
  double A_t = 0.0;
  double mass = 0.0;
  double energy = 0.0;       // E = ||grad u||^2 - 2/(p+1) ||u||_{p+1}^{p+1}
  double I = 0.0;            // I = ||grad u||^2 - ||u||_{p+1}^{p+1}
  double virial_K = 0.0;     // K = int |x|^2 |u|^2
  double V = 0.0;            // V = Im int (x.grad u) conj(u)
  double P = 0.0;            // P = ||grad u||^2 - N(p-1)/(2(p+1)) ||u||_{p+1}^{p+1}
  double H_v = 0.0;          // Hamiltonian of the gauged unknown v = e^A u
  double H_u = 0.0;          // conserved Hamiltonian of u
  double grad_norm = 0.0;    // ||grad u||_{L^2}
  double h1_norm = 0.0;
  double lp1_norm = 0.0;     // ||u||_{L^{p+1}}
  double boundary_mass_fraction = 0.0;
};

/// Evaluates every tracked quantity at time t.  mu is the nonlinearity sign
/// (-1 focusing, +1 defocusing); the potential terms of E, I, P carry it.
/// running_integral is the accumulated
/// int_0^t a(s) e^{2A(s)} ||u(s)||_{p+1}^{p+1} ds advanced by the driver.
inline DiagnosticsRecord compute_record(const Field& u, double t, double p, int mu,
                                        const DampingProfile& profile,
                                        double running_integral) {
  if (!all_finite(u)) throw std::runtime_error("compute_record: non-finite field");
  DiagnosticsRecord r;
  r.t = t;
  r.A_t = profile.A_of_t(t);
  r.mass = mass(u);
  SpectralField U = forward_transform(u);
  double grad2 = gradient_norm_sq(U);
  r.grad_norm = std::sqrt(grad2);
  r.h1_norm = std::sqrt(r.mass + grad2);
  double lp1_pow = lp_power_integral(u, p + 1.0);  // ||u||_{p+1}^{p+1}
  r.lp1_norm = std::pow(lp1_pow, 1.0 / (p + 1.0));
  const int N = u.grid.dim();
  const double s = static_cast<double>(mu);
  r.energy = grad2 + s * 2.0 / (p + 1.0) * lp1_pow;
  r.I = grad2 + s * lp1_pow;
  r.P = grad2 + s * static_cast<double>(N) * (p - 1.0) / (2.0 * (p + 1.0)) * lp1_pow;
  WeightedVariance wv = weighted_variance(u);
  r.virial_K = wv.value;
  r.boundary_mass_fraction = boundary_mass_fraction(u);
  r.V = v_functional(u);
  double e2A = std::exp(2.0 * r.A_t);
  r.H_v = e2A * r.energy;  // ||grad v||^2 + mu 2/(p+1) e^{(1-p)A} ||v||_{p+1}^{p+1}
  r.H_u = e2A * r.energy + s * 2.0 * (p - 1.0) / (p + 1.0) * running_integral;
  return r;
}

struct IdentityReport {
  double mass_id = 0.0;         // max |e^{2A} M / M0 - 1|
  double energy_id = 0.0;       // max |dE/dt + 2 a I|
  double k_id = 0.0;            // max |dK/dt + 2 a K - 4 V|
  double v_id = 0.0;            // max |dV/dt + 2 a V - 2 P|
  double hu_conservation = 0.0; // max relative (or absolute near 0) drift of H_u
  bool hu_absolute = false;

  double tol_mass = 1e-9;
  double tol_hu = 1e-6;
  double tol_diff = 1e-4;

  bool mass_ok() const { return mass_id < tol_mass; }
  bool hu_ok() const { return hu_conservation < tol_hu; }
  bool energy_ok() const { return energy_id < tol_diff; }
  bool k_ok() const { return k_id < tol_diff; }
  bool v_ok() const { return v_id < tol_diff; }
  bool all_ok() const { return mass_ok() && hu_ok() && energy_ok() && k_ok() && v_ok(); }
};

/// Residuals of the exact laws along a uniformly-sampled trajectory.  Time
/// derivatives use centered differences on interior samples.
inline IdentityReport identity_report(const std::vector<DiagnosticsRecord>& series,
                                      const DampingProfile& profile) {
  if (series.size() < 3)
    throw std::invalid_argument("identity_report: need at least 3 records");
  IdentityReport rep;
  const double m0 = series.front().mass;
  const double hu0 = series.front().H_u;
  rep.hu_absolute = std::abs(hu0) < 1e-12;
  for (const auto& r : series) {
    double mr = std::abs(std::exp(2.0 * r.A_t) * r.mass / m0 - 1.0);
    rep.mass_id = std::max(rep.mass_id, mr);
    double drift = rep.hu_absolute ? std::abs(r.H_u - hu0) : std::abs(r.H_u / hu0 - 1.0);
    rep.hu_conservation = std::max(rep.hu_conservation, drift);
  }
  for (std::size_t n = 1; n + 1 < series.size(); ++n) {
    const auto& rm = series[n - 1];
    const auto& rc = series[n];
    const auto& rp = series[n + 1];
    double delta = 0.5 * (rp.t - rm.t);
    double a = profile.a_of_t(rc.t);
    double dE = (rp.energy - rm.energy) / (2.0 * delta);
    rep.energy_id = std::max(rep.energy_id, std::abs(dE + 2.0 * a * rc.I));
    double dK = (rp.virial_K - rm.virial_K) / (2.0 * delta);
    rep.k_id = std::max(rep.k_id, std::abs(dK + 2.0 * a * rc.virial_K - 4.0 * rc.V));
    double dV = (rp.V - rm.V) / (2.0 * delta);
    rep.v_id = std::max(rep.v_id, std::abs(dV + 2.0 * a * rc.V - 2.0 * rc.P));
  }
  return rep;
}

struct SpacetimeNorm {
  std::vector<double> cumulative;  // running int_0^T ||.||^theta dt
  double total = 0.0;
  double tail_growth = 0.0;  // relative growth over the last 20% of the run
  bool saturated = false;    // tail growth < 1%
};

/// Running trapezoidal integral of value(t)^theta, optionally weighted by
/// e^{rate * t}; the saturation diagnostic flags convergent integrals.
inline SpacetimeNorm spacetime_norm(const std::vector<double>& times,
                                    const std::vector<double>& values, double theta,
                                    double weight_rate = 0.0) {
  if (times.size() != values.size())
    throw std::invalid_argument("spacetime_norm: size mismatch");
  SpacetimeNorm out;
  out.cumulative.resize(times.size(), 0.0);
  auto integrand = [&](std::size_t i) {
    return std::pow(std::exp(weight_rate * times[i]) * values[i], theta);
  };
  for (std::size_t i = 1; i < times.size(); ++i) {
    double dt = times[i] - times[i - 1];
    out.cumulative[i] = out.cumulative[i - 1] + 0.5 * (integrand(i) + integrand(i - 1)) * dt;
  }
  out.total = out.cumulative.empty() ? 0.0 : out.cumulative.back();
  if (times.size() >= 2 && out.total > 0.0) {
    std::size_t cut = times.size() - 1 - (times.size() - 1) / 5;
    out.tail_growth = (out.total - out.cumulative[cut]) / out.total;
    out.saturated = out.tail_growth < 0.01;
  } else {
    out.saturated = true;  // identically zero integrand
  }
  return out;
}

struct LiminfResult {
  double min_I_over_tail = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Checks that I(u(t)) dips to (or below) zero over the trailing half of the
/// trajectory, at a tolerance scaled by the initial H^1 size.
inline LiminfResult liminf_check(const std::vector<DiagnosticsRecord>& series) {
  if (series.size() < 4) throw std::invalid_argument("liminf_check: series too short");
  if (series.back().A_t < 3.0)
    throw std::invalid_argument("liminf_check: trajectory too short, need A(t_end) >= 3");
  LiminfResult out;
  double h1_0 = series.front().h1_norm;
  out.tolerance = 1e-3 * h1_0 * h1_0;
  out.min_I_over_tail = std::numeric_limits<double>::infinity();
  for (std::size_t i = series.size() / 2; i < series.size(); ++i)
    out.min_I_over_tail = std::min(out.min_I_over_tail, series[i].I);
  out.pass = out.min_I_over_tail <= out.tolerance;
  return out;
}

inline const char* kDiagnosticsCsvHeader =
    "t,A_t,mass,energy,I,virial_K,V,P,H_v,H_u,grad_norm,h1_norm,lp1_norm,"
    "boundary_mass_fraction";

inline void write_diagnostics_csv(std::ostream& os,
                                  const std::vector<DiagnosticsRecord>& series) {
  os << kDiagnosticsCsvHeader << "\n";
  char buf[512];
  for (const auto& r : series) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g\n",
                  r.t, r.A_t, r.mass, r.energy, r.I, r.virial_K, r.V, r.P, r.H_v,
                  r.H_u, r.grad_norm, r.h1_norm, r.lp1_norm, r.boundary_mass_fraction);
    os << buf;
  }
}

inline std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("diagnostics csv: empty input");
  if (line != kDiagnosticsCsvHeader)
    throw std::runtime_error("diagnostics csv: unexpected header: " + line);
  std::vector<DiagnosticsRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    DiagnosticsRecord r;
    if (!(ls >> r.t >> r.A_t >> r.mass >> r.energy >> r.I >> r.virial_K >> r.V >>
          r.P >> r.H_v >> r.H_u >> r.grad_norm >> r.h1_norm >> r.lp1_norm >>
          r.boundary_mass_fraction))
      throw std::runtime_error("diagnostics csv: malformed row: " + line);
    out.push_back(r);
  }
  return out;
}

inline std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("diagnostics csv: cannot open " + path);
  return read_diagnostics_csv(in);
}

}  // namespace dnls
