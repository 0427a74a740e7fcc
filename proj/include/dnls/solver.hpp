// Strang split-step Fourier evolution of the damped NLS
//   i u_t + Lap u + i a(t) u = mu |u|^{p-1} u
// in the direct and gauged (v = e^{A(t)} u) formulations, plus the binary
// checkpoint format.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnls/damping.hpp"
#include "dnls/diagnostics.hpp"
#include "dnls/grid.hpp"

namespace dnls {

enum class Formulation { kDirect, kGauged };

struct InitialDataSpec {
  enum class Kind { kGaussian, kSoliton, kScaledProfile };
  Kind kind = Kind::kGaussian;
  // gaussian: amplitude * exp(-|x - center|^2 / (2 width^2)) * exp(i wave_vector.x)
  double amplitude = 1.0;
  double width = 1.0;
  std::vector<double> center;       // defaults to origin
  std::vector<double> wave_vector;  // defaults to zero
  // soliton (1D, p = 3): sqrt(2) eta sech(eta x) -- exact profile of the
  // focusing cubic equation.
  double eta = 1.0;
  // scaled_profile: checkpoint file times a scalar
  std::string path;
  double scale = 1.0;
};

struct SimConfig {
  int dim = 1;
  double p = 3.0;
  int mu = -1;  // -1 focusing, +1 defocusing
  int points = 256;
  double half_length = 20.0;
  DampingProfile damping = DampingProfile::zero();
  double t_end = 1.0;
  double dt = 1e-3;
  Formulation formulation = Formulation::kDirect;
  InitialDataSpec initial_data;
  double cadence = 1e-2;  // diagnostics output spacing
  double blowup_threshold = 1e6;
  bool nonlinearity = true;  // test hook: false gives the linear damped flow

  void validate() const {
    if (!(p > 1.0)) throw std::invalid_argument("config: p must exceed 1");
    double p_max = (dim >= 3) ? 1.0 + 4.0 / (dim - 2) : std::numeric_limits<double>::infinity();
    if (!(p < p_max))
      throw std::invalid_argument("config: energy-supercritical p (need p < 1+4/(N-2))");
    if (mu != 1 && mu != -1) throw std::invalid_argument("config: mu must be +1 or -1");
    if (!(dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("config: t_end must be positive");
    if (!(cadence >= dt)) throw std::invalid_argument("config: cadence must be >= dt");
    if (!(blowup_threshold > 0.0))
      throw std::invalid_argument("config: blowup_threshold must be positive");
  }

  Grid make_grid() const { return Grid(dim, points, half_length); }
};

/// Raised when the field leaves the finite range mid-run.
class instability_error : public std::runtime_error {
 public:
  instability_error(double t)
      : std::runtime_error("non-finite field values at t = " + std::to_string(t)), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

// Checkpoint IO --------------------------------------------------------------
// Layout: "DNLS", version u32, dim u32, points u32, half_length f64, time f64,
// then interleaved little-endian f64 (re, im), row-major.

inline void write_checkpoint(const std::string& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  os.write("DNLS", 4);
  auto put_u32 = [&os](std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
  auto put_f64 = [&os](double v) { os.write(reinterpret_cast<const char*>(&v), 8); };
  put_u32(1u);
  put_u32(static_cast<std::uint32_t>(f.grid.dim()));
  put_u32(static_cast<std::uint32_t>(f.grid.points_per_axis()));
  put_f64(f.grid.half_length());
  put_f64(f.time);
  for (const auto& v : f.values) {
    put_f64(v.real());
    put_f64(v.imag());
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

inline Field read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "DNLS", 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  auto get_u32 = [&is]() {
    std::uint32_t v;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  auto get_f64 = [&is]() {
    double v;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  std::uint32_t version = get_u32();
  if (version != 1u) throw std::runtime_error("checkpoint: unsupported version");
  int dim = static_cast<int>(get_u32());
  int points = static_cast<int>(get_u32());
  double half_length = get_f64();
  double time = get_f64();
  Grid g(dim, points, half_length);
  Field f(g, time);
  for (auto& v : f.values) {
    double re = get_f64();
    double im = get_f64();
    v = Complex(re, im);
  }
  if (!is) throw std::runtime_error("checkpoint: truncated file " + path);
  return f;
}

// Initial data ---------------------------------------------------------------

inline Field build_initial_data(const SimConfig& cfg) {
  Grid g = cfg.make_grid();
  const InitialDataSpec& s = cfg.initial_data;
  switch (s.kind) {
    case InitialDataSpec::Kind::kGaussian: {
      Field f(g);
      std::vector<double> c(static_cast<std::size_t>(g.dim()), 0.0);
      std::vector<double> kv(static_cast<std::size_t>(g.dim()), 0.0);
      for (std::size_t d = 0; d < c.size(); ++d) {
        if (d < s.center.size()) c[d] = s.center[d];
        if (d < s.wave_vector.size()) kv[d] = s.wave_vector[d];
      }
      int idx[3];
      for (std::size_t i = 0; i < f.values.size(); ++i) {
        g.unflatten(i, idx);
        double r2 = 0.0, phase = 0.0;
        for (int d = 0; d < g.dim(); ++d) {
          double x = g.coordinate(idx[d]);
          double dx = x - c[static_cast<std::size_t>(d)];
          r2 += dx * dx;
          phase += kv[static_cast<std::size_t>(d)] * x;
        }
        f.values[i] = s.amplitude * std::exp(-r2 / (2.0 * s.width * s.width)) *
                      std::polar(1.0, phase);
      }
      return f;
    }
    case InitialDataSpec::Kind::kSoliton: {
      if (g.dim() != 1 || cfg.p != 3.0)
        throw std::invalid_argument("soliton initial data requires dim = 1 and p = 3");
      Field f(g);
      const double eta = s.eta;
      for (int i = 0; i < g.points_per_axis(); ++i) {
        double x = g.coordinate(i);
        f.values[static_cast<std::size_t>(i)] = std::sqrt(2.0) * eta / std::cosh(eta * x);
      }
      return f;
    }
    case InitialDataSpec::Kind::kScaledProfile: {
      Field f = read_checkpoint(s.path);
      if (!f.grid.same_layout(g))
        throw std::invalid_argument("scaled_profile: checkpoint grid does not match config");
      for (auto& v : f.values) v *= s.scale;
      f.time = 0.0;
      return f;
    }
  }
  throw std::logic_error("unreachable");
}

// Gauge transfer -------------------------------------------------------------

enum class GaugeDirection { kUToV, kVToU };

/// Pointwise multiply by e^{+A(t)} (u -> v) or e^{-A(t)} (v -> u).
inline Field gauge_transfer(const Field& f, double t, const DampingProfile& profile,
                            GaugeDirection dir) {
  double A = profile.A_of_t(t);
  double factor = std::exp(dir == GaugeDirection::kUToV ? A : -A);
  Field out = f;
  for (auto& v : out.values) v *= factor;
  return out;
}

// Strang stepping ------------------------------------------------------------

namespace detail {

// int_{t1}^{t2} e^{(1-p) A(s)} ds; closed form for constant/zero damping,
// 5-point Gauss-Legendre otherwise (the integrand is smooth on a substep).
inline double gauged_phase_integral(const DampingProfile& profile, double p, double t1,
                                    double t2) {
  const double c = 1.0 - p;
  switch (profile.kind()) {
    case DampingKind::kZero:
      return t2 - t1;
    case DampingKind::kConstant: {
      double a = profile.amplitude();
      if (a == 0.0) return t2 - t1;
      return (std::exp(c * a * t2) - std::exp(c * a * t1)) / (c * a);
    }
    default: {
      static const double xs[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                   0.5384693101056831, 0.9061798459386640};
      static const double ws[5] = {0.2369268850561891, 0.4786286704993665,
                                   0.5688888888888889, 0.4786286704993665,
                                   0.2369268850561891};
      double mid = 0.5 * (t1 + t2), half = 0.5 * (t2 - t1);
      double s = 0.0;
      for (int i = 0; i < 5; ++i)
        s += ws[i] * std::exp(c * profile.A_of_t(mid + half * xs[i]));
      return s * half;
    }
  }
}

}  // namespace detail

/// One Strang step of length dt starting at time t (dt may be negative for
/// reversibility checks).  The direct form folds the exact damping increment
/// into the linear half-steps so the discrete mass law holds to roundoff; the
/// gauged form evolves v with a pure free flow and the exactly integrated
/// nonlinear phase.
inline Field step_strang(const Field& state, double t, double dt, const SimConfig& cfg) {
  if (dt == 0.0) throw std::invalid_argument("step_strang: dt must be nonzero");
  const Grid& g = state.grid;
  const bool direct = cfg.formulation == Formulation::kDirect;

  auto half_linear = [&](SpectralField& F, double t0, double t1) {
    int idx[3];
    double damp = direct ? std::exp(-cfg.damping.A_increment(std::min(t0, t1), std::max(t0, t1)) *
                                    (t1 > t0 ? 1.0 : -1.0))
                         : 1.0;
    // note: for reversed time the damping factor is inverted
    double delta = t1 - t0;
    for (std::size_t i = 0; i < F.coefficients.size(); ++i) {
      g.unflatten(i, idx);
      double k2 = 0.0;
      for (int d = 0; d < g.dim(); ++d) {
        double k = g.wavenumber(idx[d]);
        k2 += k * k;
      }
      F.coefficients[i] *= damp * std::polar(1.0, -k2 * delta);
    }
  };

  SpectralField F = forward_transform(state);
  half_linear(F, t, t + 0.5 * dt);
  Field u = inverse_transform(F);

  if (cfg.nonlinearity) {
    const double pm1 = cfg.p - 1.0;
    double phase_scale;
    if (direct) {
      phase_scale = static_cast<double>(cfg.mu) * dt;
    } else {
      phase_scale = static_cast<double>(cfg.mu) *
                    detail::gauged_phase_integral(cfg.damping, cfg.p, t, t + dt);
    }
    if (pm1 == 2.0) {
      for (auto& v : u.values) v *= std::polar(1.0, -phase_scale * std::norm(v));
    } else {
      for (auto& v : u.values)
        v *= std::polar(1.0, -phase_scale * std::pow(std::abs(v), pm1));
    }
  }

  F = forward_transform(u);
  half_linear(F, t + 0.5 * dt, t + dt);
  Field out = inverse_transform(F);
  out.time = t + dt;
  return out;
}

// Evolution driver -----------------------------------------------------------

struct TrajectorySummary {
  double final_time = 0.0;
  double final_mass = 0.0;
  double final_h1 = 0.0;
  bool blowup = false;
  double blowup_time = 0.0;
  double wall_seconds = 0.0;
  std::size_t steps = 0;
};

/// Record sink invoked at every output cadence point with the u-frame field.
using RecordSink = std::function<void(const Field& u, const DiagnosticsRecord&)>;

/// Steps from 0 to t_end, emitting diagnostics at the configured cadence and
/// advancing the running dissipation integral at solver resolution.  The
/// blow-up guard aborts once ||grad u|| exceeds the configured threshold.
inline TrajectorySummary evolve(const SimConfig& cfg, const RecordSink& sink) {
  cfg.validate();
  auto t_start = std::chrono::steady_clock::now();

  Field state = build_initial_data(cfg);
  if (boundary_mass_fraction(state) >= 1e-8)
    throw std::invalid_argument("initial data: boundary-shell mass exceeds 1e-8 of total");

  const bool gauged = cfg.formulation == Formulation::kGauged;
  const std::size_t n_steps =
      static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  const std::size_t cadence_steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.cadence / cfg.dt)));

  // Trapezoidal accumulator for int_0^t a e^{2A} ||u||_{p+1}^{p+1} ds,
  // advanced every solver step.
  double running_integral = 0.0;
  auto dissipation_integrand = [&cfg](const Field& u, double t) {
    double A = cfg.damping.A_of_t(t);
    return cfg.damping.a_of_t(t) * std::exp(2.0 * A) * lp_power_integral(u, cfg.p + 1.0);
  };

  auto u_frame = [&](const Field& f, double t) {
    return gauged ? gauge_transfer(f, t, cfg.damping, GaugeDirection::kVToU) : f;
  };

  TrajectorySummary summary;
  double prev_integrand = dissipation_integrand(u_frame(state, 0.0), 0.0);
  if (sink) sink(u_frame(state, 0.0), compute_record(u_frame(state, 0.0), 0.0, cfg.p,
                                                     cfg.mu, cfg.damping, running_integral));

  for (std::size_t n = 0; n < n_steps; ++n) {
    double t = static_cast<double>(n) * cfg.dt;
    state = step_strang(state, t, cfg.dt, cfg);
    double t_next = static_cast<double>(n + 1) * cfg.dt;
    ++summary.steps;

    if (!all_finite(state)) throw instability_error(t_next);

    Field u = u_frame(state, t_next);
    double integrand = dissipation_integrand(u, t_next);
    running_integral += 0.5 * (prev_integrand + integrand) * cfg.dt;
    prev_integrand = integrand;

    bool at_cadence = ((n + 1) % cadence_steps == 0) || (n + 1 == n_steps);
    if (at_cadence) {
      DiagnosticsRecord rec =
          compute_record(u, t_next, cfg.p, cfg.mu, cfg.damping, running_integral);
      if (rec.grad_norm > cfg.blowup_threshold) {
        summary.blowup = true;
        summary.blowup_time = t_next;
        summary.final_time = t_next;
        summary.final_mass = rec.mass;
        summary.final_h1 = rec.h1_norm;
        break;
      }
      if (sink) sink(u, rec);
      if (n + 1 == n_steps) {
        summary.final_time = t_next;
        summary.final_mass = rec.mass;
        summary.final_h1 = rec.h1_norm;
      }
    }
  }

  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return summary;
}

}  // namespace dnls
