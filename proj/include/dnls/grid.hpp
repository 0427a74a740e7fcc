// Periodic-box spectral discretization: grids, complex fields, FFT transforms
// and the norm/functional evaluations used by the diagnostics.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

namespace dnls {

using Complex = std::complex<double>;

namespace detail {

// FFTW plan pair for a cubic n^dim complex-to-complex transform.
// Plans are created once per Grid and never mutated afterwards; execution
// through the new-array interface is thread-safe.
class TransformPlan {
 public:
  TransformPlan(int dim, int points) : dim_(dim), points_(points) {
    std::size_t size = 1;
    for (int d = 0; d < dim; ++d) size *= static_cast<std::size_t>(points);
    std::vector<Complex> a(size), b(size);
    std::vector<int> n(static_cast<std::size_t>(dim), points);
    // The FFTW planner is not thread-safe; executions are.
    static std::mutex planner_mutex;
    std::lock_guard<std::mutex> lock(planner_mutex);
    fwd_ = fftw_plan_dft(dim, n.data(), reinterpret_cast<fftw_complex*>(a.data()),
                         reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft(dim, n.data(), reinterpret_cast<fftw_complex*>(a.data()),
                         reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (fwd_ == nullptr || bwd_ == nullptr)
      throw std::runtime_error("FFTW plan creation failed");
  }

  ~TransformPlan() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }

  TransformPlan(const TransformPlan&) = delete;
  TransformPlan& operator=(const TransformPlan&) = delete;

  void forward(const Complex* in, Complex* out) const {
    fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }
  void backward(const Complex* in, Complex* out) const {
    fftw_execute_dft(bwd_, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }

 private:
  int dim_;
  int points_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace detail

/// Uniform periodic grid on [-L, L)^N, N in {1,2,3}, with standard FFT
/// wavenumber ordering k_j = pi*j/L, j = 0..n/2-1, -n/2..-1.
class Grid {
 public:
  Grid(int dim, int points_per_axis, double half_length)
      : dim_(dim), points_(points_per_axis), half_length_(half_length) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("Grid: dim must be 1, 2 or 3");
    if (points_per_axis < 16 || !detail::is_power_of_two(points_per_axis))
      throw std::invalid_argument("Grid: points_per_axis must be a power of two >= 16");
    if (!(half_length > 0.0)) throw std::invalid_argument("Grid: half_length must be positive");
    wavenumbers_.resize(static_cast<std::size_t>(points_));
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < points_; ++i) {
      int j = (i < points_ / 2) ? i : i - points_;
      wavenumbers_[static_cast<std::size_t>(i)] = pi * static_cast<double>(j) / half_length_;
    }
    plan_ = std::make_shared<detail::TransformPlan>(dim_, points_);
  }

  int dim() const { return dim_; }
  int points_per_axis() const { return points_; }
  double half_length() const { return half_length_; }
  double spacing() const { return 2.0 * half_length_ / static_cast<double>(points_); }

  std::size_t size() const {
    std::size_t s = 1;
    for (int d = 0; d < dim_; ++d) s *= static_cast<std::size_t>(points_);
    return s;
  }

  /// Physical coordinate along one axis for grid index i: x_i = -L + i*h.
  double coordinate(int index) const {
    return -half_length_ + spacing() * static_cast<double>(index);
  }

  double wavenumber(int index) const { return wavenumbers_[static_cast<std::size_t>(index)]; }
  const std::vector<double>& wavenumbers() const { return wavenumbers_; }

  /// Cell volume h^N.
  double cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < dim_; ++d) v *= spacing();
    return v;
  }

  /// Box volume (2L)^N.
  double box_volume() const {
    double v = 1.0;
    for (int d = 0; d < dim_; ++d) v *= 2.0 * half_length_;
    return v;
  }

  const detail::TransformPlan& plan() const { return *plan_; }

  bool same_layout(const Grid& o) const {
    return dim_ == o.dim_ && points_ == o.points_ && half_length_ == o.half_length_;
  }

  /// Decompose a flat row-major index into per-axis indices.
  void unflatten(std::size_t flat, int idx[3]) const {
    idx[0] = idx[1] = idx[2] = 0;
    for (int d = dim_ - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(flat % static_cast<std::size_t>(points_));
      flat /= static_cast<std::size_t>(points_);
    }
  }

 private:
  int dim_;
  int points_;
  double half_length_;
  std::vector<double> wavenumbers_;
  std::shared_ptr<detail::TransformPlan> plan_;
};

/// Complex grid function in physical space.
struct Field {
  Grid grid;
  std::vector<Complex> values;
  double time = 0.0;

  explicit Field(const Grid& g, double t = 0.0)
      : grid(g), values(g.size(), Complex(0.0, 0.0)), time(t) {}
};

/// Complex grid function in Fourier space.  Coefficients c_k are plane-wave
/// amplitudes in box coordinates: f(x) = sum_k c_k e^{i k.x}.  Parseval reads
/// sum |f|^2 h^N = (2L)^N sum |c_k|^2.
struct SpectralField {
  Grid grid;
  std::vector<Complex> coefficients;
  double time = 0.0;

  explicit SpectralField(const Grid& g, double t = 0.0)
      : grid(g), coefficients(g.size(), Complex(0.0, 0.0)), time(t) {}
};

namespace detail {

// Sign (-1)^{i1+...+iN} aligning raw-FFT phases (array origin -L) with the
// box-centered plane-wave convention.
inline double corner_phase_sign(const Grid& g, std::size_t flat) {
  int idx[3];
  g.unflatten(flat, idx);
  int s = 0;
  for (int d = 0; d < g.dim(); ++d) s += idx[d];
  return (s & 1) ? -1.0 : 1.0;
}

}  // namespace detail

inline SpectralField forward_transform(const Field& f) {
  if (f.values.size() != f.grid.size())
    throw std::invalid_argument("forward_transform: value array size mismatch");
  SpectralField out(f.grid, f.time);
  f.grid.plan().forward(f.values.data(), out.coefficients.data());
  const double inv_m = 1.0 / static_cast<double>(f.grid.size());
  for (std::size_t i = 0; i < out.coefficients.size(); ++i)
    out.coefficients[i] *= inv_m * detail::corner_phase_sign(f.grid, i);
  return out;
}

inline Field inverse_transform(const SpectralField& F) {
  if (F.coefficients.size() != F.grid.size())
    throw std::invalid_argument("inverse_transform: coefficient array size mismatch");
  std::vector<Complex> tmp(F.coefficients.size());
  for (std::size_t i = 0; i < tmp.size(); ++i)
    tmp[i] = F.coefficients[i] * detail::corner_phase_sign(F.grid, i);
  Field out(F.grid, F.time);
  F.grid.plan().backward(tmp.data(), out.values.data());
  return out;
}

/// L^p norm (sum |f|^p h^N)^{1/p}; p = infinity gives the max modulus.
inline double norm_lp(const Field& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("norm_lp: p must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : f.values) {
      double a = std::abs(v);
      if (!std::isfinite(a)) throw std::runtime_error("norm_lp: non-finite field value");
      m = std::max(m, a);
    }
    return m;
  }
  double s = 0.0;
  for (const auto& v : f.values) {
    double a = std::abs(v);
    if (!std::isfinite(a)) throw std::runtime_error("norm_lp: non-finite field value");
    s += std::pow(a, p);
  }
  return std::pow(s * f.grid.cell_volume(), 1.0 / p);
}

/// sum_x |f|^{p} h^N without the outer root (the integral itself).
inline double lp_power_integral(const Field& f, double p) {
  double s = 0.0;
  if (p == 4.0) {
    for (const auto& v : f.values) {
      double a2 = std::norm(v);
      s += a2 * a2;
    }
  } else if (p == 2.0) {
    for (const auto& v : f.values) s += std::norm(v);
  } else {
    for (const auto& v : f.values) s += std::pow(std::abs(v), p);
  }
  return s * f.grid.cell_volume();
}

inline double mass(const Field& f) { return lp_power_integral(f, 2.0); }

/// ||grad f||_{L^2}^2 computed spectrally as (2L)^N sum |k|^2 |c_k|^2.
inline double gradient_norm_sq(const SpectralField& F) {
  const Grid& g = F.grid;
  double s = 0.0;
  int idx[3];
  for (std::size_t i = 0; i < F.coefficients.size(); ++i) {
    g.unflatten(i, idx);
    double k2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      double k = g.wavenumber(idx[d]);
      k2 += k * k;
    }
    s += k2 * std::norm(F.coefficients[i]);
  }
  return s * g.box_volume();
}

inline double gradient_norm_sq(const Field& f) { return gradient_norm_sq(forward_transform(f)); }

/// Mass fraction in the outer 5% shell of the box radius; the domain
/// truncation monitor.
inline double boundary_mass_fraction(const Field& f) {
  const Grid& g = f.grid;
  const double cut = 0.95 * g.half_length();
  double total = 0.0, shell = 0.0;
  int idx[3];
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    double a2 = std::norm(f.values[i]);
    total += a2;
    g.unflatten(i, idx);
    bool outer = false;
    for (int d = 0; d < g.dim(); ++d)
      if (std::abs(g.coordinate(idx[d])) >= cut) outer = true;
    if (outer) shell += a2;
  }
  return total > 0.0 ? shell / total : 0.0;
}

struct WeightedVariance {
  double value = 0.0;
  bool truncation_warning = false;  // boundary-shell mass >= 1e-8 of total
};

/// K(f) = sum |x|^2 |f|^2 h^N (virial variance).
inline WeightedVariance weighted_variance(const Field& f) {
  const Grid& g = f.grid;
  double s = 0.0;
  int idx[3];
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    g.unflatten(i, idx);
    double r2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      double x = g.coordinate(idx[d]);
      r2 += x * x;
    }
    s += r2 * std::norm(f.values[i]);
  }
  WeightedVariance out;
  out.value = s * g.cell_volume();
  out.truncation_warning = boundary_mass_fraction(f) >= 1e-8;
  return out;
}

/// Per-axis spectral derivative d f / d x_axis.
inline Field spectral_derivative(const SpectralField& F, int axis) {
  const Grid& g = F.grid;
  SpectralField D(g, F.time);
  int idx[3];
  for (std::size_t i = 0; i < F.coefficients.size(); ++i) {
    g.unflatten(i, idx);
    D.coefficients[i] = Complex(0.0, g.wavenumber(idx[axis])) * F.coefficients[i];
  }
  return inverse_transform(D);
}

/// V(f) = Im( sum (x . grad f) conj(f) h^N ), the virial momentum driver.
inline double v_functional(const Field& f) {
  const Grid& g = f.grid;
  SpectralField F = forward_transform(f);
  Complex acc(0.0, 0.0);
  int idx[3];
  for (int d = 0; d < g.dim(); ++d) {
    Field df = spectral_derivative(F, d);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      g.unflatten(i, idx);
      acc += g.coordinate(idx[d]) * df.values[i] * std::conj(f.values[i]);
    }
  }
  return acc.imag() * g.cell_volume();
}

/// H^1 norm squared: mass + ||grad||^2.
inline double h1_norm_sq(const Field& f) { return mass(f) + gradient_norm_sq(f); }

inline double h1_norm(const Field& f) { return std::sqrt(h1_norm_sq(f)); }

inline bool all_finite(const Field& f) {
  for (const auto& v : f.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

}  // namespace dnls
