// Time-dependent damping profiles a(t), their antiderivative A(t), and the
// derived scalars (a_lower, divergence of the total dissipation).
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace dnls {

enum class DampingKind { kZero, kConstant, kPowerLaw, kOscillating, kTabulated };

class DampingProfile {
 public:
  static DampingProfile zero() { return DampingProfile(DampingKind::kZero, 0.0, 0.0); }

  static DampingProfile constant(double a) {
    require_nonnegative(a, "constant damping coefficient");
    return DampingProfile(DampingKind::kConstant, a, 0.0);
  }

  /// a / (1+t)^theta
  static DampingProfile power_law(double a, double theta) {
    require_nonnegative(a, "power_law damping coefficient");
    require_nonnegative(theta, "power_law exponent");
    return DampingProfile(DampingKind::kPowerLaw, a, theta);
  }

  /// a0 * (1 + sin t)
  static DampingProfile oscillating(double a0) {
    require_nonnegative(a0, "oscillating damping amplitude");
    return DampingProfile(DampingKind::kOscillating, a0, 0.0);
  }

  /// Linear interpolation through (t, a) samples; constant extension beyond
  /// the last sample.
  static DampingProfile tabulated(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size() || times.size() < 2)
      throw std::invalid_argument("tabulated damping: need >= 2 (t, a) samples");
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (i > 0 && !(times[i] > times[i - 1]))
        throw std::invalid_argument("tabulated damping: times must be strictly increasing");
      require_nonnegative(values[i], "tabulated damping sample");
    }
    if (times.front() > 0.0) {
      // extend flat to t = 0
      times.insert(times.begin(), 0.0);
      values.insert(values.begin(), values.front());
    }
    DampingProfile p(DampingKind::kTabulated, 0.0, 0.0);
    p.times_ = std::move(times);
    p.values_ = std::move(values);
    // prefix integrals of the piecewise-linear interpolant
    p.prefix_.resize(p.times_.size(), 0.0);
    for (std::size_t i = 1; i < p.times_.size(); ++i) {
      double dt = p.times_[i] - p.times_[i - 1];
      p.prefix_[i] = p.prefix_[i - 1] + 0.5 * (p.values_[i] + p.values_[i - 1]) * dt;
    }
    return p;
  }

  static DampingProfile tabulated_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("tabulated damping: cannot open " + path);
    std::vector<double> ts, as;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      double t, a;
      if (ls >> t >> a) {
        ts.push_back(t);
        as.push_back(a);
      }
    }
    return tabulated(std::move(ts), std::move(as));
  }

  DampingKind kind() const { return kind_; }
  double amplitude() const { return a_; }
  double exponent() const { return theta_; }

  /// a(t)
  double a_of_t(double t) const {
    if (t < 0.0) throw std::domain_error("damping: t must be nonnegative");
    switch (kind_) {
      case DampingKind::kZero:
        return 0.0;
      case DampingKind::kConstant:
        return a_;
      case DampingKind::kPowerLaw:
        return a_ / std::pow(1.0 + t, theta_);
      case DampingKind::kOscillating:
        return a_ * (1.0 + std::sin(t));
      case DampingKind::kTabulated: {
        if (t >= times_.back()) return values_.back();
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - times_.begin());
        double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
        return (1.0 - w) * values_[i - 1] + w * values_[i];
      }
    }
    return 0.0;
  }

  /// A(t) = int_0^t a(s) ds, closed form per kind.
  double A_of_t(double t) const {
    if (t < 0.0) throw std::domain_error("damping: t must be nonnegative");
    switch (kind_) {
      case DampingKind::kZero:
        return 0.0;
      case DampingKind::kConstant:
        return a_ * t;
      case DampingKind::kPowerLaw:
        if (theta_ == 1.0) return a_ * std::log1p(t);
        return a_ * (std::pow(1.0 + t, 1.0 - theta_) - 1.0) / (1.0 - theta_);
      case DampingKind::kOscillating:
        return a_ * (t + 1.0 - std::cos(t));
      case DampingKind::kTabulated: {
        if (t >= times_.back())
          return prefix_.back() + values_.back() * (t - times_.back());
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - times_.begin());
        double dt = t - times_[i - 1];
        double at = a_of_t(t);
        return prefix_[i - 1] + 0.5 * (values_[i - 1] + at) * dt;
      }
    }
    return 0.0;
  }

  /// Increment A(t2) - A(t1), used by the solver's damping factor.
  double A_increment(double t1, double t2) const { return A_of_t(t2) - A_of_t(t1); }

  std::string describe() const {
    std::ostringstream os;
    switch (kind_) {
      case DampingKind::kZero:
        os << "zero";
        break;
      case DampingKind::kConstant:
        os << "constant:a=" << a_;
        break;
      case DampingKind::kPowerLaw:
        os << "power_law:a=" << a_ << ",theta=" << theta_;
        break;
      case DampingKind::kOscillating:
        os << "oscillating:a0=" << a_;
        break;
      case DampingKind::kTabulated:
        os << "tabulated:<" << times_.size() << " samples>";
        break;
    }
    return os.str();
  }

 private:
  DampingProfile(DampingKind k, double a, double theta) : kind_(k), a_(a), theta_(theta) {}

  static void require_nonnegative(double v, const char* what) {
    if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + " must be nonnegative");
  }

  DampingKind kind_;
  double a_;
  double theta_;
  std::vector<double> times_, values_, prefix_;
};

struct DampingScalars {
  double a_lower = 0.0;    // inf_{t>0} A(t)/t
  bool divergent = false;  // int_0^inf a = infinity
  bool divergent_heuristic = false;  // true when decided from finite samples
  double horizon_used = 0.0;
};

/// a_lower over a log-spaced grid on (1e-6, horizon] combined with the
/// analytic t -> infinity limit of A(t)/t per kind; divergence decided
/// analytically where the kind admits it.
inline DampingScalars damping_scalars(const DampingProfile& p, double horizon = 1e4) {
  if (!(horizon > 0.0)) throw std::invalid_argument("damping_scalars: horizon must be positive");
  DampingScalars out;
  out.horizon_used = horizon;

  const int n = 10000;
  double lo = std::log(1e-6), hi = std::log(horizon);
  double inf_ratio = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    double t = std::exp(lo + (hi - lo) * static_cast<double>(i) / n);
    inf_ratio = std::min(inf_ratio, p.A_of_t(t) / t);
  }

  switch (p.kind()) {
    case DampingKind::kZero:
      out.a_lower = 0.0;
      out.divergent = false;
      return out;
    case DampingKind::kConstant:
      out.a_lower = p.amplitude();  // A(t)/t is identically a
      out.divergent = p.amplitude() > 0.0;
      return out;
    case DampingKind::kPowerLaw: {
      // A(t)/t -> 0 at infinity for theta > 0, -> a for theta = 0.
      double limit = (p.exponent() > 0.0) ? 0.0 : p.amplitude();
      out.a_lower = std::min(inf_ratio, limit);
      out.divergent = p.amplitude() > 0.0 && p.exponent() <= 1.0;
      return out;
    }
    case DampingKind::kOscillating:
      // A(t)/t = a0 (1 + (1 - cos t)/t) >= a0, infimum attained at infinity.
      out.a_lower = std::min(inf_ratio, p.amplitude());
      out.divergent = p.amplitude() > 0.0;
      return out;
    case DampingKind::kTabulated: {
      out.a_lower = inf_ratio;
      // Heuristic: extrapolate the trend of A over the last decade of the
      // horizon; undecidable from finite samples.
      double growth = p.A_increment(horizon / 10.0, horizon);
      out.divergent = growth > 1e-12 * (1.0 + p.A_of_t(horizon));
      out.divergent_heuristic = true;
      return out;
    }
  }
  return out;
}

/// Parses the profile grammar used by config files:
///   zero | constant:a=0.5 | power_law:a=1,theta=2 | oscillating:a0=0.3
///   | tabulated:path=<csv>
inline DampingProfile parse_damping(const std::string& spec) {
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon);
  std::string args = (colon == std::string::npos) ? "" : spec.substr(colon + 1);

  auto get = [&args, &spec](const std::string& key) -> std::string {
    std::istringstream as(args);
    std::string item;
    while (std::getline(as, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("damping spec: malformed parameter in '" + spec + "'");
      if (item.substr(0, eq) == key) return item.substr(eq + 1);
    }
    throw std::invalid_argument("damping spec: missing parameter '" + key + "' in '" + spec + "'");
  };
  auto getd = [&get](const std::string& key) { return std::stod(get(key)); };

  if (head == "zero") return DampingProfile::zero();
  if (head == "constant") return DampingProfile::constant(getd("a"));
  if (head == "power_law") return DampingProfile::power_law(getd("a"), getd("theta"));
  if (head == "oscillating") return DampingProfile::oscillating(getd("a0"));
  if (head == "tabulated") return DampingProfile::tabulated_from_csv(get("path"));
  throw std::invalid_argument("damping spec: unknown kind '" + head + "'");
}

}  // namespace dnls
