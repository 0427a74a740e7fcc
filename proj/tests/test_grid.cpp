#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dnls/grid.hpp"
#include "oracles.hpp"

using dnls::Complex;
using dnls::Field;
using dnls::Grid;

namespace {

Field random_field(const Grid& g) {
  Field f(g);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : f.values) v = Complex(dist(oracles::rng()), dist(oracles::rng()));
  return f;
}

Field sech_field(const Grid& g, double amp = std::sqrt(2.0)) {
  Field f(g);
  for (int i = 0; i < g.points_per_axis(); ++i)
    f.values[static_cast<std::size_t>(i)] = amp / std::cosh(g.coordinate(i));
  return f;
}

}  // namespace

TEST_CASE("grid construction validates its invariants", "[grid]") {
  CHECK_THROWS_AS(Grid(0, 64, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid(4, 64, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid(1, 12, 10.0), std::invalid_argument);   // below minimum
  CHECK_THROWS_AS(Grid(1, 100, 10.0), std::invalid_argument);  // not a power of two
  CHECK_THROWS_AS(Grid(1, 64, -1.0), std::invalid_argument);

  Grid g(2, 32, 5.0);
  CHECK(g.size() == 32u * 32u);
  CHECK(g.spacing() == Catch::Approx(10.0 / 32.0));
  // odd symmetry of wavenumbers up to the Nyquist mode
  for (int i = 1; i < 16; ++i)
    CHECK(g.wavenumber(i) == Catch::Approx(-g.wavenumber(32 - i)));
  CHECK(g.wavenumber(0) == 0.0);
}

TEST_CASE("transform of zero is zero", "[grid]") {
  Grid g(1, 64, 10.0);
  Field f(g);
  auto F = dnls::forward_transform(f);
  for (const auto& c : F.coefficients) CHECK(std::abs(c) == 0.0);
}

TEST_CASE("pure box mode transforms to a single coefficient", "[grid]") {
  Grid g(1, 64, 10.0);
  const double k1 = g.wavenumber(3);
  Field f(g);
  for (int i = 0; i < 64; ++i)
    f.values[static_cast<std::size_t>(i)] = std::polar(0.7, k1 * g.coordinate(i));
  auto F = dnls::forward_transform(f);
  for (int i = 0; i < 64; ++i) {
    double mag = std::abs(F.coefficients[static_cast<std::size_t>(i)]);
    if (i == 3)
      CHECK(mag == Catch::Approx(0.7).epsilon(1e-12));
    else
      CHECK(mag < 1e-12);
  }
  // coefficient phase matches the plane-wave amplitude convention
  CHECK(F.coefficients[3].real() == Catch::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("round trip is the identity to 1e-12", "[grid]") {
  for (int dim : {1, 2}) {
    Grid g(dim, 32, 7.0);
    Field f = random_field(g);
    Field back = dnls::inverse_transform(dnls::forward_transform(f));
    double max_err = 0.0, max_abs = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      max_err = std::max(max_err, std::abs(back.values[i] - f.values[i]));
      max_abs = std::max(max_abs, std::abs(f.values[i]));
    }
    CHECK(max_err < 1e-12 * max_abs);
  }
}

TEST_CASE("Parseval holds for random fields", "[grid]") {
  Grid g(2, 32, 4.0);
  Field f = random_field(g);
  double phys = 0.0;
  for (const auto& v : f.values) phys += std::norm(v);
  phys *= g.cell_volume();
  auto F = dnls::forward_transform(f);
  double spec = 0.0;
  for (const auto& c : F.coefficients) spec += std::norm(c);
  spec *= g.box_volume();
  CHECK(std::abs(phys - spec) < 1e-10 * phys);
}

TEST_CASE("Lp norms: constants, sech and scaling", "[grid]") {
  Grid g(1, 512, 20.0);

  SECTION("constant field") {
    Field f(g);
    for (auto& v : f.values) v = 1.0;
    CHECK(dnls::norm_lp(f, 2.0) == Catch::Approx(std::sqrt(2.0 * 20.0)).epsilon(1e-12));
  }

  SECTION("sqrt(2) sech: L2 and L4 against the quadrature oracle") {
    Field f = sech_field(g);
    // oracle: int 2 sech^2 = 4 (antiderivative 2 tanh)
    double l2_sq = oracles::integrate([](double x) { return 2.0 / std::pow(std::cosh(x), 2); },
                                      -20.0, 20.0);
    CHECK(l2_sq == Catch::Approx(4.0).margin(1e-9));
    CHECK(dnls::norm_lp(f, 2.0) == Catch::Approx(2.0).margin(1e-8));
    // oracle: int 4 sech^4 = 16/3
    double l4_pow = oracles::integrate([](double x) { return 4.0 / std::pow(std::cosh(x), 4); },
                                       -20.0, 20.0);
    CHECK(l4_pow == Catch::Approx(16.0 / 3.0).margin(1e-9));
    CHECK(dnls::norm_lp(f, 4.0) == Catch::Approx(std::pow(16.0 / 3.0, 0.25)).margin(1e-8));
  }

  SECTION("p = infinity gives the max modulus") {
    Field f = sech_field(g);
    CHECK(dnls::norm_lp(f, std::numeric_limits<double>::infinity()) ==
          Catch::Approx(std::sqrt(2.0)).margin(1e-12));
  }

  SECTION("homogeneity under scaling") {
    Field f = random_field(g);
    Field f3 = f;
    for (auto& v : f3.values) v *= -2.5;
    for (double p : {1.0, 2.0, 3.5}) {
      double a = dnls::norm_lp(f3, p);
      double b = 2.5 * dnls::norm_lp(f, p);
      CHECK(std::abs(a - b) < 1e-12 * b);
    }
  }

  SECTION("p < 1 is rejected") {
    Field f = sech_field(g);
    CHECK_THROWS_AS(dnls::norm_lp(f, 0.5), std::invalid_argument);
  }
}

TEST_CASE("gradient norm: constants, single modes, sech", "[grid]") {
  Grid g(1, 512, 20.0);

  SECTION("constant field has zero gradient") {
    Field f(g);
    for (auto& v : f.values) v = Complex(3.0, -1.0);
    CHECK(dnls::gradient_norm_sq(f) < 1e-12);
  }

  SECTION("single mode") {
    const double k1 = g.wavenumber(5);
    Field f(g);
    for (int i = 0; i < 512; ++i)
      f.values[static_cast<std::size_t>(i)] = std::polar(0.4, k1 * g.coordinate(i));
    double expected = k1 * k1 * 2.0 * 20.0 * 0.16;
    CHECK(dnls::gradient_norm_sq(f) == Catch::Approx(expected).epsilon(1e-10));
  }

  SECTION("sqrt(2) sech against the quadrature oracle") {
    Field f = sech_field(g);
    // oracle: int 2 sech^2 tanh^2 = 4/3
    double expected = oracles::integrate(
        [](double x) {
          double s = 1.0 / std::cosh(x), t = std::tanh(x);
          return 2.0 * s * s * t * t;
        },
        -20.0, 20.0);
    CHECK(expected == Catch::Approx(4.0 / 3.0).margin(1e-9));
    CHECK(dnls::gradient_norm_sq(f) == Catch::Approx(4.0 / 3.0).margin(1e-6));
  }
}

TEST_CASE("weighted variance", "[grid]") {
  Grid g(1, 512, 20.0);

  SECTION("zero field") {
    Field f(g);
    CHECK(dnls::weighted_variance(f).value == 0.0);
  }

  SECTION("centered Gaussian matches the moment oracle") {
    Field f(g);
    for (int i = 0; i < 512; ++i) {
      double x = g.coordinate(i);
      f.values[static_cast<std::size_t>(i)] = std::exp(-0.5 * x * x);
    }
    double expected =
        oracles::integrate([](double x) { return x * x * std::exp(-x * x); }, -20.0, 20.0);
    CHECK(expected == Catch::Approx(std::sqrt(M_PI) / 2.0).margin(1e-10));
    auto wv = dnls::weighted_variance(f);
    CHECK(wv.value == Catch::Approx(expected).margin(1e-10));
    CHECK_FALSE(wv.truncation_warning);
  }

  SECTION("translation adds x0^2 times the mass for symmetric profiles") {
    auto gaussian_at = [&](double x0) {
      Field f(g);
      for (int i = 0; i < 512; ++i) {
        double x = g.coordinate(i);
        f.values[static_cast<std::size_t>(i)] = std::exp(-0.5 * (x - x0) * (x - x0));
      }
      return f;
    };
    Field f0 = gaussian_at(0.0), f3 = gaussian_at(3.0);
    double expected = dnls::weighted_variance(f0).value + 9.0 * dnls::mass(f0);
    CHECK(dnls::weighted_variance(f3).value == Catch::Approx(expected).margin(1e-9));
  }

  SECTION("wide profile trips the truncation warning") {
    Field f(g);
    for (auto& v : f.values) v = 1.0;
    CHECK(dnls::weighted_variance(f).truncation_warning);
  }
}

TEST_CASE("v functional", "[grid]") {
  Grid g(1, 512, 20.0);

  SECTION("zero and real fields give zero") {
    Field z(g);
    CHECK(dnls::v_functional(z) == 0.0);
    Field f(g);
    for (int i = 0; i < 512; ++i) {
      double x = g.coordinate(i);
      f.values[static_cast<std::size_t>(i)] = std::exp(-0.5 * x * x);
    }
    CHECK(std::abs(dnls::v_functional(f)) < 1e-12);
  }

  SECTION("modulated Gaussian is zero by symmetry, nonzero after free flow") {
    const double kappa = g.wavenumber(8);
    Field f(g);
    for (int i = 0; i < 512; ++i) {
      double x = g.coordinate(i);
      f.values[static_cast<std::size_t>(i)] = std::exp(-0.5 * x * x) * std::polar(1.0, kappa * x);
    }
    CHECK(std::abs(dnls::v_functional(f)) < 1e-10);

    // after free evolution the envelope spreads; compare against a quadrature
    // oracle on the closed-form Gaussian (kappa = 0 case, boosted analytically)
    const double t = 0.25;
    Field evolved(g);
    for (int i = 0; i < 512; ++i) {
      double x = g.coordinate(i);
      evolved.values[static_cast<std::size_t>(i)] = oracles::free_gaussian_1d(t, x);
    }
    // V = Im int x u' conj(u); with u = (1+2it)^{-1/2} e^{-x^2/(2(1+2it))},
    // u'/u = -x/(1+2it) so the integrand is |u|^2 x^2 Im(-1/(1+2it)).
    double expected = oracles::integrate(
        [t](double x) {
          std::complex<double> u = oracles::free_gaussian_1d(t, x);
          double im = (2.0 * t) / (1.0 + 4.0 * t * t);
          return std::norm(u) * x * x * im;
        },
        -20.0, 20.0);
    CHECK(std::abs(expected) > 1e-3);
    CHECK(dnls::v_functional(evolved) == Catch::Approx(expected).margin(1e-9));
  }
}
