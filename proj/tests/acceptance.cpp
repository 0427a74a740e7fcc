// End-to-end acceptance suite: one pass/fail line per criterion, nonzero exit
// if any fails.  Tolerances are pinned in the checks below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "dnls/experiments.hpp"
#include "dnls/inequalities.hpp"
#include "dnls/scattering.hpp"

using dnls::DiagnosticsRecord;
using dnls::Field;
using dnls::Grid;
using dnls::SimConfig;

namespace {

int g_failures = 0;

void report(const char* name, bool ok, double seconds, const std::string& detail) {
  std::printf("%-34s %s  (%6.1f s)  %s\n", name, ok ? "PASS" : "FAIL", seconds,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

double rel_l2(const Field& a, const Field& b) {
  Field d = a;
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
  return dnls::norm_lp(d, 2.0) / dnls::norm_lp(a, 2.0);
}

SimConfig dissipation_config() {  // shared by criteria 1-3 and 10
  SimConfig cfg;
  cfg.dim = 1;
  cfg.p = 3.0;
  cfg.mu = -1;
  cfg.points = 512;
  cfg.half_length = 20.0;
  cfg.damping = dnls::DampingProfile::constant(0.3);
  cfg.t_end = 10.0;
  cfg.dt = 1e-3;
  cfg.cadence = 1e-2;
  cfg.initial_data.kind = dnls::InitialDataSpec::Kind::kGaussian;
  cfg.initial_data.amplitude = 1.0;
  cfg.initial_data.width = 1.0;
  return cfg;
}

SimConfig decay_config() {  // shared by criteria 7 and 10
  SimConfig cfg;
  cfg.dim = 1;
  cfg.p = 3.0;
  cfg.mu = -1;
  cfg.points = 512;
  cfg.half_length = 30.0;
  cfg.damping = dnls::DampingProfile::constant(0.5);
  cfg.t_end = 20.0;
  cfg.dt = 1e-3;
  cfg.cadence = 0.05;
  cfg.initial_data.kind = dnls::InitialDataSpec::Kind::kGaussian;
  cfg.initial_data.amplitude = 0.7;
  cfg.initial_data.width = 1.5;
  return cfg;
}

Field evolve_plain(const SimConfig& cfg) {
  Field f = dnls::build_initial_data(cfg);
  std::size_t n = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  for (std::size_t i = 0; i < n; ++i)
    f = dnls::step_strang(f, static_cast<double>(i) * cfg.dt, cfg.dt, cfg);
  return f;
}

}  // namespace

int main() {
  // ---- criteria 1-3: one dissipative run plus a halved rerun ---------------
  SimConfig base = dissipation_config();
  std::vector<DiagnosticsRecord> series, series_half;
  {
    Timer tm;
    series = dnls::run_simulation(base).records;
    auto rep = dnls::identity_report(series, base.damping);
    report("1 mass dissipation law", rep.mass_id < 1e-9, tm.elapsed(),
           fmt("max residual = %.2e (< 1e-9)", rep.mass_id));

    Timer tm2;
    SimConfig half = base;
    half.dt /= 2.0;
    half.cadence /= 2.0;
    series_half = dnls::run_simulation(half).records;
    auto rep_half = dnls::identity_report(series_half, base.damping);

    bool ok2 = rep.hu_conservation < 1e-6 &&
               rep_half.hu_conservation * 3.0 <= rep.hu_conservation;
    report("2 conserved Hamiltonian", ok2, tm2.elapsed(),
           fmt("drift = %.2e (< 1e-6), halved-dt drift = %.2e (>= 3x down)",
               rep.hu_conservation, rep_half.hu_conservation));

    // x-weighted identities need a wide box so dispersive radiation does not
    // wrap around the periodic boundary within the sampled window
    Timer tm3;
    SimConfig virial = base;
    virial.points = 1024;
    virial.half_length = 40.0;
    virial.t_end = 2.0;
    virial.initial_data.amplitude = 0.8;
    virial.initial_data.width = 1.2;
    auto vrep = dnls::identity_report(dnls::run_simulation(virial).records, virial.damping);
    SimConfig virial_half = virial;
    virial_half.dt /= 2.0;
    virial_half.cadence /= 2.0;
    auto vrep_half =
        dnls::identity_report(dnls::run_simulation(virial_half).records, virial.damping);
    bool ok3 = vrep.energy_id < 1e-4 && vrep.k_id < 1e-4 && vrep.v_id < 1e-4 &&
               vrep_half.energy_id * 3.0 <= vrep.energy_id &&
               vrep_half.k_id * 3.0 <= vrep.k_id && vrep_half.v_id * 3.0 <= vrep.v_id;
    report("3 differential identities", ok3, tm3.elapsed(),
           fmt("residuals E/K/V = %.1e / %.1e / %.1e (< 1e-4, >= 3x down)",
               vrep.energy_id, vrep.k_id, vrep.v_id));
  }

  // ---- criterion 4: soliton oracle and Strang order ------------------------
  {
    Timer tm;
    SimConfig cfg;
    cfg.dim = 1;
    cfg.p = 3.0;
    cfg.mu = -1;
    cfg.points = 512;
    cfg.half_length = 20.0;
    cfg.t_end = 1.0;
    cfg.initial_data.kind = dnls::InitialDataSpec::Kind::kSoliton;
    cfg.initial_data.eta = 1.0;

    Grid g = cfg.make_grid();
    Field exact(g, 1.0);
    for (int i = 0; i < g.points_per_axis(); ++i) {
      double x = g.coordinate(i);
      exact.values[static_cast<std::size_t>(i)] =
          std::sqrt(2.0) / std::cosh(x) * std::polar(1.0, 1.0);
    }
    auto l2_err = [&](double dt) {
      SimConfig c = cfg;
      c.dt = dt;
      Field f = evolve_plain(c);
      Field d = f;
      for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= exact.values[i];
      return dnls::norm_lp(d, 2.0);
    };
    double err = l2_err(1e-3);
    std::vector<double> log_dt, log_err;
    for (double dt : {4e-3, 2e-3, 1e-3, 5e-4}) {
      log_dt.push_back(std::log(dt));
      log_err.push_back(std::log(l2_err(dt)));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < log_dt.size(); ++i) {
      sx += log_dt[i];
      sy += log_err[i];
      sxx += log_dt[i] * log_dt[i];
      sxy += log_dt[i] * log_err[i];
    }
    double m = static_cast<double>(log_dt.size());
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    report("4 soliton oracle + Strang order", err < 1e-5 && slope > 1.9 && slope < 2.1,
           tm.elapsed(), fmt("L2 error = %.2e (< 1e-5), order = %.3f", err, slope));
  }

  // ---- criterion 5: direct vs gauged equivalence ---------------------------
  {
    Timer tm;
    auto equivalence = [](SimConfig cfg) {
      cfg.formulation = dnls::Formulation::kDirect;
      Field u_direct = evolve_plain(cfg);
      cfg.formulation = dnls::Formulation::kGauged;
      Field v = evolve_plain(cfg);
      Field u_gauged =
          dnls::gauge_transfer(v, cfg.t_end, cfg.damping, dnls::GaugeDirection::kVToU);
      return rel_l2(u_direct, u_gauged);
    };
    SimConfig c1;
    c1.dim = 1;
    c1.p = 3.0;
    c1.mu = -1;
    c1.points = 512;
    c1.half_length = 20.0;
    c1.damping = dnls::DampingProfile::constant(0.3);
    c1.t_end = 1.0;
    c1.dt = 2e-4;
    c1.initial_data.kind = dnls::InitialDataSpec::Kind::kGaussian;
    c1.initial_data.amplitude = 1.0;
    c1.initial_data.width = 1.0;
    double e1 = equivalence(c1);

    SimConfig c3 = c1;
    c3.dim = 3;
    c3.points = 32;
    c3.half_length = 10.0;
    c3.t_end = 0.5;
    c3.initial_data.amplitude = 0.5;
    double e3 = equivalence(c3);
    report("5 formulation equivalence", e1 < 1e-8 && e3 < 1e-8, tm.elapsed(),
           fmt("relative L2 gap 1D = %.2e, 3D = %.2e (< 1e-8)", e1, e3));
  }

  // ---- criterion 6: sharp constant ----------------------------------------
  double K_est = 0.0;
  {
    Timer tm;
    Grid g(1, 256, 15.0);
    auto est = dnls::gn_estimate(1, 3.0, g);
    K_est = est.K;
    double target = 1.0 / std::sqrt(3.0);
    bool ok = est.converged && std::abs(est.K - target) < 0.01 * target;
    report("6 sharp interpolation constant", ok, tm.elapsed(),
           fmt("K = %.6f vs 1/sqrt(3) = %.6f (within 1%%)", est.K, target));
  }

  // ---- criterion 7: global decay + Cauchy + integral-inequality replay ----
  std::vector<DiagnosticsRecord> decay_series;
  {
    Timer tm;
    SimConfig cfg = decay_config();
    auto run = dnls::run_simulation(cfg, 8);
    decay_series = run.records;
    auto rep = dnls::scattering_report(run.samples, run.records, cfg.damping);
    bool scatter_ok = rep.decay.tail_variation < 0.05 && rep.cauchy.pass;

    // replay of the a-priori gradient bound: f = e^{2A} ||grad u||^2 obeys
    // f <= E(u0) + g f^{1/2} + int h f^{1/2} with the interpolation constant
    const double p = cfg.p, sigma = 1.0;
    const double K_use = K_est * 1.02;  // any upper bound of the sharp constant
    double m0 = decay_series.front().mass;
    double mass_pow = std::pow(std::sqrt(m0), p + 1.0 - sigma);
    std::vector<double> t, f, gcoef, h;
    for (const auto& r : decay_series) {
      t.push_back(r.t);
      f.push_back(std::exp(2.0 * r.A_t) * r.grad_norm * r.grad_norm);
      double gv = 2.0 * K_use / (p + 1.0) * mass_pow * std::exp((1.0 - p) * r.A_t);
      gcoef.push_back(gv);
      h.push_back((p - 1.0) * cfg.damping.a_of_t(r.t) * gv);
    }
    double C = decay_series.front().energy;
    auto gr = dnls::gronwall_verify(t, f, gcoef, h, C, sigma / 2.0);
    bool ok = scatter_ok && gr.hypotheses_ok && gr.satisfied;
    report("7 decay + Cauchy + bound replay", ok, tm.elapsed(),
           fmt("tail var = %.3f, last Cauchy gap = %.2e, bound ok = %.0f",
               rep.decay.tail_variation, rep.cauchy.last_difference,
               (gr.hypotheses_ok && gr.satisfied) ? 1.0 : 0.0));
  }

  // ---- criterion 8: small-data gradient envelope in 3D --------------------
  {
    Timer tm;
    SimConfig cfg;
    cfg.dim = 3;
    cfg.p = 3.0;
    cfg.mu = -1;
    cfg.points = 64;
    cfg.half_length = 10.0;
    cfg.damping = dnls::DampingProfile::constant(0.4);
    cfg.t_end = 5.0;
    cfg.dt = 5e-3;
    cfg.cadence = 0.1;
    cfg.initial_data.kind = dnls::InitialDataSpec::Kind::kGaussian;
    cfg.initial_data.amplitude = 1.0;
    cfg.initial_data.width = 2.0;
    // rescale the amplitude so that ||grad u0|| = 0.05
    {
      Field probe = dnls::build_initial_data(cfg);
      double g0 = std::sqrt(dnls::gradient_norm_sq(probe));
      cfg.initial_data.amplitude = 0.05 / g0;
    }
    auto run = dnls::run_simulation(cfg);
    double grad0 = run.records.front().grad_norm;
    double worst = 0.0;
    for (const auto& r : run.records)
      worst = std::max(worst, std::exp(r.A_t) * r.grad_norm);
    bool ok = std::abs(grad0 - 0.05) < 1e-12 && worst <= 2.0 * grad0;
    report("8 small-data gradient envelope 3D", ok, tm.elapsed(),
           fmt("sup e^A ||grad u|| = %.4f vs 2 ||grad u0|| = %.4f", worst, 2.0 * grad0));
  }

  // ---- criterion 9: exponential smallness with moderate 3D data -----------
  {
    Timer tm;
    SimConfig cfg;
    cfg.dim = 3;
    cfg.p = 3.0;
    cfg.mu = -1;
    cfg.points = 32;
    cfg.half_length = 10.0;
    cfg.damping = dnls::DampingProfile::constant(0.4);
    cfg.t_end = 6.5;
    cfg.dt = 5e-3;
    cfg.cadence = 0.05;
    cfg.initial_data.kind = dnls::InitialDataSpec::Kind::kGaussian;
    cfg.initial_data.amplitude = 0.5;
    cfg.initial_data.width = 2.0;
    auto run = dnls::run_simulation(cfg);
    // monitored hypothesis: the L^{p+1} norm stays uniformly bounded
    double lp1_0 = run.records.front().lp1_norm, lp1_sup = 0.0;
    for (const auto& r : run.records) lp1_sup = std::max(lp1_sup, r.lp1_norm);
    auto decay = dnls::decay_report(run.records, cfg.damping);
    bool ok = lp1_sup <= 2.0 * lp1_0 && decay.exp_scat_ok;
    report("9 exponential smallness 3D", ok, tm.elapsed(),
           fmt("tail min e^{-at}||u||_H1 = %.2e vs eps = %.2e, sup Lp1 / Lp1(0) = %.2f",
               decay.min_exp_scat, decay.epsilon, lp1_sup / lp1_0));
  }

  // ---- criterion 10: the liminf dip test ----------------------------------
  {
    Timer tm;
    bool ok = true;
    std::string detail;
    try {
      auto v1 = dnls::liminf_check(series);       // constant a = 0.3 run
      auto v2 = dnls::liminf_check(decay_series); // constant a = 0.5 run
      ok = v1.pass && v2.pass;
      detail = fmt("tail min I = %.2e and %.2e (<= tol)", v1.min_I_over_tail,
                   v2.min_I_over_tail);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    // the synthetic always-positive series must fail
    std::vector<DiagnosticsRecord> synthetic(100);
    for (int i = 0; i < 100; ++i) {
      synthetic[static_cast<std::size_t>(i)].t = 0.1 * i;
      synthetic[static_cast<std::size_t>(i)].A_t = 0.4 * i;
      synthetic[static_cast<std::size_t>(i)].I = 1.0;
      synthetic[static_cast<std::size_t>(i)].h1_norm = 1.0;
    }
    if (dnls::liminf_check(synthetic).pass) {
      ok = false;
      detail += " [synthetic counterexample not rejected]";
    }
    report("10 liminf dip test", ok, tm.elapsed(), detail);
  }

  // ---- criterion 11: verifier suites and the CLI exit-code contract -------
  {
    Timer tm;
    bool ok = true;
    std::string detail = "in-process branches ok";

    // beta < 1 arithmetic case: g = h = 0 gives the bound 2C
    {
      std::vector<double> t{0, 1, 2}, f{1, 1, 1}, z{0, 0, 0};
      auto r = dnls::gronwall_verify(t, f, z, z, 1.0, 0.5);
      if (!(r.hypotheses_ok && r.satisfied && std::abs(r.bound_curve.back() - 2.0) < 1e-12))
        ok = false;
    }
    // beta = 1 branch requires g to drop below 1/2
    {
      std::vector<double> t{0, 1, 2}, f{1, 1, 1}, g{0.9, 0.4, 0.1}, z{0, 0, 0};
      auto r = dnls::gronwall_verify(t, f, g, z, 1.0, 1.0);
      if (!(r.hypotheses_ok && r.satisfied && r.t0 == 1.0)) ok = false;
      std::vector<double> gbad{0.9, 0.9, 0.9};
      if (dnls::gronwall_verify(t, f, gbad, z, 1.0, 1.0).hypotheses_ok) ok = false;
    }
    // constructed hypothesis violation
    {
      std::vector<double> t{0, 1, 2}, f{1, 50, 1}, z{0, 0, 0};
      if (dnls::gronwall_verify(t, f, z, z, 1.0, 0.5).hypotheses_ok) ok = false;
    }
    // bootstrap threshold boundary at theta = 2: a b < 1/4 strictly
    {
      std::vector<double> X{1.0, 1.0};
      if (!dnls::bootstrap_verify(X, 1.0, 0.2499, 2.0).smallness_ok) ok = false;
      if (dnls::bootstrap_verify(X, 1.0, 0.25, 2.0).smallness_ok) ok = false;
      if (dnls::bootstrap_verify(X, 1.0, 0.26, 2.0).smallness_ok) ok = false;
      auto r = dnls::bootstrap_verify(X, 1.0, 0.2, 2.0);
      if (!(r.hypothesis_ok && r.conclusion_ok && std::abs(r.bound - 2.0) < 1e-12))
        ok = false;
    }
    // exit-code contract of the installed binary
    if (const char* bin = std::getenv("DNLS_BIN")) {
      auto code = [&](const std::string& args) {
        std::string cmd = std::string(bin) + " " + args + " > /dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
      };
      std::string dir = "acceptance_cli_tmp";
      std::filesystem::create_directories(dir);
      {
        std::ofstream os(dir + "/x.csv");
        os << "t,X\n0,1.0\n1,0.9\n2,1.05\n";
      }
      int pass_code = code("check-bootstrap " + dir + "/x.csv --a 1 --b 0.2 --theta 2");
      int fail_code = code("check-bootstrap " + dir + "/x.csv --a 1 --b 0.3 --theta 2");
      int usage_code = code("check-bootstrap missing.csv --a 1 --b 0.2 --theta 2");
      std::filesystem::remove_all(dir);
      if (pass_code != 0 || fail_code != 1 || usage_code != 2) {
        ok = false;
        detail = fmt("exit codes = %g/%g/%g (want 0/1/2)", pass_code, fail_code, usage_code);
      }
    } else {
      ok = false;
      detail = "DNLS_BIN not set";
    }
    report("11 verifier suites + exit codes", ok, tm.elapsed(), detail);
  }

  // ---- criterion 12: linear-regime exactness ------------------------------
  {
    Timer tm;
    SimConfig cfg;
    cfg.dim = 1;
    cfg.p = 3.0;
    cfg.mu = -1;
    cfg.points = 256;
    cfg.half_length = 20.0;
    cfg.nonlinearity = false;
    cfg.damping = dnls::DampingProfile::constant(0.5);
    cfg.t_end = 100.0;  // A(t_end) = 50
    cfg.dt = 1e-2;
    cfg.initial_data.kind = dnls::InitialDataSpec::Kind::kGaussian;
    cfg.initial_data.amplitude = 1.0;
    cfg.initial_data.width = 1.0;

    Field u0 = dnls::build_initial_data(cfg);
    double h1_0 = dnls::h1_norm(u0);
    Field f = u0;
    std::size_t n = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double tnow = static_cast<double>(i) * cfg.dt;
      f = dnls::step_strang(f, tnow, cfg.dt, cfg);
      if ((i + 1) % 2000 == 0) {
        Field w = dnls::back_propagate(f, tnow + cfg.dt, cfg.damping);
        worst = std::max(worst, dnls::h1_difference(w, u0) / h1_0);
      }
    }
    report("12 linear-regime exactness", worst < 1e-10, tm.elapsed(),
           fmt("worst relative H1 recovery error = %.2e (< 1e-10)", worst));
  }

  std::printf("%d of 12 criteria passed\n", 12 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
