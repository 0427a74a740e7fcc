// dnls: command-line driver for the damped-NLS spectral laboratory.
//
// Exit codes: 0 on pass, 1 on verdict failure, 2 on usage/config errors.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "dnls/experiments.hpp"
#include "dnls/inequalities.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(std::stod(item));
  return out;
}

// Two-or-more numeric columns, headered or not.
std::vector<std::vector<double>> read_columns(const std::string& path, std::size_t ncols) {
  std::ifstream in(path);
  if (!in) throw dnls::config_error("cannot open " + path);
  std::vector<std::vector<double>> cols(ncols);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.empty()) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw dnls::config_error(path + ": malformed row: " + line);
    }
    first = false;
    if (row.size() < ncols)
      throw dnls::config_error(path + ": expected " + std::to_string(ncols) + " columns");
    for (std::size_t c = 0; c < ncols; ++c) cols[c].push_back(row[c]);
  }
  if (cols[0].empty()) throw dnls::config_error(path + ": no data rows");
  return cols;
}

int cmd_run(const std::string& cfg_path, const std::string& output_dir) {
  auto parsed = dnls::parse_config(cfg_path);
  if (!std::holds_alternative<dnls::SimConfig>(parsed))
    throw dnls::config_error(cfg_path + ": expected a single-run config, got a suite");
  dnls::SimConfig cfg = std::get<dnls::SimConfig>(parsed);
  int n_samples = dnls::scattering_samples_of(dnls::ini::parse(cfg_path));

  dnls::RunResult result = dnls::run_simulation(cfg, n_samples);
  fs::path dir = fs::path(output_dir) / fs::path(cfg_path).stem();
  dnls::persist_run(dir, cfg_path, cfg, result);

  if (n_samples > 0 && result.samples.size() >= 4) {
    dnls::ScatteringReport rep =
        dnls::scattering_report(result.samples, result.records, cfg.damping);
    dnls::write_text_file(dir / "report.txt", rep.to_text());
    if (rep.u_plus) dnls::write_checkpoint((dir / "u_plus.dnls").string(), *rep.u_plus);
  }

  std::cout << "run complete: t = " << result.summary.final_time
            << ", steps = " << result.summary.steps
            << ", blowup = " << (result.summary.blowup ? "yes" : "no") << "\n"
            << "artifacts in " << dir.string() << "\n";
  return 0;
}

int cmd_sweep(const std::string& suite_path, const std::string& output_dir) {
  auto parsed = dnls::parse_config(suite_path);
  if (!std::holds_alternative<dnls::ExperimentSuite>(parsed))
    throw dnls::config_error(suite_path + ": expected a suite file");
  dnls::ExperimentSuite suite = std::get<dnls::ExperimentSuite>(parsed);
  fs::path base = output_dir.empty() ? fs::path(suite.output_dir) : fs::path(output_dir);
  auto summaries = dnls::run_sweep(suite, base / suite.name);
  for (std::size_t i = 0; i < summaries.size(); ++i)
    std::cout << suite.run_names[i] << ": t = " << summaries[i].final_time
              << ", blowup = " << (summaries[i].blowup ? "yes" : "no") << "\n";
  return 0;
}

int cmd_verify_identities(const std::string& csv_path, const std::string& damping_spec,
                          double tol_mass, double tol_hu, double tol_diff) {
  auto series = dnls::read_diagnostics_csv(csv_path);
  dnls::DampingProfile profile = dnls::parse_damping(damping_spec);
  dnls::IdentityReport rep = dnls::identity_report(series, profile);
  rep.tol_mass = tol_mass;
  rep.tol_hu = tol_hu;
  rep.tol_diff = tol_diff;
  auto line = [](const char* name, double residual, bool ok) {
    std::printf("%-16s residual = %.3e  [%s]\n", name, residual, ok ? "pass" : "FAIL");
  };
  line("mass", rep.mass_id, rep.mass_ok());
  line("energy", rep.energy_id, rep.energy_ok());
  line("virial_K", rep.k_id, rep.k_ok());
  line("virial_V", rep.v_id, rep.v_ok());
  line("hamiltonian", rep.hu_conservation, rep.hu_ok());
  return rep.all_ok() ? 0 : 1;
}

int cmd_scattering_report(const std::string& run_dir) {
  dnls::ScatteringReport rep = dnls::load_scattering_report(run_dir);
  std::cout << rep.to_text();
  dnls::write_text_file(fs::path(run_dir) / "report.txt", rep.to_text());
  {
    std::ofstream os(fs::path(run_dir) / "cauchy.csv");
    for (std::size_t i = 0; i < rep.cauchy.matrix.size(); ++i) {
      for (std::size_t j = 0; j < rep.cauchy.matrix[i].size(); ++j)
        os << (j ? "," : "") << rep.cauchy.matrix[i][j];
      os << "\n";
    }
  }
  if (rep.u_plus)
    dnls::write_checkpoint((fs::path(run_dir) / "u_plus.dnls").string(), *rep.u_plus);
  return rep.verdict ? 0 : 1;
}

int cmd_gn_constant(int dim, double p, int points, double half_length) {
  dnls::Grid grid(dim, points, half_length);
  dnls::GNEstimate est = dnls::gn_estimate(dim, p, grid);
  std::printf("K = %.10g  (sigma = %g, iterations = %d, converged = %s)\n", est.K,
              est.sigma, est.iterations, est.converged ? "yes" : "no");
  return est.converged ? 0 : 1;
}

int cmd_check_gronwall(const std::string& csv_path, double C, double beta) {
  auto cols = read_columns(csv_path, 4);  // t, f, g, h
  dnls::GronwallResult r = dnls::gronwall_verify(cols[0], cols[1], cols[2], cols[3], C, beta);
  std::printf("hypotheses_ok = %s\n", r.hypotheses_ok ? "true" : "false");
  std::printf("satisfied = %s\n", r.satisfied ? "true" : "false");
  if (!r.bound_curve.empty()) std::printf("final_bound = %.10g\n", r.bound_curve.back());
  return (r.hypotheses_ok && r.satisfied) ? 0 : 1;
}

int cmd_check_bootstrap(const std::string& csv_path, double a, double b, double theta) {
  auto cols = read_columns(csv_path, 2);  // t, X
  dnls::BootstrapResult r = dnls::bootstrap_verify(cols[1], a, b, theta);
  std::printf("hypothesis_ok = %s\n", r.hypothesis_ok ? "true" : "false");
  std::printf("smallness_ok = %s (threshold = %.10g)\n", r.smallness_ok ? "true" : "false",
              r.threshold);
  std::printf("conclusion_ok = %s (bound = %.10g)\n", r.conclusion_ok ? "true" : "false",
              r.bound);
  return (r.hypothesis_ok && r.smallness_ok && r.conclusion_ok) ? 0 : 1;
}

int cmd_convergence(const std::string& cfg_path, const std::string& dts_csv) {
  auto parsed = dnls::parse_config(cfg_path);
  if (!std::holds_alternative<dnls::SimConfig>(parsed))
    throw dnls::config_error(cfg_path + ": expected a single-run config");
  dnls::SimConfig cfg = std::get<dnls::SimConfig>(parsed);
  std::vector<double> dts = parse_double_list(dts_csv);
  if (dts.size() < 2) throw dnls::config_error("convergence: need at least 2 dt values");
  std::sort(dts.rbegin(), dts.rend());
  // snap each dt to an integer number of steps so every run ends exactly at t_end
  for (double& dt : dts) {
    double steps = std::max(1.0, std::round(cfg.t_end / dt));
    dt = cfg.t_end / steps;
  }

  // reference at dt_min / 4
  dnls::SimConfig ref_cfg = cfg;
  ref_cfg.dt = dts.back() / 4.0;
  ref_cfg.cadence = ref_cfg.t_end;
  dnls::RunResult ref = dnls::run_simulation(ref_cfg);
  if (!ref.final_field) throw std::runtime_error("convergence: reference run produced no field");

  std::vector<double> errs;
  for (double dt : dts) {
    dnls::SimConfig c = cfg;
    c.dt = dt;
    c.cadence = c.t_end;
    dnls::RunResult r = dnls::run_simulation(c);
    dnls::Field diff = *r.final_field;
    for (std::size_t i = 0; i < diff.values.size(); ++i)
      diff.values[i] -= ref.final_field->values[i];
    double e = dnls::norm_lp(diff, 2.0);
    errs.push_back(e);
    std::printf("dt = %-10g L2 error = %.6e\n", dt, e);
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    if (errs[i] <= 0.0) continue;
    double x = std::log(dts[i]), y = std::log(errs[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++m;
  }
  double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  std::printf("fitted order = %.4f\n", slope);
  return (slope > 1.7 && slope < 2.3) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral simulator and verification laboratory for the damped NLS equation"};
  app.require_subcommand(1);

  std::string output_dir = ".";
  app.add_option("--output-dir", output_dir, "Base directory for run artifacts");

  std::string cfg_path, suite_path, csv_path, run_dir, damping_spec, dts = "4e-3,2e-3,1e-3,5e-4";
  double C = 1.0, beta = 0.5, ba = 1.0, bb = 0.2, btheta = 2.0;
  double tol_mass = 1e-9, tol_hu = 1e-6, tol_diff = 1e-4;
  int dim = 1, points = 256;
  double p = 3.0, half_length = 20.0;

  auto* run = app.add_subcommand("run", "Simulate a config and write CSV/reports");
  run->add_option("config", cfg_path)->required();

  auto* sweep = app.add_subcommand("sweep", "Run every config of a suite in parallel");
  sweep->add_option("suite", suite_path)->required();

  auto* verify = app.add_subcommand("verify-identities", "Check the exact-law residuals of a diagnostics CSV");
  verify->add_option("csv", csv_path)->required();
  verify->add_option("--damping", damping_spec, "Damping profile spec")->required();
  verify->add_option("--tol-mass", tol_mass);
  verify->add_option("--tol-hu", tol_hu);
  verify->add_option("--tol-diff", tol_diff);

  auto* scat = app.add_subcommand("scattering-report", "Rebuild the scattering report of a run directory");
  scat->add_option("run_dir", run_dir)->required();

  auto* gn = app.add_subcommand("gn-constant", "Estimate the sharp Gagliardo-Nirenberg constant");
  gn->add_option("--dim", dim)->required();
  gn->add_option("--p", p)->required();
  gn->add_option("--points", points);
  gn->add_option("--half-length", half_length);

  auto* gron = app.add_subcommand("check-gronwall", "Verify the integral inequality on CSV columns t,f,g,h");
  gron->add_option("csv", csv_path)->required();
  gron->add_option("--C", C)->required();
  gron->add_option("--beta", beta)->required();

  auto* boot = app.add_subcommand("check-bootstrap", "Verify the continuity argument on CSV columns t,X");
  boot->add_option("csv", csv_path)->required();
  boot->add_option("--a", ba)->required();
  boot->add_option("--b", bb)->required();
  boot->add_option("--theta", btheta)->required();

  auto* conv = app.add_subcommand("convergence", "Fit the splitting order over a set of time steps");
  conv->add_option("config", cfg_path)->required();
  conv->add_option("--dts", dts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return (e.get_exit_code() == 0) ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(cfg_path, output_dir);
    if (sweep->parsed()) return cmd_sweep(suite_path, output_dir == "." ? "" : output_dir);
    if (verify->parsed())
      return cmd_verify_identities(csv_path, damping_spec, tol_mass, tol_hu, tol_diff);
    if (scat->parsed()) return cmd_scattering_report(run_dir);
    if (gn->parsed()) return cmd_gn_constant(dim, p, points, half_length);
    if (gron->parsed()) return cmd_check_gronwall(csv_path, C, beta);
    if (boot->parsed()) return cmd_check_bootstrap(csv_path, ba, bb, btheta);
    if (conv->parsed()) return cmd_convergence(cfg_path, dts);
  } catch (const dnls::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
