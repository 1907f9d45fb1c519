// mbe3: experiment driver for the BDF3/EP3 thin-film solver.

#include "mbe/checkpoint.hpp"
#include "mbe/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace {

using mbe::RunConfig;

struct Overrides {
  std::optional<std::string> config;
  std::map<std::string, std::string> values;
  bool dealias = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key = value config file (a run manifest works)");
  auto opt = [&](const char* flag, const char* key, const char* help) {
    cmd->add_option_function<std::string>(flag, [&o, key](const std::string& v) { o.values[key] = v; }, help);
  };
  opt("--out", "out", "output directory");
  opt("--seed", "seed", "seed for random initial data");
  opt("--nx", "nx", "modes in x");
  opt("--ny", "ny", "modes in y");
  opt("--tau", "tau", "time step");
  opt("--eta", "eta", "diffusion parameter");
  opt("--A", "A", "stabilization parameter");
  opt("--tfinal", "tfinal", "final time");
  opt("--stride", "stride", "record every k-th step");
  opt("--scheme", "scheme", "bdf1ep1 | bdf2ep2 | bdf3ep3 | bdf3ep3-stabilized");
  opt("--init", "init", "random | sine | file");
  opt("--init-path", "init_path", "snapshot or checkpoint for --init file");
  opt("--startup", "startup", "chain | exact");
  opt("--taus", "taus", "comma-separated time steps, e.g. 1/20,1/40");
  opt("--As", "A_list", "comma-separated stabilization values");
  cmd->add_option_function<std::vector<std::string>>(
      "--set",
      [&o](const std::vector<std::string>& kvs) {
        for (const auto& kv : kvs) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got " + kv);
          o.values[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
      },
      "extra key=value overrides");
  cmd->add_flag("--dealias", o.dealias, "2/3-rule truncation of the nonlinear term");
}

RunConfig resolve(RunConfig defaults, const Overrides& o) {
  if (o.config) mbe::apply_config_file(defaults, *o.config);
  for (const auto& [k, v] : o.values) mbe::apply_setting(defaults, k, v);
  if (o.dealias) defaults.dealias = true;
  defaults.validate();
  return defaults;
}

RunConfig converge_defaults() {
  RunConfig c;
  c.nx = c.ny = 64;
  c.eta = 1.0;
  c.t_final = 1.0;
  c.forcing = true;
  c.tau_list = {1.0 / 20, 1.0 / 40, 1.0 / 80, 1.0 / 160};
  c.out_dir = "out/converge";
  return c;
}

void print_report(const mbe::ErrorReport& r) {
  std::printf("%12s %14s %14s %9s %9s\n", "tau", "l2", "linf", "ord_l2", "ord_linf");
  for (std::size_t i = 0; i < r.tau.size(); ++i) {
    if (i == 0) {
      std::printf("%12.6g %14.6e %14.6e\n", r.tau[i], r.l2[i], r.linf[i]);
    } else {
      std::printf("%12.6g %14.6e %14.6e %9.4f %9.4f\n", r.tau[i], r.l2[i], r.linf[i], r.order_l2[i - 1],
                  r.order_linf[i - 1]);
    }
  }
}

std::string tau_tag(double tau) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", tau);
  return buf;
}

int cmd_converge(const Overrides& o) {
  const RunConfig c = resolve(converge_defaults(), o);
  mbe::write_manifest(c, "converge");
  const auto report = mbe::run_convergence_study(c, c.tau_list);
  std::ofstream out(c.out_dir / "convergence.csv");
  mbe::write_error_report_csv(out, report);
  print_report(report);
  return 0;
}

int cmd_stabsweep(const Overrides& o) {
  RunConfig d = converge_defaults();
  d.scheme = mbe::Scheme::BDF3EP3Stabilized;
  d.A_list = {0, 1, 5, 25};
  d.out_dir = "out/stabsweep";
  const RunConfig c = resolve(d, o);
  mbe::write_manifest(c, "stabsweep");
  const auto sweep = mbe::run_stabilization_sweep(c, c.A_list, c.tau_list);
  std::ofstream out(c.out_dir / "stabsweep.csv");
  out << "A,";
  for (const auto& row : sweep.rows) {
    std::printf("A = %g\n", row.A);
    print_report(row.report);
    std::ostringstream tmp;
    mbe::write_error_report_csv(tmp, row.report);
    std::istringstream lines(tmp.str());
    std::string line;
    bool header = true;
    while (std::getline(lines, line)) {
      if (header) {
        if (&row == &sweep.rows.front()) out << line << '\n';
        header = false;
        continue;
      }
      out << row.A << ',' << line << '\n';
    }
  }
  std::printf("errors strictly increasing in A: %s\n", sweep.monotone_in_A ? "yes" : "no");
  std::printf("l2 ratio A=%g vs A=%g at largest tau: %.4g\n", sweep.rows.back().A, sweep.rows.front().A,
              sweep.ratio_at_largest_tau);
  return 0;
}

int cmd_energycmp(const Overrides& o) {
  RunConfig d;
  d.nx = d.ny = 64;
  d.eta = 0.1;
  d.t_final = 10.0;
  d.initial = mbe::InitialKind::SineProduct;
  d.tau_list = {0.01, 0.001};
  d.out_dir = "out/energycmp";
  const RunConfig c = resolve(d, o);
  mbe::write_manifest(c, "energycmp");
  const auto runs = mbe::run_energy_comparison(c, c.tau_list);
  for (const auto& run : runs) {
    std::ofstream out(c.out_dir / ("energy_tau_" + tau_tag(run.tau) + ".csv"));
    mbe::write_series_csv(out, run.records);
    std::printf("tau = %-10g max dE = %.6e  final E = %.10g\n", run.tau, run.max_dE, run.records.back().E);
  }
  for (std::size_t i = 1; i < runs.size(); ++i) {
    std::printf("max dE ratio tau=%g / tau=%g: %.4f\n", runs[i - 1].tau, runs[i].tau,
                runs[i - 1].max_dE / runs[i].max_dE);
  }
  return 0;
}

RunConfig coarsen_defaults() {
  RunConfig d;
  d.nx = d.ny = 128;
  d.eta = 0.03;
  d.tau = 0.1;
  d.t_final = 1000.0;
  d.initial = mbe::InitialKind::RandomUniform;
  d.low = 0.0;
  d.high = 1.0;
  d.stride = 10;
  d.checkpoint_every = 1000;
  d.snapshot_times = {0, 1, 10, 100, 1000};
  d.out_dir = "out/coarsen";
  return d;
}

void report_coarsening(const RunConfig& c, const mbe::CoarseningResult& res) {
  {
    std::ofstream out(mbe::series_path(c));
    mbe::write_series_csv(out, res.records);
  }
  std::vector<std::pair<std::string, mbe::FitResult>> fits;
  if (res.energy_fit) fits.emplace_back("E", *res.energy_fit);
  if (res.height_fit) fits.emplace_back("H", *res.height_fit);
  if (res.slope_fit) fits.emplace_back("M", *res.slope_fit);
  std::ofstream out(c.out_dir / "fits.csv");
  mbe::write_fit_csv(out, fits);
  for (const auto& [name, f] : fits) {
    if (f.model == mbe::FitModel::LogLinear) {
      std::printf("%s(t) ~ %.6g log(t) + %.6g   (%zu points in [%g, %g])\n", name.c_str(), f.a, f.b, f.points,
                  f.t_lo, f.t_hi);
    } else {
      std::printf("%s(t) ~ %.6g t^%.6g   (%zu points in [%g, %g])\n", name.c_str(), f.a, f.b, f.points, f.t_lo,
                  f.t_hi);
    }
  }
  std::printf("final step %lld, t = %g, checkpoint %s\n", static_cast<long long>(res.final_state.step_index),
              res.final_state.time(), mbe::checkpoint_path(c).string().c_str());
}

int cmd_coarsen(const Overrides& o) {
  const RunConfig c = resolve(coarsen_defaults(), o);
  mbe::write_manifest(c, "coarsen");
  report_coarsening(c, mbe::run_coarsening(c));
  return 0;
}

int cmd_resume(const Overrides& o, const std::optional<std::string>& checkpoint) {
  if (!o.config) throw std::invalid_argument("resume needs --config (the manifest of the interrupted run)");
  const RunConfig c = resolve(coarsen_defaults(), o);
  const auto ckpt = checkpoint ? std::filesystem::path(*checkpoint) : mbe::checkpoint_path(c);
  auto state = mbe::read_checkpoint(ckpt);
  std::vector<mbe::DiagnosticsRecord> prior;
  if (std::ifstream in(mbe::series_path(c)); in) prior = mbe::read_series_csv(in);
  std::printf("resuming from %s at step %lld (t = %g)\n", ckpt.string().c_str(),
              static_cast<long long>(state.step_index), state.time());
  mbe::write_manifest(c, "resume");
  report_coarsening(c, mbe::run_coarsening(c, std::move(state), std::move(prior)));
  return 0;
}

int cmd_stability(const Overrides& o) {
  RunConfig d;
  d.out_dir = "out/stability";
  const RunConfig c = resolve(d, o);
  mbe::write_manifest(c, "stability");
  const auto rep = mbe::run_stability_report(c);
  mbe::write_stability_csvs(c, rep);
  std::printf("root sweep on (0, %g], %d samples: %s\n", c.s0, c.root_samples, rep.roots.ok() ? "all bounds hold" : "VIOLATIONS");
  for (const auto& v : rep.roots.violations) std::printf("  %s\n", v.c_str());
  std::printf("  lambda_a = lambda1(s0) = %.12f, max |lambda2| = %.12f (cap %.12f)\n", rep.roots.realized_lambda_a,
              rep.roots.max_abs_lambda2, rep.roots.modulus_cap);
  std::printf("  max closed-form vs eigen disagreement = %.3e\n", rep.roots.max_root_disagreement);
  std::printf("s = 1/11: lambda1 = %.15f, lambda2 = %.15f %+.15fi\n", rep.limit_roots.lambda1,
              rep.limit_roots.lambda2.real(), rep.limit_roots.lambda2.imag());
  std::printf("contraction: n0 = %d, eps0 = %.6f\n", rep.contraction.n0, rep.contraction.eps0);
  std::printf("diagonalization over kappa in [%g, %g]: max|lambda| = %.12f, fitted B1 = %.6f, B2 = %.6f, max cond = %.6f\n",
              c.kappa_lo, c.kappa_hi, rep.diagonalization.max_abs_eigenvalue, rep.diagonalization.fitted_b1,
              rep.diagonalization.fitted_b2, rep.diagonalization.max_condition);
  return rep.roots.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BDF3/EP3 pseudo-spectral solver for the thin-film equation without slope selection"};
  app.require_subcommand(1);

  Overrides converge, stabsweep, energycmp, coarsen, stability, resume;
  std::optional<std::string> resume_checkpoint;

  auto* c1 = app.add_subcommand("converge", "manufactured-solution temporal convergence study");
  add_common(c1, converge);
  auto* c2 = app.add_subcommand("stabsweep", "error tables of the stabilized scheme across A");
  add_common(c2, stabsweep);
  auto* c3 = app.add_subcommand("energycmp", "standard vs modified energy for several time steps");
  add_common(c3, energycmp);
  auto* c4 = app.add_subcommand("coarsen", "long coarsening run with fits of E, H, M");
  add_common(c4, coarsen);
  auto* c5 = app.add_subcommand("stability", "companion-matrix root, contraction and diagonalization sweeps");
  add_common(c5, stability);
  c5->add_option_function<std::string>("--s0", [&](const std::string& v) { stability.values["s0"] = v; }, "sweep end point");
  auto* c6 = app.add_subcommand("resume", "continue a coarsening run from its checkpoint");
  add_common(c6, resume);
  c6->add_option("--checkpoint", resume_checkpoint, "checkpoint file (default: <out>/checkpoint.bin)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c1) return cmd_converge(converge);
    if (*c2) return cmd_stabsweep(stabsweep);
    if (*c3) return cmd_energycmp(energycmp);
    if (*c4) return cmd_coarsen(coarsen);
    if (*c5) return cmd_stability(stability);
    if (*c6) return cmd_resume(resume, resume_checkpoint);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mbe3: %s\n", e.what());
    return 2;
  }
  return 0;
}
