#include "mbe/harness.hpp"

#include "mbe/checkpoint.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mbe {

namespace {

void put(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.write(buf, res.ptr - buf);
}

std::ofstream open_output(const RunConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.out_dir);
  const auto path = config.out_dir / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void require_strictly_decreasing(std::span<const double> taus) {
  if (taus.empty()) throw std::invalid_argument("tau list is empty");
  for (std::size_t i = 1; i < taus.size(); ++i) {
    if (!(taus[i] < taus[i - 1])) {
      std::ostringstream msg;
      msg << "tau list must be strictly decreasing; entry " << i << " (" << taus[i] << ") follows " << taus[i - 1];
      throw std::invalid_argument(msg.str());
    }
  }
}

std::optional<FitResult> try_fit(const std::vector<DiagnosticsRecord>& records, double DiagnosticsRecord::*field,
                                 FitModel model, const RunConfig& config) {
  std::vector<std::pair<double, double>> series;
  for (const auto& r : records) series.emplace_back(r.t, r.*field);
  const auto in_window = std::count_if(series.begin(), series.end(), [&](const auto& p) {
    return p.first >= config.fit_lo && p.first <= config.fit_hi;
  });
  if (in_window < 3) return std::nullopt;
  return fit_curve(series, model, {config.fit_lo, config.fit_hi});
}

}  // namespace

std::filesystem::path checkpoint_path(const RunConfig& config) { return config.out_dir / "checkpoint.bin"; }
std::filesystem::path series_path(const RunConfig& config) { return config.out_dir / "series.csv"; }

namespace {

// Checkpoint and the series recorded up to it, so `resume` can pick up both.
void save_progress(const RunConfig& config, const SolverState& state, const std::vector<DiagnosticsRecord>& records) {
  write_checkpoint(checkpoint_path(config), state);
  const auto path = series_path(config);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    write_series_csv(out, records);
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

ScalarField make_initial_field(const RunConfig& config) {
  const Grid grid(config.nx, config.ny);
  switch (config.initial) {
    case InitialKind::RandomUniform:
      if (!config.seed) throw std::invalid_argument("random initial data requires a seed");
      return random_uniform_field(grid, *config.seed, config.low, config.high);
    case InitialKind::SineProduct:
      return ScalarField::sample(grid, [](double x, double y) { return std::sin(x) * std::sin(y); });
    case InitialKind::FromCheckpoint: {
      ScalarField f = [&] {
        try {
          return load_snapshot(config.init_path).field;
        } catch (const FormatError&) {
          return read_checkpoint(config.init_path).h_curr;
        }
      }();
      if (!(f.grid == grid)) {
        std::ostringstream msg;
        msg << config.init_path.string() << " holds a " << f.grid.nx() << "x" << f.grid.ny()
            << " field but the run is configured for " << grid.nx() << "x" << grid.ny();
        throw std::invalid_argument(msg.str());
      }
      return f;
    }
  }
  throw std::logic_error("unhandled initial kind");
}

SchemeParams make_scheme_params(const RunConfig& config) {
  SchemeParams p;
  p.tau = config.tau;
  p.eta = config.eta;
  p.stabilization_A = config.A;
  p.scheme = config.scheme;
  p.dealias = config.dealias;
  if (config.forcing) {
    const ModelParams model(config.eta);
    p.forcing = [model](double t, const Grid& g) { return manufactured_forcing(t, g, model); };
  }
  p.validate();
  return p;
}

std::vector<double> observed_orders(std::span<const double> tau, std::span<const double> err) {
  if (tau.size() != err.size()) throw std::invalid_argument("tau and error arrays differ in length");
  std::vector<double> orders;
  for (std::size_t i = 0; i + 1 < tau.size(); ++i) {
    orders.push_back(std::log(err[i] / err[i + 1]) / std::log(tau[i] / tau[i + 1]));
  }
  return orders;
}

ErrorReport run_convergence_study(const RunConfig& config, std::span<const double> tau_list) {
  require_strictly_decreasing(tau_list);
  const Grid grid(config.nx, config.ny);
  const ScalarField exact_final = manufactured_solution(config.t_final, grid);
  ErrorReport report;
  for (double tau : tau_list) {
    RunConfig c = config;
    c.tau = tau;
    c.forcing = true;
    const SchemeParams params = make_scheme_params(c);
    steps_to_reach(config.t_final, tau);
    SolverState state = config.startup == StartupMode::Exact
                            ? exact_start_state(manufactured_solution(0.0, grid), manufactured_solution(tau, grid),
                                                manufactured_solution(2.0 * tau, grid), params)
                            : initial_state(manufactured_solution(0.0, grid), params);
    const SolverState final_state = run(std::move(state), config.t_final);
    const RealArray<double> diff = final_state.h_curr.values - exact_final.values;
    report.tau.push_back(tau);
    report.l2.push_back(std::sqrt(l2_norm_squared(ScalarField(grid, diff))));
    report.linf.push_back(diff.abs().maxCoeff());
  }
  report.order_l2 = observed_orders(report.tau, report.l2);
  report.order_linf = observed_orders(report.tau, report.linf);
  return report;
}

StabilizationSweep run_stabilization_sweep(const RunConfig& config, std::span<const double> A_list,
                                           std::span<const double> tau_list) {
  if (A_list.empty()) throw std::invalid_argument("A list is empty");
  for (std::size_t i = 1; i < A_list.size(); ++i) {
    if (!(A_list[i] > A_list[i - 1])) throw std::invalid_argument("A list must be strictly increasing");
  }
  StabilizationSweep sweep;
  for (double A : A_list) {
    RunConfig c = config;
    c.scheme = Scheme::BDF3EP3Stabilized;
    c.A = A;
    sweep.rows.push_back({A, run_convergence_study(c, tau_list)});
  }
  sweep.monotone_in_A = true;
  for (std::size_t k = 0; k < tau_list.size(); ++k) {
    for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
      const auto& lo = sweep.rows[i - 1].report;
      const auto& hi = sweep.rows[i].report;
      if (!(hi.l2[k] > lo.l2[k]) || !(hi.linf[k] > lo.linf[k])) sweep.monotone_in_A = false;
    }
  }
  sweep.ratio_at_largest_tau = sweep.rows.back().report.l2.front() / sweep.rows.front().report.l2.front();
  return sweep;
}

std::vector<EnergySeries> run_energy_comparison(const RunConfig& config, std::span<const double> tau_list) {
  std::vector<EnergySeries> out;
  const ScalarField h0 = make_initial_field(config);
  for (double tau : tau_list) {
    RunConfig c = config;
    c.tau = tau;
    c.forcing = false;
    DiagnosticsRecorder recorder(1);
    SolverState state = initial_state(h0, make_scheme_params(c));
    recorder.observe(state);
    run(std::move(state), config.t_final, {[&](const SolverState& s) { recorder.observe(s); }});
    EnergySeries series;
    series.tau = tau;
    series.records = recorder.records();
    for (const auto& r : series.records) {
      if (std::isfinite(r.dE)) series.max_dE = std::max(series.max_dE, r.dE);
    }
    out.push_back(std::move(series));
  }
  return out;
}

CoarseningResult run_coarsening(const RunConfig& config, std::optional<SolverState> resume_from,
                                std::vector<DiagnosticsRecord> prior) {
  config.validate();
  const SchemeParams params = make_scheme_params(config);
  SolverState state = [&] {
    if (!resume_from) return initial_state(make_initial_field(config), params);
    SolverState s = std::move(*resume_from);
    s.params.forcing = params.forcing;
    s.params.dealias = params.dealias;
    s.params.nonlinearity_enabled = params.nonlinearity_enabled;
    return s;
  }();
  std::filesystem::create_directories(config.out_dir);

  std::set<std::int64_t> snapshot_steps;
  for (double t : config.snapshot_times) snapshot_steps.insert(steps_to_reach(t, state.params.tau));

  CoarseningResult result{std::move(prior), std::nullopt, std::nullopt, std::nullopt, state};
  auto& records = result.records;
  const double t_resume = state.time();
  std::erase_if(records, [&](const DiagnosticsRecord& r) { return r.t > t_resume + 0.5 * state.params.tau; });

  auto visit = [&](const SolverState& s) {
    if (s.step_index % config.stride == 0) records.push_back(make_record(s));
    if (snapshot_steps.contains(s.step_index)) {
      dump_snapshot(s.h_curr, s.time(), config.out_dir / ("snapshot_" + std::to_string(s.step_index) + ".bin"));
    }
    if (config.checkpoint_every > 0 && s.step_index > 0 && s.step_index % config.checkpoint_every == 0) {
      save_progress(config, s, records);
    }
  };
  if (!resume_from) visit(state);
  state = run(std::move(state), config.t_final, {visit});
  save_progress(config, state, records);

  result.energy_fit = try_fit(records, &DiagnosticsRecord::E, FitModel::LogLinear, config);
  result.height_fit = try_fit(records, &DiagnosticsRecord::H, FitModel::Power, config);
  result.slope_fit = try_fit(records, &DiagnosticsRecord::M, FitModel::Power, config);
  result.final_state = std::move(state);
  return result;
}

StabilityReport run_stability_report(const RunConfig& config) {
  StabilityReport rep;
  rep.roots = stability::verify_root_bounds(config.s0, config.root_samples);
  rep.limit_roots = stability::cubic_roots(stability::limit_s<double>());
  rep.contraction = stability::find_contraction_n0(config.s0, config.contraction_grid);
  rep.diagonalization = stability::sweep_diagonalization(config.kappa_lo, config.kappa_hi, config.kappa_count);
  return rep;
}

void write_manifest(const RunConfig& config, const std::string& command) {
  auto out = open_output(config, "manifest.txt");
  out << "# mbe3 " << command << "\n" << to_manifest(config);
}

void write_error_report_csv(std::ostream& out, const ErrorReport& report) {
  out << "tau,l2,linf,order_l2,order_linf\n";
  for (std::size_t i = 0; i < report.tau.size(); ++i) {
    put(out, report.tau[i]);
    out << ',';
    put(out, report.l2[i]);
    out << ',';
    put(out, report.linf[i]);
    out << ',';
    if (i > 0) put(out, report.order_l2[i - 1]);
    out << ',';
    if (i > 0) put(out, report.order_linf[i - 1]);
    out << '\n';
  }
}

void write_fit_csv(std::ostream& out, std::span<const std::pair<std::string, FitResult>> fits) {
  out << "quantity,model,a,b,t_lo,t_hi,residual,points\n";
  for (const auto& [name, f] : fits) {
    out << name << ',' << (f.model == FitModel::LogLinear ? "log_linear" : "power") << ',';
    put(out, f.a);
    out << ',';
    put(out, f.b);
    out << ',';
    put(out, f.t_lo);
    out << ',';
    put(out, f.t_hi);
    out << ',';
    put(out, f.residual);
    out << ',' << f.points << '\n';
  }
}

void write_stability_csvs(const RunConfig& config, const StabilityReport& report) {
  {
    auto out = open_output(config, "roots.csv");
    out << "s,lambda1,re_lambda2,im_lambda2,abs_lambda2\n";
    auto row = [&out](double s, double l1, std::complex<double> l2) {
      put(out, s);
      out << ',';
      put(out, l1);
      out << ',';
      put(out, l2.real());
      out << ',';
      put(out, l2.imag());
      out << ',';
      put(out, std::abs(l2));
      out << '\n';
    };
    for (const auto& r : report.roots.rows) row(r.s, r.lambda1, r.lambda2);
    row(report.limit_roots.s, report.limit_roots.lambda1, report.limit_roots.lambda2);
  }
  {
    auto out = open_output(config, "norms.csv");
    out << "s";
    for (int n = 1; n <= config.power_nmax; ++n) out << ",norm_M" << n;
    out << '\n';
    std::vector<double> ss;
    for (int i = 1; i <= 10; ++i) ss.push_back(config.s0 * i / 10.0);
    ss.push_back(stability::limit_s<double>());
    for (double s : ss) {
      put(out, s);
      for (double v : stability::matrix_power_norms(s, config.power_nmax)) {
        out << ',';
        put(out, v);
      }
      out << '\n';
    }
  }
  {
    auto out = open_output(config, "contraction.csv");
    out << "s0,grid_points,n0,eps0\n";
    put(out, config.s0);
    out << ',' << config.contraction_grid << ',' << report.contraction.n0 << ',';
    put(out, report.contraction.eps0);
    out << '\n';
  }
  {
    auto out = open_output(config, "diagonalization.csv");
    out << "kappa,s,max_abs_lambda,condition,norm_sum,reconstruction_error\n";
    for (const auto& d : report.diagonalization.rows) {
      put(out, d.kappa);
      out << ',';
      put(out, d.s);
      out << ',';
      put(out, d.max_abs_eigenvalue);
      out << ',';
      put(out, d.condition);
      out << ',';
      put(out, d.norm_sum);
      out << ',';
      put(out, d.reconstruction_error);
      out << '\n';
    }
  }
}

}  // namespace mbe
