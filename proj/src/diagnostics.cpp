#include "mbe/diagnostics.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mbe {

namespace {

double gradient_norm_squared(const ScalarField& f) { return l2_norm_squared(gradient(f)); }

}  // namespace

ModifiedEnergy modified_energy(const SolverState& state, const ModelParams& params) {
  ModifiedEnergy out;
  out.E = energy(state.h_curr, params).total;
  out.E_mod = out.E;
  if (state.step_index < 2) return out;
  const double tau = state.params.tau;
  const ScalarField dh(state.grid(), state.h_curr.values - state.h_prev.values);
  const ScalarField dh_prev(state.grid(), state.h_prev.values - state.h_prev2.values);
  out.E_mod += 3.0 / (4.0 * tau) * l2_norm_squared(dh) + 1.0 / (6.0 * tau) * l2_norm_squared(dh_prev) +
               1.5 * gradient_norm_squared(dh) + 0.5 * gradient_norm_squared(dh_prev);
  out.has_correction = true;
  return out;
}

std::optional<double> startup_ratio(const SolverState& state) {
  if (state.step_index != 2) return std::nullopt;
  const ScalarField d2(state.grid(), state.h_curr.values - state.h_prev.values);
  const ScalarField d1(state.grid(), state.h_prev.values - state.h_prev2.values);
  return (l2_norm_squared(d2) + l2_norm_squared(d1)) / state.params.tau;
}

double characteristic_height(const ScalarField& h) {
  const ScalarField centered(h.grid, h.values - h.values.mean());
  return std::sqrt(l2_norm_squared(centered) / Grid::domain_area());
}

double characteristic_slope(const ScalarField& h) {
  return std::sqrt(gradient_norm_squared(h) / Grid::domain_area());
}

DiagnosticsRecord make_record(const SolverState& state) {
  DiagnosticsRecord r;
  r.t = state.time();
  const auto me = modified_energy(state, state.params.model());
  r.E = me.E;
  if (me.has_correction) {
    r.E_mod = me.E_mod;
    r.dE = me.E_mod - me.E;
  }
  r.H = characteristic_height(state.h_curr);
  r.M = characteristic_slope(state.h_curr);
  if (auto ratio = startup_ratio(state)) r.startup_ratio = *ratio;
  return r;
}

FitResult fit_curve(std::span<const std::pair<double, double>> series, FitModel model,
                    std::pair<double, double> window) {
  const auto [t_lo, t_hi] = window;
  if (!(t_lo > 0.0) || !(t_hi >= t_lo)) {
    throw std::invalid_argument("fit window must satisfy 0 < t_lo <= t_hi");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t nonpositive = 0;
  for (const auto& [t, v] : series) {
    if (t < t_lo || t > t_hi) continue;
    if (model == FitModel::Power && !(v > 0.0)) {
      ++nonpositive;
      continue;
    }
    xs.push_back(std::log(t));
    ys.push_back(model == FitModel::Power ? std::log(v) : v);
  }
  if (nonpositive > 0) {
    throw std::invalid_argument("power fit needs positive values; " + std::to_string(nonpositive) +
                                " nonpositive values inside the window");
  }
  if (xs.size() < 3) {
    throw std::invalid_argument("fit needs at least 3 points inside the window, got " + std::to_string(xs.size()));
  }
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = xs[static_cast<std::size_t>(i)];
    design(i, 1) = 1.0;
    rhs(i) = ys[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  FitResult fit;
  fit.model = model;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.points = xs.size();
  fit.residual = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(n));
  if (model == FitModel::LogLinear) {
    fit.a = coef(0);
    fit.b = coef(1);
  } else {
    fit.a = std::exp(coef(1));
    fit.b = coef(0);
  }
  return fit;
}

std::string_view to_string(DissipationVerdict v) {
  switch (v) {
    case DissipationVerdict::GuaranteedDecay: return "GUARANTEED_DECAY";
    case DissipationVerdict::StabilizedGuarantee: return "STABILIZED_GUARANTEE";
    case DissipationVerdict::BoundedOnly: return "BOUNDED_ONLY";
  }
  return "unknown";
}

double stabilization_threshold(double eta) {
  const double r = 49.0 / 16.0;
  return 9.0 / 32.0 * r * r * r * r / (eta * eta);
}

DissipationVerdict check_dissipation_constraint(const SchemeParams& params) {
  if (params.scheme == Scheme::BDF3EP3Stabilized && params.stabilization_A > 0.0 &&
      params.stabilization_A >= stabilization_threshold(params.eta)) {
    return DissipationVerdict::StabilizedGuarantee;
  }
  const bool plain = params.scheme == Scheme::BDF3EP3 ||
                     (params.scheme == Scheme::BDF3EP3Stabilized && params.stabilization_A == 0.0);
  if (plain && params.tau <= kDecayStepConstant * params.eta * params.eta) {
    return DissipationVerdict::GuaranteedDecay;
  }
  return DissipationVerdict::BoundedOnly;
}

DiagnosticsRecorder::DiagnosticsRecorder(std::int64_t stride) : stride_(stride) {
  if (stride_ < 1) throw std::invalid_argument("recording stride must be >= 1");
}

void DiagnosticsRecorder::observe(const SolverState& state) {
  if (auto ratio = mbe::startup_ratio(state)) startup_ratio_ = *ratio;
  if (state.step_index % stride_ != 0) return;
  records_.push_back(make_record(state));
}

std::vector<std::pair<double, double>> DiagnosticsRecorder::series(double DiagnosticsRecord::*field) const {
  std::vector<std::pair<double, double>> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.emplace_back(r.t, r.*field);
  return out;
}

void DiagnosticsRecorder::write_csv(std::ostream& out) const { write_series_csv(out, records_); }

namespace {

void put(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.write(buf, res.ptr - buf);
}

double parse_double(std::string_view s, std::size_t line) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("bad number '" + std::string(s) + "' on CSV line " + std::to_string(line));
  }
  return v;
}

}  // namespace

void write_series_csv(std::ostream& out, std::span<const DiagnosticsRecord> records, bool header) {
  if (header) out << kSeriesCsvHeader << '\n';
  for (const auto& r : records) {
    put(out, r.t);
    out << ',';
    put(out, r.E);
    out << ',';
    put(out, r.E_mod);
    out << ',';
    put(out, r.dE);
    out << ',';
    put(out, r.H);
    out << ',';
    put(out, r.M);
    out << '\n';
  }
}

std::vector<DiagnosticsRecord> read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSeriesCsvHeader) {
    throw std::runtime_error("series CSV must start with header " + std::string(kSeriesCsvHeader));
  }
  std::vector<DiagnosticsRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double v[6];
    std::size_t start = 0;
    for (int c = 0; c < 6; ++c) {
      const auto comma = line.find(',', start);
      if ((c < 5) == (comma == std::string::npos)) {
        throw std::runtime_error("expected 6 columns on CSV line " + std::to_string(line_no));
      }
      v[c] = parse_double(std::string_view(line).substr(start, comma - start), line_no);
      start = comma + 1;
    }
    DiagnosticsRecord r;
    r.t = v[0];
    r.E = v[1];
    r.E_mod = v[2];
    r.dE = v[3];
    r.H = v[4];
    r.M = v[5];
    out.push_back(r);
  }
  return out;
}

}  // namespace mbe
