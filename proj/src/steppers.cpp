#include "mbe/steppers.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mbe {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::BDF1EP1: return "bdf1ep1";
    case Scheme::BDF2EP2: return "bdf2ep2";
    case Scheme::BDF3EP3: return "bdf3ep3";
    case Scheme::BDF3EP3Stabilized: return "bdf3ep3-stabilized";
  }
  return "unknown";
}

Scheme scheme_from_string(std::string_view name) {
  for (auto s : {Scheme::BDF1EP1, Scheme::BDF2EP2, Scheme::BDF3EP3, Scheme::BDF3EP3Stabilized}) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown scheme '" + std::string(name) +
                              "' (expected bdf1ep1, bdf2ep2, bdf3ep3 or bdf3ep3-stabilized)");
}

void SchemeParams::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive");
  if (!(stabilization_A >= 0.0) || !std::isfinite(stabilization_A)) {
    throw std::invalid_argument("stabilization A must be nonnegative");
  }
  if (stabilization_A != 0.0 && scheme != Scheme::BDF3EP3Stabilized) {
    throw std::invalid_argument("stabilization A is only valid with the stabilized BDF3/EP3 scheme");
  }
}

SolverState initial_state(const ScalarField& h0, const SchemeParams& params) {
  params.validate();
  require_finite(h0, "initial field");
  return SolverState{h0, h0, h0, 0, params};
}

SolverState exact_start_state(const ScalarField& h0, const ScalarField& h1, const ScalarField& h2,
                              const SchemeParams& params) {
  params.validate();
  if (!(h0.grid == h1.grid) || !(h0.grid == h2.grid)) {
    throw std::invalid_argument("startup levels live on different grids");
  }
  return SolverState{h2, h1, h0, 2, params};
}

double tee_multiplier(Wavenumber k, double tau, double eta, double A) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  const double q = symbols::biharmonic(k);
  return 1.0 / (11.0 + 6.0 * tau * eta * eta * q + 6.0 * A * tau * tau * tau * q);
}

namespace {

using Spectrum = ComplexArray<double>;

// |k|^4 in storage order.
RealArray<double> biharmonic_symbol(const Grid& g) {
  RealArray<double> q(g.nx(), g.ny());
  for (int i = 0; i < g.nx(); ++i) {
    for (int j = 0; j < g.ny(); ++j) q(i, j) = symbols::biharmonic(g.wavenumber(i, j));
  }
  return q;
}

// Spectrum of div g(grad p), or zero when the nonlinearity is disabled.
Spectrum flux_spectrum(const ScalarField& p, const SchemeParams& params) {
  if (!params.nonlinearity_enabled) return Spectrum::Zero(p.grid.nx(), p.grid.ny());
  const auto ph = forward_transform(p);
  const VectorField grad(inverse_transform(apply_symbol(ph, symbols::d_dx(p.grid))),
                         inverse_transform(apply_symbol(ph, symbols::d_dy(p.grid))));
  const auto gp = apply_g(grad);
  auto sum = apply_symbol(forward_transform(gp.x), symbols::d_dx(p.grid));
  sum.coeffs += apply_symbol(forward_transform(gp.y), symbols::d_dy(p.grid)).coeffs;
  if (params.dealias) dealias_two_thirds(sum);
  return std::move(sum.coeffs);
}

Spectrum forcing_spectrum(double t, const Grid& g, const SchemeParams& params) {
  if (!params.forcing) return Spectrum::Zero(g.nx(), g.ny());
  const ScalarField f = params.forcing(t, g);
  if (!(f.grid == g)) throw std::invalid_argument("forcing returned a field on the wrong grid");
  require_finite(f, "forcing");
  return forward_transform(f).coeffs;
}

void require_state_finite(const SolverState& s) {
  require_finite(s.h_curr, "h^n");
  require_finite(s.h_prev, "h^{n-1}");
  require_finite(s.h_prev2, "h^{n-2}");
}

SolverState shifted(const SolverState& s, ScalarField next) {
  std::ostringstream what;
  what << "solution after step " << s.step_index + 1;
  require_finite(next, what.str().c_str());
  return SolverState{std::move(next), s.h_curr, s.h_prev, s.step_index + 1, s.params};
}

SolverState bdf3_step(const SolverState& s, double A) {
  if (s.step_index < 2) throw std::logic_error("BDF3/EP3 needs step_index >= 2");
  require_state_finite(s);
  const auto& prm = s.params;
  const Grid& g = s.grid();
  const double tau = prm.tau;
  const double eta2 = prm.eta * prm.eta;

  const ScalarField extrapolated(g, 3.0 * s.h_curr.values - 3.0 * s.h_prev.values + s.h_prev2.values);
  const ScalarField history(g, 18.0 * s.h_curr.values - 9.0 * s.h_prev.values + 2.0 * s.h_prev2.values);

  Spectrum rhs = forward_transform(history).coeffs;
  rhs += 6.0 * tau * (flux_spectrum(extrapolated, prm) + forcing_spectrum(s.time() + tau, g, prm));

  const RealArray<double> q = biharmonic_symbol(g);
  const double stab = 6.0 * A * tau * tau * tau;
  if (A != 0.0) {
    rhs += stab * q.cast<std::complex<double>>() * forward_transform(s.h_curr).coeffs;
  }
  const RealArray<double> denom = 11.0 + 6.0 * tau * eta2 * q + stab * q;
  rhs /= denom.cast<std::complex<double>>();
  return shifted(s, inverse_transform(SpectralField(g, std::move(rhs))));
}

}  // namespace

SolverState step_bdf3_ep3(const SolverState& state) { return bdf3_step(state, 0.0); }

SolverState step_bdf3_ep3_stabilized(const SolverState& state) {
  return bdf3_step(state, state.params.stabilization_A);
}

SolverState step_bdf2_ep2(const SolverState& s) {
  if (s.step_index < 1) throw std::logic_error("BDF2/EP2 needs step_index >= 1");
  require_state_finite(s);
  const auto& prm = s.params;
  const Grid& g = s.grid();
  const double tau = prm.tau;

  const ScalarField extrapolated(g, 2.0 * s.h_curr.values - s.h_prev.values);
  const ScalarField history(g, 4.0 * s.h_curr.values - s.h_prev.values);

  Spectrum rhs = forward_transform(history).coeffs;
  rhs += 2.0 * tau * (flux_spectrum(extrapolated, prm) + forcing_spectrum(s.time() + tau, g, prm));
  const RealArray<double> denom = 3.0 + 2.0 * tau * prm.eta * prm.eta * biharmonic_symbol(g);
  rhs /= denom.cast<std::complex<double>>();
  return shifted(s, inverse_transform(SpectralField(g, std::move(rhs))));
}

SolverState step_bdf1_ep1(const SolverState& s) {
  require_state_finite(s);
  const auto& prm = s.params;
  const Grid& g = s.grid();
  const double tau = prm.tau;

  Spectrum rhs = forward_transform(s.h_curr).coeffs;
  rhs += tau * (flux_spectrum(s.h_curr, prm) + forcing_spectrum(s.time() + tau, g, prm));
  const RealArray<double> denom = 1.0 + tau * prm.eta * prm.eta * biharmonic_symbol(g);
  rhs /= denom.cast<std::complex<double>>();
  return shifted(s, inverse_transform(SpectralField(g, std::move(rhs))));
}

ScalarField start_rk2(const ScalarField& h0, const SchemeParams& params) {
  params.validate();
  require_finite(h0, "h^0");
  const Grid& g = h0.grid;
  const double tau = params.tau;
  const RealArray<double> q = params.eta * params.eta * biharmonic_symbol(g);

  const Spectrum h0_hat = forward_transform(h0).coeffs;
  const Spectrum n0 = flux_spectrum(h0, params);
  const Spectrum f0 = forcing_spectrum(0.0, g, params);
  const Spectrum f1 = forcing_spectrum(tau, g, params);

  Spectrum predicted = (h0_hat + tau * (n0 + f1)) / (1.0 + tau * q).cast<std::complex<double>>();
  const ScalarField h_star = inverse_transform(SpectralField(g, std::move(predicted)));
  require_finite(h_star, "RK2 predictor");
  const Spectrum n_star = flux_spectrum(h_star, params);

  Spectrum corrected = (1.0 - 0.5 * tau * q).cast<std::complex<double>>() * h0_hat +
                       0.5 * tau * (n0 + n_star) + 0.5 * tau * (f0 + f1);
  corrected /= (1.0 + 0.5 * tau * q).cast<std::complex<double>>();
  ScalarField h1 = inverse_transform(SpectralField(g, std::move(corrected)));
  require_finite(h1, "h^1");
  return h1;
}

SolverState advance(const SolverState& state) {
  const Scheme scheme = state.params.scheme;
  if (scheme == Scheme::BDF1EP1) return step_bdf1_ep1(state);
  if (state.step_index == 0) {
    require_state_finite(state);
    return shifted(state, start_rk2(state.h_curr, state.params));
  }
  if (state.step_index == 1 || scheme == Scheme::BDF2EP2) return step_bdf2_ep2(state);
  if (scheme == Scheme::BDF3EP3Stabilized) return step_bdf3_ep3_stabilized(state);
  return step_bdf3_ep3(state);
}

std::int64_t steps_to_reach(double t_final, double tau) {
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("t_final must be finite and nonnegative");
  }
  const auto n = static_cast<std::int64_t>(std::llround(t_final / tau));
  if (std::abs(static_cast<double>(n) * tau - t_final) > 1e-9 * std::max(1.0, t_final)) {
    std::ostringstream msg;
    msg << "t_final = " << t_final << " is not a multiple of tau = " << tau;
    throw std::invalid_argument(msg.str());
  }
  return n;
}

SolverState run(SolverState state, double t_final, const RunCallbacks& callbacks) {
  const std::int64_t target = steps_to_reach(t_final, state.params.tau);
  while (state.step_index < target) {
    state = advance(state);
    if (callbacks.on_step) callbacks.on_step(state);
  }
  return state;
}

SolverState run(const ScalarField& initial, const SchemeParams& params, double t_final,
                const RunCallbacks& callbacks) {
  return run(initial_state(initial, params), t_final, callbacks);
}

}  // namespace mbe
