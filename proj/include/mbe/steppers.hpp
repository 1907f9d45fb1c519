#pragma once

// IMEX time integrators. Every implicit solve is diagonal in Fourier space.
//
//   BDF1/EP1   (h1 - h0)/tau = -eta^2 Lap^2 h1 + div g(grad h0)
//   BDF2/EP2   (3h^{n+1} - 4h^n + h^{n-1})/(2tau) = -eta^2 Lap^2 h^{n+1} + div g(2 grad h^n - grad h^{n-1})
//   BDF3/EP3   (11h^{n+1} - 18h^n + 9h^{n-1} - 2h^{n-2})/(6tau)
//                  = -eta^2 Lap^2 h^{n+1} + div g(3 grad h^n - 3 grad h^{n-1} + grad h^{n-2})
//   stabilized BDF3/EP3 adds -A tau^2 Lap^2 (h^{n+1} - h^n) to the right side.
//
// Forcing, when present, is evaluated at t_{n+1} for the BDF schemes.

#include "mbe/mbe_model.hpp"
#include "mbe/spectral_grid.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

namespace mbe {

enum class Scheme : std::uint8_t {
  BDF1EP1 = 1,
  BDF2EP2 = 2,
  BDF3EP3 = 3,
  BDF3EP3Stabilized = 4,
};

std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view name);

using ForcingFn = std::function<ScalarField(double t, const Grid& grid)>;

struct SchemeParams {
  double tau = 0.01;
  double eta = 1.0;
  double stabilization_A = 0.0;
  Scheme scheme = Scheme::BDF3EP3;
  ForcingFn forcing;  // empty means no forcing
  bool nonlinearity_enabled = true;
  bool dealias = false;

  /// Throws std::invalid_argument on a bad combination.
  void validate() const;
  [[nodiscard]] ModelParams model() const { return ModelParams(eta); }
};

/// Three-level history h^n, h^{n-1}, h^{n-2}. Before the history is full the
/// missing levels hold copies of h^0.
struct SolverState {
  ScalarField h_curr;
  ScalarField h_prev;
  ScalarField h_prev2;
  std::int64_t step_index = 0;
  SchemeParams params;

  [[nodiscard]] const Grid& grid() const { return h_curr.grid; }
  [[nodiscard]] double time() const { return static_cast<double>(step_index) * params.tau; }
};

SolverState initial_state(const ScalarField& h0, const SchemeParams& params);

/// State at n = 2 built from externally supplied h^0, h^1, h^2 (e.g. exact
/// solution samples).
SolverState exact_start_state(const ScalarField& h0, const ScalarField& h1, const ScalarField& h2,
                              const SchemeParams& params);

/// 1 / (11 + 6 tau eta^2 |k|^4 + 6 A tau^3 |k|^4); equals 1/11 at k = 0.
double tee_multiplier(Wavenumber k, double tau, double eta, double A);

SolverState step_bdf1_ep1(const SolverState& state);
SolverState step_bdf2_ep2(const SolverState& state);
SolverState step_bdf3_ep3(const SolverState& state);
SolverState step_bdf3_ep3_stabilized(const SolverState& state);

/// Second-order IMEX trapezoidal starter: BDF1/EP1 predictor, then a
/// Crank-Nicolson step on the biharmonic with the nonlinearity and forcing
/// averaged between t = 0 and t = tau.
ScalarField start_rk2(const ScalarField& h0, const SchemeParams& params);

/// One step of the configured scheme including the startup chain
/// (RK2 -> BDF2/EP2 -> BDF3/EP3).
SolverState advance(const SolverState& state);

/// Number of steps to reach t_final; rejects t_final that is not a multiple
/// of tau.
std::int64_t steps_to_reach(double t_final, double tau);

struct RunCallbacks {
  /// Called after every step with the new state.
  std::function<void(const SolverState&)> on_step;
};

/// Advances until time t_final (absolute, measured from step 0).
SolverState run(SolverState state, double t_final, const RunCallbacks& callbacks = {});

SolverState run(const ScalarField& initial, const SchemeParams& params, double t_final,
                const RunCallbacks& callbacks = {});

}  // namespace mbe
