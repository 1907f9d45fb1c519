#pragma once

// Thin-film growth model without slope selection:
//   h_t = -eta^2 Lap^2 h + div g(grad h),   g(z) = -z / (1 + |z|^2),
// which is the L2 gradient flow of
//   E(h) = int( -1/2 log(1 + |grad h|^2) + 1/2 eta^2 |Lap h|^2 ).

#include "mbe/spectral_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace mbe {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

struct ModelParams {
  double eta = 1.0;

  explicit ModelParams(double eta_) : eta(eta_) {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
      throw std::invalid_argument("eta must be positive and finite");
    }
  }
};

/// Energy split into its two integrals. log_part <= 0 <= biharmonic_part.
struct EnergyValue {
  double total = 0.0;
  double log_part = 0.0;
  double biharmonic_part = 0.0;
};

template <typename Scalar>
Vec2<Scalar> g_pointwise(const Vec2<Scalar>& z) {
  return -z / (Scalar(1) + z.squaredNorm());
}

/// x^T Dg(z) x with Dg(z) = -( I / (1+|z|^2) - 2 z z^T / (1+|z|^2)^2 ).
/// Bounded above by |x|^2 / 8.
template <typename Scalar>
Scalar dg_quadratic_form(const Vec2<Scalar>& z, const Vec2<Scalar>& x) {
  const Scalar w = Scalar(1) + z.squaredNorm();
  const Scalar zx = z.dot(x);
  return -(x.squaredNorm() / w - Scalar(2) * zx * zx / (w * w));
}

/// Applies g at every node of p.
template <typename Scalar>
BasicVectorField<Scalar> apply_g(const BasicVectorField<Scalar>& p) {
  const auto denom = Scalar(1) + p.x.values.square() + p.y.values.square();
  return BasicVectorField<Scalar>(
      BasicScalarField<Scalar>(p.grid(), RealArray<Scalar>(-p.x.values / denom)),
      BasicScalarField<Scalar>(p.grid(), RealArray<Scalar>(-p.y.values / denom)));
}

/// div g(p), with g evaluated at the grid nodes and the divergence taken
/// spectrally. Optional 2/3-rule truncation of the result.
template <typename Scalar>
BasicScalarField<Scalar> nonlinear_flux_divergence(const BasicVectorField<Scalar>& p,
                                                   bool dealias = false) {
  const auto gp = apply_g(p);
  auto sum = apply_symbol(forward_transform(gp.x), symbols::d_dx(p.grid()));
  sum.coeffs += apply_symbol(forward_transform(gp.y), symbols::d_dy(p.grid())).coeffs;
  if (dealias) dealias_two_thirds(sum);
  return inverse_transform(sum);
}

template <typename Scalar>
EnergyValue energy(const BasicScalarField<Scalar>& h, const ModelParams& params) {
  const auto grad = gradient(h);
  const auto lap = laplacian(h);
  const auto slope2 = grad.x.values.square() + grad.y.values.square();
  const double area = h.grid.cell_area();
  EnergyValue e;
  e.log_part = -0.5 * static_cast<double>(slope2.log1p().sum()) * area;
  e.biharmonic_part = 0.5 * params.eta * params.eta * static_cast<double>(lap.values.square().sum()) * area;
  e.total = e.log_part + e.biharmonic_part;
  return e;
}

/// Manufactured exact solution cos(t) sin(x) sin(y).
inline ScalarField manufactured_solution(double t, const Grid& grid) {
  const double c = std::cos(t);
  return ScalarField::sample(grid, [c](double x, double y) { return c * std::sin(x) * std::sin(y); });
}

/// Forcing f that makes the manufactured solution exact:
///   f = h_t + eta^2 Lap^2 h - div g(grad h).
/// Linear parts are analytic; the flux divergence is pseudo-spectral on `grid`.
inline ScalarField manufactured_forcing(double t, const Grid& grid, const ModelParams& params) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  const double eta2 = params.eta * params.eta;
  const auto grad_x = ScalarField::sample(grid, [c](double x, double y) { return c * std::cos(x) * std::sin(y); });
  const auto grad_y = ScalarField::sample(grid, [c](double x, double y) { return c * std::sin(x) * std::cos(y); });
  ScalarField f = nonlinear_flux_divergence(VectorField(grad_x, grad_y));
  for (int i = 0; i < grid.nx(); ++i) {
    for (int j = 0; j < grid.ny(); ++j) {
      const double phi = std::sin(grid.x(i)) * std::sin(grid.y(j));
      f.values(i, j) = (-s + 4.0 * eta2 * c) * phi - f.values(i, j);
    }
  }
  return f;
}

}  // namespace mbe
