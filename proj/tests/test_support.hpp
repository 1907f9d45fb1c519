#pragma once

#include "mbe/spectral_grid.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace mbe::test {

inline ScalarField random_field(const Grid& g, std::uint64_t seed, double low = -1.0, double high = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(low, high);
  ScalarField f(g);
  for (int i = 0; i < g.nx(); ++i) {
    for (int j = 0; j < g.ny(); ++j) f.values(i, j) = dist(rng);
  }
  return f;
}

/// Random real field with the Nyquist lines (k1 = -nx/2 or k2 = -ny/2) removed.
inline ScalarField random_nyquist_free_field(const Grid& g, std::uint64_t seed) {
  auto fh = forward_transform(random_field(g, seed));
  fh = apply_symbol(fh, [&g](Wavenumber k) { return (k.k1 == -g.nx() / 2 || k.k2 == -g.ny() / 2) ? 0.0 : 1.0; });
  return inverse_transform(fh);
}

/// Trigonometric polynomial sum_k a_k cos(k.x) + b_k sin(k.x) with |k_i| <= kmax,
/// evaluable at any point, with its exact gradient.
struct BandLimited {
  struct Term {
    int k1, k2;
    double a, b;
  };
  std::vector<Term> terms;

  BandLimited(std::uint64_t seed, int kmax, double amplitude = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    for (int k1 = -kmax; k1 <= kmax; ++k1) {
      for (int k2 = -kmax; k2 <= kmax; ++k2) terms.push_back({k1, k2, dist(rng), dist(rng)});
    }
  }

  double operator()(double x, double y) const {
    double v = 0.0;
    for (const auto& t : terms) {
      const double ph = t.k1 * x + t.k2 * y;
      v += t.a * std::cos(ph) + t.b * std::sin(ph);
    }
    return v;
  }
};

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  return (a.values - b.values).abs().maxCoeff();
}

/// 8th-order centered first derivative along x (axis 0) or y (axis 1) of a
/// periodic field.
inline ScalarField centered_difference(const ScalarField& f, int axis) {
  static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  const Grid& g = f.grid;
  const double h = axis == 0 ? g.dx() : g.dy();
  ScalarField out(g);
  for (int i = 0; i < g.nx(); ++i) {
    for (int j = 0; j < g.ny(); ++j) {
      double d = 0.0;
      for (int m = 1; m <= 4; ++m) {
        if (axis == 0) {
          d += c[m - 1] * (f.values((i + m) % g.nx(), j) - f.values((i - m + g.nx()) % g.nx(), j));
        } else {
          d += c[m - 1] * (f.values(i, (j + m) % g.ny()) - f.values(i, (j - m + g.ny()) % g.ny()));
        }
      }
      out.values(i, j) = d / h;
    }
  }
  return out;
}

/// Samples every `factor`-th node of a refined field onto the coarse grid.
inline ScalarField restrict_to(const ScalarField& fine, const Grid& coarse, int factor) {
  ScalarField out(coarse);
  for (int i = 0; i < coarse.nx(); ++i) {
    for (int j = 0; j < coarse.ny(); ++j) out.values(i, j) = fine.values(i * factor, j * factor);
  }
  return out;
}

}  // namespace mbe::test
