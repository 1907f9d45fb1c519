#pragma once

// Uniform periodic grid on [-pi, pi]^2, 2D Fourier transforms and
// Fourier-multiplier differential operators.
//
// Field layout: values(i, j) is the sample at (x_i, y_j), stored row-major,
// so the flat index is i * ny + j.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbe {

template <typename Scalar>
using RealArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using ComplexArray =
    Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Integer wavenumber pair (k1 along x, k2 along y).
struct Wavenumber {
  int k1 = 0;
  int k2 = 0;

  [[nodiscard]] double norm_squared() const {
    return static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
  }
};

class Grid {
 public:
  Grid(int nx, int ny) : nx_(nx), ny_(ny) {
    if (nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0) {
      std::ostringstream msg;
      msg << "grid sizes must be even and >= 4, got " << nx << "x" << ny;
      throw std::invalid_argument(msg.str());
    }
  }

  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int ny() const { return ny_; }
  [[nodiscard]] Eigen::Index size() const { return Eigen::Index(nx_) * ny_; }

  [[nodiscard]] double dx() const { return 2.0 * std::numbers::pi / nx_; }
  [[nodiscard]] double dy() const { return 2.0 * std::numbers::pi / ny_; }
  /// Rectangle-rule quadrature weight.
  [[nodiscard]] double cell_area() const { return dx() * dy(); }
  [[nodiscard]] static constexpr double domain_area() {
    return 4.0 * std::numbers::pi * std::numbers::pi;
  }

  [[nodiscard]] double x(int i) const { return -std::numbers::pi + i * dx(); }
  [[nodiscard]] double y(int j) const { return -std::numbers::pi + j * dy(); }

  /// Storage index (FFT order) to signed wavenumber in [-n/2, n/2 - 1].
  [[nodiscard]] int kx(int i) const { return i < nx_ / 2 ? i : i - nx_; }
  [[nodiscard]] int ky(int j) const { return j < ny_ / 2 ? j : j - ny_; }
  [[nodiscard]] Wavenumber wavenumber(int i, int j) const { return {kx(i), ky(j)}; }

  [[nodiscard]] int index_of_kx(int k) const { return k >= 0 ? k : k + nx_; }
  [[nodiscard]] int index_of_ky(int k) const { return k >= 0 ? k : k + ny_; }

  [[nodiscard]] bool contains(Wavenumber k) const {
    return k.k1 >= -nx_ / 2 && k.k1 < nx_ / 2 && k.k2 >= -ny_ / 2 && k.k2 < ny_ / 2;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int nx_;
  int ny_;
};

template <typename Scalar>
struct BasicScalarField {
  Grid grid;
  RealArray<Scalar> values;

  explicit BasicScalarField(const Grid& g) : grid(g), values(RealArray<Scalar>::Zero(g.nx(), g.ny())) {}
  BasicScalarField(const Grid& g, RealArray<Scalar> v) : grid(g), values(std::move(v)) {
    if (values.rows() != g.nx() || values.cols() != g.ny()) {
      throw std::invalid_argument("field shape does not match grid");
    }
  }

  template <typename Fn>
  static BasicScalarField sample(const Grid& g, Fn&& fn) {
    BasicScalarField f(g);
    for (int i = 0; i < g.nx(); ++i) {
      for (int j = 0; j < g.ny(); ++j) {
        f.values(i, j) = static_cast<Scalar>(fn(g.x(i), g.y(j)));
      }
    }
    return f;
  }

  static BasicScalarField constant(const Grid& g, Scalar c) {
    return BasicScalarField(g, RealArray<Scalar>::Constant(g.nx(), g.ny(), c));
  }

  Scalar& operator()(int i, int j) { return values(i, j); }
  const Scalar& operator()(int i, int j) const { return values(i, j); }

  [[nodiscard]] Scalar mean() const { return values.mean(); }
  [[nodiscard]] Scalar max_abs() const { return values.abs().maxCoeff(); }
};

template <typename Scalar>
struct BasicSpectralField {
  Grid grid;
  ComplexArray<Scalar> coeffs;  // FFT storage order, see Grid::kx

  explicit BasicSpectralField(const Grid& g)
      : grid(g), coeffs(ComplexArray<Scalar>::Zero(g.nx(), g.ny())) {}
  BasicSpectralField(const Grid& g, ComplexArray<Scalar> c) : grid(g), coeffs(std::move(c)) {}

  /// Coefficient of wavenumber k.
  [[nodiscard]] std::complex<Scalar> coeff(Wavenumber k) const {
    if (!grid.contains(k)) {
      throw std::out_of_range("wavenumber outside grid");
    }
    return coeffs(grid.index_of_kx(k.k1), grid.index_of_ky(k.k2));
  }
  std::complex<Scalar>& coeff_ref(Wavenumber k) {
    if (!grid.contains(k)) {
      throw std::out_of_range("wavenumber outside grid");
    }
    return coeffs(grid.index_of_kx(k.k1), grid.index_of_ky(k.k2));
  }
};

template <typename Scalar>
struct BasicVectorField {
  BasicScalarField<Scalar> x;
  BasicScalarField<Scalar> y;

  BasicVectorField(BasicScalarField<Scalar> cx, BasicScalarField<Scalar> cy)
      : x(std::move(cx)), y(std::move(cy)) {
    if (!(x.grid == y.grid)) {
      throw std::invalid_argument("vector field components live on different grids");
    }
  }
  [[nodiscard]] const Grid& grid() const { return x.grid; }
};

using ScalarField = BasicScalarField<double>;
using SpectralField = BasicSpectralField<double>;
using VectorField = BasicVectorField<double>;

namespace detail {

template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
  thread_local Eigen::FFT<Scalar> engine = [] {
    Eigen::FFT<Scalar> e;
    e.SetFlag(Eigen::FFT<Scalar>::Unscaled);
    return e;
  }();
  return engine;
}

// Unnormalized 2D DFT in place; the sign convention is Eigen's
// (forward uses exp(-i k x)).
template <typename Scalar>
void fft2_inplace(ComplexArray<Scalar>& a, bool inverse) {
  auto& engine = fft_engine<Scalar>();
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  std::vector<std::complex<Scalar>> in(std::max(rows, cols));
  std::vector<std::complex<Scalar>> out(in.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) in[j] = a(i, j);
    if (inverse) {
      engine.inv(out.data(), in.data(), cols);
    } else {
      engine.fwd(out.data(), in.data(), cols);
    }
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = out[j];
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) in[i] = a(i, j);
    if (inverse) {
      engine.inv(out.data(), in.data(), rows);
    } else {
      engine.fwd(out.data(), in.data(), rows);
    }
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = out[i];
  }
}

// The grid starts at -pi, so Fourier-series coefficients differ from the raw
// DFT by exp(i k pi) = (-1)^k, which is (-1)^(i+j) in storage order.
template <typename Scalar>
void apply_origin_phase(ComplexArray<Scalar>& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if ((i + j) % 2 != 0) a(i, j) = -a(i, j);
    }
  }
}

}  // namespace detail

/// Throws if any entry is NaN or infinite, naming the first bad node.
template <typename Scalar>
void require_finite(const BasicScalarField<Scalar>& f, const char* what = "field") {
  for (int i = 0; i < f.grid.nx(); ++i) {
    for (int j = 0; j < f.grid.ny(); ++j) {
      if (!std::isfinite(f.values(i, j))) {
        std::ostringstream msg;
        msg << what << " has non-finite value " << f.values(i, j) << " at node (" << i << ", " << j
            << "), flat index " << i * f.grid.ny() + j;
        throw std::domain_error(msg.str());
      }
    }
  }
}

/// Fourier-series coefficients: a constant c maps to coeff(0,0) = c.
template <typename Scalar>
BasicSpectralField<Scalar> forward_transform(const BasicScalarField<Scalar>& f) {
  require_finite(f, "forward_transform input");
  ComplexArray<Scalar> c = f.values.template cast<std::complex<Scalar>>();
  detail::fft2_inplace(c, false);
  detail::apply_origin_phase(c);
  c /= static_cast<Scalar>(f.grid.size());
  return BasicSpectralField<Scalar>(f.grid, std::move(c));
}

/// Real part of the synthesized field.
template <typename Scalar>
BasicScalarField<Scalar> inverse_transform(const BasicSpectralField<Scalar>& f) {
  ComplexArray<Scalar> c = f.coeffs;
  detail::apply_origin_phase(c);
  detail::fft2_inplace(c, true);
  return BasicScalarField<Scalar>(f.grid, c.real());
}

/// coeff_out(k) = symbol(k) * coeff_in(k). The symbol is any callable
/// Wavenumber -> complex (or real).
template <typename Scalar, typename Symbol>
BasicSpectralField<Scalar> apply_symbol(const BasicSpectralField<Scalar>& f, Symbol&& symbol) {
  BasicSpectralField<Scalar> out(f.grid);
  for (int i = 0; i < f.grid.nx(); ++i) {
    for (int j = 0; j < f.grid.ny(); ++j) {
      const std::complex<Scalar> m(symbol(f.grid.wavenumber(i, j)));
      if (!std::isfinite(m.real()) || !std::isfinite(m.imag())) {
        std::ostringstream msg;
        msg << "symbol is not finite at k = (" << f.grid.kx(i) << ", " << f.grid.ky(j) << ")";
        throw std::domain_error(msg.str());
      }
      out.coeffs(i, j) = m * f.coeffs(i, j);
    }
  }
  return out;
}

namespace symbols {

// The Nyquist wavenumber -n/2 has no real derivative; its first-derivative
// symbol is zero.

inline auto d_dx(const Grid& g) {
  return [n = g.nx()](Wavenumber k) {
    return k.k1 == -n / 2 ? std::complex<double>(0.0) : std::complex<double>(0.0, k.k1);
  };
}

inline auto d_dy(const Grid& g) {
  return [n = g.ny()](Wavenumber k) {
    return k.k2 == -n / 2 ? std::complex<double>(0.0) : std::complex<double>(0.0, k.k2);
  };
}

inline double laplacian(Wavenumber k) { return -k.norm_squared(); }
inline double biharmonic(Wavenumber k) { return k.norm_squared() * k.norm_squared(); }

/// 2/3-rule mask.
inline auto two_thirds_mask(const Grid& g) {
  return [nx = g.nx(), ny = g.ny()](Wavenumber k) {
    return (3 * std::abs(k.k1) <= nx && 3 * std::abs(k.k2) <= ny) ? 1.0 : 0.0;
  };
}

}  // namespace symbols

template <typename Scalar>
BasicVectorField<Scalar> gradient(const BasicScalarField<Scalar>& f) {
  const auto fh = forward_transform(f);
  return BasicVectorField<Scalar>(inverse_transform(apply_symbol(fh, symbols::d_dx(f.grid))),
                                  inverse_transform(apply_symbol(fh, symbols::d_dy(f.grid))));
}

template <typename Scalar>
BasicScalarField<Scalar> divergence(const BasicVectorField<Scalar>& v) {
  auto sum = apply_symbol(forward_transform(v.x), symbols::d_dx(v.grid()));
  sum.coeffs += apply_symbol(forward_transform(v.y), symbols::d_dy(v.grid())).coeffs;
  return inverse_transform(sum);
}

template <typename Scalar>
BasicScalarField<Scalar> laplacian(const BasicScalarField<Scalar>& f) {
  return inverse_transform(apply_symbol(forward_transform(f), symbols::laplacian));
}

template <typename Scalar>
BasicScalarField<Scalar> biharmonic(const BasicScalarField<Scalar>& f) {
  return inverse_transform(apply_symbol(forward_transform(f), symbols::biharmonic));
}

template <typename Scalar>
void dealias_two_thirds(BasicSpectralField<Scalar>& f) {
  f = apply_symbol(f, symbols::two_thirds_mask(f.grid));
}

/// Rectangle-rule integral over the periodic domain.
template <typename Scalar>
Scalar integrate(const BasicScalarField<Scalar>& f) {
  return f.values.sum() * static_cast<Scalar>(f.grid.cell_area());
}

/// Quadrature-scaled squared L2 norm.
template <typename Scalar>
Scalar l2_norm_squared(const BasicScalarField<Scalar>& f) {
  return f.values.square().sum() * static_cast<Scalar>(f.grid.cell_area());
}

template <typename Scalar>
Scalar l2_norm_squared(const BasicVectorField<Scalar>& v) {
  return l2_norm_squared(v.x) + l2_norm_squared(v.y);
}

}  // namespace mbe
