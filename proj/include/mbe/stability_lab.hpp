#pragma once

// Companion-matrix analysis of the BDF3 recurrence per Fourier mode:
//   z^{n+1} = M(s) z^n,   M(s) = [[18s, -9s, 2s], [1, 0, 0], [0, 1, 0]],
// with s = T(k) in (0, 1/11]. Its characteristic polynomial is
//   lambda^3 - 18 s lambda^2 + 9 s lambda - 2 s.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbe::stability {

template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

template <typename Scalar>
constexpr Scalar limit_s() {
  return Scalar(1) / Scalar(11);
}

template <typename Scalar>
class CompanionMatrix3 {
 public:
  explicit CompanionMatrix3(Scalar s) : s_(s) {
    if (!(s > Scalar(0)) || !(s <= limit_s<Scalar>())) {
      std::ostringstream msg;
      msg << "s = " << s << " outside (0, 1/11]";
      throw std::invalid_argument(msg.str());
    }
    m_ << 18 * s, -9 * s, 2 * s, 1, 0, 0, 0, 1, 0;
  }

  [[nodiscard]] Scalar s() const { return s_; }
  [[nodiscard]] const Matrix3<Scalar>& matrix() const { return m_; }

  /// lambda^3 - 18 s lambda^2 + 9 s lambda - 2 s
  template <typename T>
  [[nodiscard]] T characteristic(const T& lambda) const {
    return ((lambda - T(18 * s_)) * lambda + T(9 * s_)) * lambda - T(2 * s_);
  }

 private:
  Scalar s_;
  Matrix3<Scalar> m_;
};

template <typename Scalar>
Matrix3<Scalar> companion_matrix(Scalar s) {
  return CompanionMatrix3<Scalar>(s).matrix();
}

/// One real root and a conjugate pair; lambda2 has nonnegative imaginary part.
template <typename Scalar>
struct RootTriple {
  Scalar s{};
  Scalar lambda1{};
  std::complex<Scalar> lambda2;
  std::complex<Scalar> lambda3;
};

/// Cardano closed form. Accurate away from s -> 0, where a and b both vanish.
template <typename Scalar>
RootTriple<Scalar> cubic_roots_closed_form(Scalar s) {
  using C = std::complex<Scalar>;
  const Scalar a = 27 * s - 324 * s * s;
  const Scalar radicand = s - 27 * s * s + 216 * s * s * s + std::sqrt(s * s - 27 * s * s * s + 189 * s * s * s * s);
  if (!(radicand > 0)) {
    std::ostringstream msg;
    msg << "cube-root radicand " << radicand << " is not positive at s = " << s;
    throw std::domain_error(msg.str());
  }
  const Scalar b = std::cbrt(radicand);
  const Scalar sqrt3 = std::sqrt(Scalar(3));
  RootTriple<Scalar> r;
  r.s = s;
  r.lambda1 = 6 * s - a / (9 * b) + b;
  r.lambda2 = C(6 * s) + C(1, sqrt3) / Scalar(18) * (a / b) - C(1, -sqrt3) / Scalar(2) * b;
  r.lambda3 = std::conj(r.lambda2);
  return r;
}

/// Eigenvalues of M(s).
template <typename Scalar>
RootTriple<Scalar> cubic_roots_eigensolver(Scalar s) {
  const CompanionMatrix3<Scalar> m(s);
  Eigen::EigenSolver<Matrix3<Scalar>> solver(m.matrix(), false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenvalue solve failed");
  const auto ev = solver.eigenvalues();
  int real_idx = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(ev(i).imag()) < std::abs(ev(real_idx).imag())) real_idx = i;
  }
  RootTriple<Scalar> r;
  r.s = s;
  r.lambda1 = ev(real_idx).real();
  for (int i = 0; i < 3; ++i) {
    if (i != real_idx && ev(i).imag() >= 0) r.lambda2 = ev(i);
  }
  // Pair collapsed onto the real axis.
  if (r.lambda2 == std::complex<Scalar>()) {
    for (int i = 0; i < 3; ++i) {
      if (i != real_idx) r.lambda2 = std::complex<Scalar>(ev(i).real(), std::abs(ev(i).imag()));
    }
  }
  r.lambda3 = std::conj(r.lambda2);
  return r;
}

/// Roots from the eigenvalue solve, cross-checked against the closed form.
template <typename Scalar>
RootTriple<Scalar> cubic_roots(Scalar s, Scalar agreement_tol = Scalar(1e-9)) {
  const auto eig = cubic_roots_eigensolver(s);
  const auto closed = cubic_roots_closed_form(s);
  const Scalar d1 = std::abs(eig.lambda1 - closed.lambda1);
  const Scalar d2 = std::abs(eig.lambda2 - closed.lambda2);
  if (!(std::max(d1, d2) <= agreement_tol)) {
    std::ostringstream msg;
    msg << "closed-form and eigenvalue roots disagree at s = " << s << ": |d lambda1| = " << d1
        << ", |d lambda2| = " << d2;
    throw std::runtime_error(msg.str());
  }
  return eig;
}

/// Largest singular value, from the closed-form eigenvalues of the 3x3 Gram
/// matrix.
template <typename Scalar>
Scalar spectral_norm(const Matrix3<Scalar>& a) {
  const Matrix3<Scalar> gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Matrix3<Scalar>> solver;
  solver.computeDirect(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(Scalar(0), solver.eigenvalues().maxCoeff()));
}

/// ||M(s)^n||_2 for n = 1..n_max.
template <typename Scalar>
std::vector<Scalar> matrix_power_norms(Scalar s, int n_max) {
  const Matrix3<Scalar> m = companion_matrix(s);
  std::vector<Scalar> norms;
  norms.reserve(static_cast<std::size_t>(std::max(n_max, 0)));
  Matrix3<Scalar> power = m;
  for (int n = 1; n <= n_max; ++n) {
    norms.push_back(spectral_norm(power));
    power = (m * power).eval();
  }
  return norms;
}

template <typename Scalar>
struct RootSweepRow {
  Scalar s;
  Scalar lambda1;
  std::complex<Scalar> lambda2;
};

template <typename Scalar>
struct RootBoundsReport {
  Scalar s0{};
  Scalar realized_lambda_a{};  // lambda1(s0)
  Scalar modulus_cap{};        // sqrt(2 / 2.1)
  Scalar max_abs_lambda2{};
  Scalar max_root_disagreement{};
  std::vector<RootSweepRow<Scalar>> rows;
  std::vector<std::string> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
};

/// Sweeps s_i = s0 * i / n, i = 1..n, checking
///   2.1 s < lambda1(s) <= lambda1(s0) < 1, monotonicity of lambda1 and of
///   lambda1 - 2.1 s, |lambda2| <= sqrt(2/2.1), |lambda2|^2 = 2 s / lambda1,
///   positivity of the cube-root radicand, closed form vs eigen agreement and
///   the scaled residual of each root under the cubic.
template <typename Scalar>
RootBoundsReport<Scalar> verify_root_bounds(Scalar s0, int n_samples, Scalar agreement_tol = Scalar(1e-9)) {
  if (!(s0 > 0) || !(s0 < limit_s<Scalar>())) throw std::invalid_argument("s0 must lie in (0, 1/11)");
  if (n_samples < 2) throw std::invalid_argument("need at least two samples");
  RootBoundsReport<Scalar> rep;
  rep.s0 = s0;
  rep.modulus_cap = std::sqrt(Scalar(2) / Scalar(2.1));
  rep.realized_lambda_a = cubic_roots_eigensolver(s0).lambda1;

  auto flag = [&rep](Scalar s, const std::string& what) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "s = " << s << ": " << what;
    rep.violations.push_back(msg.str());
  };

  Scalar prev_l1 = -1;
  Scalar prev_gap = -std::numeric_limits<Scalar>::infinity();
  for (int i = 1; i <= n_samples; ++i) {
    const Scalar s = s0 * Scalar(i) / Scalar(n_samples);
    RootTriple<Scalar> eig;
    RootTriple<Scalar> closed;
    try {
      eig = cubic_roots_eigensolver(s);
      closed = cubic_roots_closed_form(s);
    } catch (const std::exception& e) {
      flag(s, e.what());
      continue;
    }
    const Scalar diff = std::max(std::abs(eig.lambda1 - closed.lambda1), std::abs(eig.lambda2 - closed.lambda2));
    rep.max_root_disagreement = std::max(rep.max_root_disagreement, diff);
    if (!(diff <= agreement_tol)) flag(s, "closed form and eigen solve disagree by " + std::to_string(diff));

    const Scalar l1 = eig.lambda1;
    const Scalar mod2 = std::norm(eig.lambda2);
    rep.max_abs_lambda2 = std::max(rep.max_abs_lambda2, std::sqrt(mod2));
    rep.rows.push_back({s, l1, eig.lambda2});

    const CompanionMatrix3<Scalar> m(s);
    for (const std::complex<Scalar> root : {std::complex<Scalar>(l1), eig.lambda2}) {
      const Scalar scale = std::max(Scalar(1), std::pow(std::abs(root), Scalar(3)));
      if (!(std::abs(m.characteristic(root)) <= Scalar(1e-12) * scale)) flag(s, "root residual above 1e-12");
    }
    if (!(l1 > Scalar(2.1) * s)) flag(s, "lambda1 <= 2.1 s");
    if (!(l1 <= rep.realized_lambda_a + Scalar(1e-15))) flag(s, "lambda1 exceeds lambda1(s0)");
    if (!(rep.realized_lambda_a < 1)) flag(s, "lambda1(s0) >= 1");
    if (!(std::sqrt(mod2) <= rep.modulus_cap + Scalar(1e-12))) flag(s, "|lambda2| exceeds sqrt(2/2.1)");
    if (!(std::abs(mod2 - 2 * s / l1) <= Scalar(1e-10))) flag(s, "|lambda2|^2 != 2 s / lambda1");
    if (!(l1 > prev_l1)) flag(s, "lambda1 not increasing");
    if (!(l1 - Scalar(2.1) * s > prev_gap)) flag(s, "lambda1 - 2.1 s not increasing");
    prev_l1 = l1;
    prev_gap = l1 - Scalar(2.1) * s;
  }
  return rep;
}

template <typename Scalar>
struct ContractionResult {
  int n0 = 0;
  Scalar eps0{};
};

/// Smallest n0 with max_{s in grid} ||M(s)^n0|| < 1 over the uniform grid
/// s_i = s0 * i / grid_points, i = 1..grid_points.
template <typename Scalar>
ContractionResult<Scalar> find_contraction_n0(Scalar s0, int grid_points, int n_limit = 10000) {
  if (!(s0 > 0) || !(s0 < limit_s<Scalar>())) throw std::invalid_argument("s0 must lie in (0, 1/11)");
  if (grid_points < 1) throw std::invalid_argument("need at least one grid point");
  std::vector<Matrix3<Scalar>> base;
  std::vector<Matrix3<Scalar>> power;
  for (int i = 1; i <= grid_points; ++i) {
    base.push_back(companion_matrix(s0 * Scalar(i) / Scalar(grid_points)));
  }
  power = base;
  for (int n = 1; n <= n_limit; ++n) {
    Scalar worst = 0;
    for (const auto& p : power) worst = std::max(worst, spectral_norm(p));
    if (worst < 1) return {n, worst};
    for (std::size_t i = 0; i < power.size(); ++i) power[i] = (base[i] * power[i]).eval();
  }
  std::ostringstream msg;
  msg << "no n0 <= " << n_limit << " contracts M(s) on (0, " << s0 << "]; s0 is too close to 1/11";
  throw std::runtime_error(msg.str());
}

template <typename Scalar>
struct DiagonalizationData {
  using CMatrix = Eigen::Matrix<std::complex<Scalar>, 3, 3>;
  Scalar kappa{};
  Scalar s{};
  Eigen::Matrix<std::complex<Scalar>, 3, 1> eigenvalues;
  CMatrix transform;          // N(s), with M = N^{-1} Lambda N
  CMatrix transform_inverse;  // N(s)^{-1}, columns are unit eigenvectors
  Scalar max_abs_eigenvalue{};
  Scalar condition{};        // ||N|| ||N^{-1}||
  Scalar norm_sum{};         // ||N|| + ||N^{-1}||
  Scalar reconstruction_error{};
};

namespace detail {

template <typename Scalar>
Scalar complex_spectral_norm(const Eigen::Matrix<std::complex<Scalar>, 3, 3>& a) {
  Eigen::JacobiSVD<Eigen::Matrix<std::complex<Scalar>, 3, 3>> svd(a);
  return svd.singularValues()(0);
}

}  // namespace detail

/// Eigendecomposition of M(s) at s = (1 - kappa) / 11.
template <typename Scalar>
DiagonalizationData<Scalar> diagonalize_near_limit(Scalar kappa, Scalar reconstruction_tol = Scalar(1e-10)) {
  if (!(kappa > 0) || !(kappa < 1)) throw std::invalid_argument("kappa must lie in (0, 1)");
  DiagonalizationData<Scalar> d;
  d.kappa = kappa;
  d.s = (1 - kappa) / 11;
  const Matrix3<Scalar> m = companion_matrix(d.s);
  Eigen::EigenSolver<Matrix3<Scalar>> solver(m, true);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigen decomposition failed");
  d.eigenvalues = solver.eigenvalues();
  d.transform_inverse = solver.eigenvectors();
  for (int c = 0; c < 3; ++c) d.transform_inverse.col(c).normalize();
  Eigen::FullPivLU<typename DiagonalizationData<Scalar>::CMatrix> lu(d.transform_inverse);
  if (!lu.isInvertible()) {
    std::ostringstream msg;
    msg << "M(s) is numerically defective at kappa = " << kappa;
    throw std::runtime_error(msg.str());
  }
  d.transform = lu.inverse();
  d.max_abs_eigenvalue = d.eigenvalues.cwiseAbs().maxCoeff();
  const Scalar nn = detail::complex_spectral_norm<Scalar>(d.transform);
  const Scalar ni = detail::complex_spectral_norm<Scalar>(d.transform_inverse);
  d.condition = nn * ni;
  d.norm_sum = nn + ni;
  const auto rebuilt = d.transform_inverse * d.eigenvalues.asDiagonal() * d.transform;
  d.reconstruction_error = (rebuilt - m.template cast<std::complex<Scalar>>()).cwiseAbs().maxCoeff();
  if (!(d.reconstruction_error <= reconstruction_tol)) {
    std::ostringstream msg;
    msg << "reconstruction error " << d.reconstruction_error << " at kappa = " << kappa;
    throw std::runtime_error(msg.str());
  }
  return d;
}

template <typename Scalar>
struct DiagonalizationSweep {
  std::vector<DiagonalizationData<Scalar>> rows;
  Scalar fitted_b1{};  // min over the sweep of (1 - max|lambda|) / kappa
  Scalar fitted_b2{};  // max over the sweep of ||N|| + ||N^{-1}||
  Scalar max_condition{};
  Scalar max_abs_eigenvalue{};
};

/// Log-spaced kappa sweep over [kappa_lo, kappa_hi].
template <typename Scalar>
DiagonalizationSweep<Scalar> sweep_diagonalization(Scalar kappa_lo, Scalar kappa_hi, int count) {
  if (!(kappa_lo > 0) || !(kappa_hi >= kappa_lo) || !(kappa_hi < 1) || count < 1) {
    throw std::invalid_argument("need 0 < kappa_lo <= kappa_hi < 1 and count >= 1");
  }
  DiagonalizationSweep<Scalar> sweep;
  sweep.fitted_b1 = std::numeric_limits<Scalar>::infinity();
  for (int i = 0; i < count; ++i) {
    const Scalar frac = count == 1 ? Scalar(0) : Scalar(i) / Scalar(count - 1);
    const Scalar kappa = kappa_lo * std::pow(kappa_hi / kappa_lo, frac);
    auto d = diagonalize_near_limit(kappa);
    sweep.fitted_b1 = std::min(sweep.fitted_b1, (1 - d.max_abs_eigenvalue) / kappa);
    sweep.fitted_b2 = std::max(sweep.fitted_b2, d.norm_sum);
    sweep.max_condition = std::max(sweep.max_condition, d.condition);
    sweep.max_abs_eigenvalue = std::max(sweep.max_abs_eigenvalue, d.max_abs_eigenvalue);
    sweep.rows.push_back(std::move(d));
  }
  return sweep;
}

}  // namespace mbe::stability
