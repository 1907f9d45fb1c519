#include "mbe/stability_lab.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

using namespace mbe::stability;

namespace {

Matrix3<double> m_squared_closed(double s) {
  Matrix3<double> m;
  m << -9 * s + 324 * s * s, 2 * s - 162 * s * s, 36 * s * s,
       18 * s, -9 * s, 2 * s,
       1, 0, 0;
  return m;
}

Matrix3<double> m_cubed_closed(double s) {
  Matrix3<double> m;
  m << 2 * (1 - 162 * s + 2916 * s * s), 9 * (13 - 324 * s) * s, 18 * s * (-1 + 36 * s),
       9 * (-1 + 36 * s), 2 * (1 - 81 * s), 36 * s,
       18, -9, 2;
  return s * m;
}

}  // namespace

TEST_CASE("companion matrix") {
  const auto m = companion_matrix(limit_s<double>());
  const Eigen::Vector3d ones = Eigen::Vector3d::Ones();
  CHECK((m * ones - ones).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK_THROWS_AS(CompanionMatrix3<double>(0.0), std::invalid_argument);
  CHECK_THROWS_AS(CompanionMatrix3<double>(-0.01), std::invalid_argument);
  CHECK_THROWS_AS(CompanionMatrix3<double>(0.1), std::invalid_argument);
  CHECK_THROWS_AS(CompanionMatrix3<double>(NAN), std::invalid_argument);
}

TEST_CASE("roots near s = 0") {
  const auto r = cubic_roots_eigensolver(1e-12);
  CHECK(std::abs(r.lambda1) <= 1e-3);
  CHECK(std::abs(r.lambda2) <= 1e-3);
  CHECK(std::abs(r.lambda3) <= 1e-3);
}

TEST_CASE("roots at s = 1/11") {
  const auto r = cubic_roots(limit_s<double>());
  const std::complex<double> pair(7.0 / 22.0, std::sqrt(39.0) / 22.0);
  CHECK(std::abs(r.lambda1 - 1.0) <= 1e-10);
  CHECK(std::abs(r.lambda2 - pair) <= 1e-10);
  CHECK(std::abs(r.lambda3 - std::conj(pair)) <= 1e-10);
  CHECK(std::abs(r.lambda2) == doctest::Approx(std::sqrt(22.0) / 11.0).epsilon(1e-12));
  const auto closed = cubic_roots_closed_form(limit_s<double>());
  CHECK(std::abs(closed.lambda1 - 1.0) <= 1e-10);
  CHECK(std::abs(closed.lambda2 - pair) <= 1e-10);
}

TEST_CASE("closed form and eigen solve agree and satisfy the cubic") {
  for (double s : {1e-6, 1e-4, 0.01, 0.05, 0.09}) {
    const auto r = cubic_roots(s);
    const CompanionMatrix3<double> m(s);
    CAPTURE(s);
    for (std::complex<double> l : {std::complex<double>(r.lambda1), r.lambda2, r.lambda3}) {
      CHECK(std::abs(m.characteristic(l)) <= 1e-12 * std::max(1.0, std::pow(std::abs(l), 3)));
    }
    CHECK(r.lambda2.imag() > 0);
    CHECK(r.lambda3 == std::conj(r.lambda2));
    CHECK(std::norm(r.lambda2) * r.lambda1 == doctest::Approx(2 * s).epsilon(1e-10));
  }
}

TEST_CASE("root bounds hold across the sweep") {
  const auto rep = verify_root_bounds(0.09, 10000);
  CHECK(rep.ok());
  for (std::size_t i = 0; i < std::min<std::size_t>(rep.violations.size(), 5); ++i) MESSAGE(rep.violations[i]);
  CHECK(rep.rows.size() == 10000);
  CHECK(rep.modulus_cap == doctest::Approx(0.9759000729485332));
  CHECK(rep.max_abs_lambda2 <= rep.modulus_cap);
  CHECK(rep.realized_lambda_a < 1.0);
  CHECK(rep.max_root_disagreement <= 1e-9);
  CHECK_THROWS_AS(verify_root_bounds(0.1, 10), std::invalid_argument);
}

TEST_CASE("powers match the closed forms") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(1e-6, 1.0 / 11.0);
  double worst2 = 0.0;
  double worst3 = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double s = dist(rng);
    const auto m = companion_matrix(s);
    worst2 = std::max(worst2, (m * m - m_squared_closed(s)).cwiseAbs().maxCoeff());
    worst3 = std::max(worst3, (m * m * m - m_cubed_closed(s)).cwiseAbs().maxCoeff());
  }
  CHECK(worst2 <= 1e-12);
  CHECK(worst3 <= 1e-12);
}

TEST_CASE("power norms") {
  SUBCASE("at s = 1/11 they never drop below one") {
    for (double n : matrix_power_norms(limit_s<double>(), 60)) CHECK(n >= 1.0 - 1e-12);
  }
  SUBCASE("submultiplicative") {
    const auto norms = matrix_power_norms(0.08, 40);
    for (int m = 1; m <= 20; ++m) {
      for (int n = 1; m + n <= 40; ++n) {
        CHECK(norms[m + n - 1] <= norms[m - 1] * norms[n - 1] + 1e-10);
      }
    }
  }
  SUBCASE("decay below 1e-8 for s < 1/11") {
    CHECK(matrix_power_norms(0.05, 200).back() < 1e-8);
    CHECK(matrix_power_norms(0.09, 2000).back() < 1e-8);
  }
  SUBCASE("first entry is the 2-norm from an SVD") {
    const auto m = companion_matrix(0.03);
    Eigen::JacobiSVD<Matrix3<double>> svd(m);
    CHECK(matrix_power_norms(0.03, 1)[0] == doctest::Approx(svd.singularValues()(0)).epsilon(1e-13));
  }
}

TEST_CASE("contraction exponent") {
  const auto tiny = find_contraction_n0(1e-3, 200);
  CHECK(tiny.n0 == 3);
  CHECK(tiny.eps0 <= 0.5);

  const auto mid = find_contraction_n0(0.05, 500);
  CHECK(mid.n0 >= 1);
  CHECK(mid.eps0 < 1.0);
  MESSAGE("s0 = 0.05: n0 = " << mid.n0 << ", eps0 = " << mid.eps0);

  CHECK_THROWS_AS(find_contraction_n0(0.0909, 50, 3), std::runtime_error);
  CHECK_THROWS_AS(find_contraction_n0(1.0 / 11.0, 50), std::invalid_argument);
}

TEST_CASE("diagonalization near s = 1/11") {
  const auto d = diagonalize_near_limit(0.01);
  CHECK(d.max_abs_eigenvalue < 1.0);
  CHECK(d.reconstruction_error <= 1e-10);
  CHECK(d.s == doctest::Approx(0.99 / 11.0));
  const Eigen::Matrix3cd m = companion_matrix(d.s).cast<std::complex<double>>();
  CHECK((d.transform_inverse * d.eigenvalues.asDiagonal() * d.transform - m).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK_THROWS_AS(diagonalize_near_limit(0.0), std::invalid_argument);
  CHECK_THROWS_AS(diagonalize_near_limit(1.0), std::invalid_argument);
}

TEST_CASE("diagonalization sweep") {
  const auto sweep = sweep_diagonalization(1e-4, 0.1, 200);
  CHECK(sweep.rows.size() == 200);
  CHECK(sweep.rows.front().kappa == doctest::Approx(1e-4));
  CHECK(sweep.rows.back().kappa == doctest::Approx(0.1));
  CHECK(sweep.max_abs_eigenvalue < 1.0);
  CHECK(sweep.fitted_b1 > 0.0);
  CHECK(std::isfinite(sweep.fitted_b2));
  CHECK(std::isfinite(sweep.max_condition));
  MESSAGE("B1 = " << sweep.fitted_b1 << ", B2 = " << sweep.fitted_b2 << ", max condition = " << sweep.max_condition);
}
