#include <doctest.h>

#include <cmath>
#include <numbers>

#include "skr/quadrature.hpp"

using namespace skr;

TEST_CASE("gauss_jacobi: weights sum to one and nodes are ordered in (-1, 1)") {
  for (double a : {-0.5, 0.0, 0.5, 4.0, 49.0}) {
    const QuadratureRule r = gauss_jacobi(40, a, a);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      s += r.weights[i];
      CHECK(r.weights[i] > 0.0);
      CHECK(std::abs(r.nodes[i]) < 1.0);
      if (i > 0) CHECK(r.nodes[i] > r.nodes[i - 1]);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("gauss_jacobi: Legendre moments") {
  const QuadratureRule r = gauss_jacobi(10, 0.0, 0.0);
  // E[t^2] = 1/3, E[t^4] = 1/5, E[t^18] = 1/19 under the uniform law on [-1, 1]
  const auto moment = [&](int p) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
    return s;
  };
  CHECK(moment(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(moment(4) == doctest::Approx(1.0 / 5.0).epsilon(1e-14));
  CHECK(moment(18) == doctest::Approx(1.0 / 19.0).epsilon(1e-13));
  CHECK(std::abs(moment(7)) <= 1e-15);
}

TEST_CASE("gauss_jacobi: asymmetric weight moment") {
  // (1-t)^1 on [-1, 1]: E[t] = int t (1-t) / int (1-t) = (-2/3) / 2 = -1/3
  const QuadratureRule r = gauss_jacobi(5, 1.0, 0.0);
  double m = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) m += r.weights[i] * r.nodes[i];
  CHECK(m == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("gauss_jacobi: Chebyshev nodes for alpha = beta = -1/2") {
  const int n = 12;
  const QuadratureRule r = gauss_jacobi(n, -0.5, -0.5);
  for (int i = 0; i < n; ++i) {
    const double expected = -std::cos((2.0 * i + 1.0) * std::numbers::pi / (2.0 * n));
    CHECK(r.nodes[i] == doctest::Approx(expected).epsilon(1e-13));
    CHECK(r.weights[i] == doctest::Approx(1.0 / n).epsilon(1e-12));
  }
}

TEST_CASE("log_sphere_ratio and log_jacobi_mass") {
  // omega_{d-1}/omega_d for d = 2 is 1/2 (uniform t on S^2), for d = 1 it is 1/pi
  CHECK(std::exp(log_sphere_ratio(2)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::exp(log_sphere_ratio(1)) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
  // the ratio normalizes the weight: ratio * mass = 1
  for (int d : {1, 3, 10, 200}) {
    const double a = (d - 2) / 2.0;
    CHECK(log_sphere_ratio(d) + log_jacobi_mass(a, a) == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK(std::exp(log_jacobi_mass(0.0, 0.0)) == doctest::Approx(2.0).epsilon(1e-14));
}
