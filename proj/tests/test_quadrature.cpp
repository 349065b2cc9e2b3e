#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "barelay/quadrature.hpp"

using namespace barelay;

TEST_CASE("polynomials are integrated exactly") {
  for (int degree = 0; degree <= 20; ++degree) {
    const auto r = integrate([degree](double x) { return std::pow(x, degree); }, 0.0, 2.0);
    CHECK(r.value == doctest::Approx(std::pow(2.0, degree + 1) / (degree + 1)).epsilon(1e-13));
  }
}

TEST_CASE("matches boost Gauss-Kronrod") {
  const auto f = [](double x) { return std::log2(1.0 + x) * std::exp(-x / 3.0) / 3.0; };
  const double ours = integrate(f, 0.0, 120.0).value;
  const double oracle =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, 0.0, 120.0, 30, 1e-14);
  CHECK(ours == doctest::Approx(oracle).epsilon(1e-11));
}

TEST_CASE("peaked and oscillatory integrands") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi).value ==
        doctest::Approx(2.0).epsilon(1e-12));
  const auto r = integrate([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0);
  CHECK(r.value == doctest::Approx(2.0 / 1e-2 * std::atan(1.0 / 1e-2)).epsilon(1e-10));
  CHECK(r.error_estimate < 1e-8);
  CHECK(r.evaluations > 15);
}

TEST_CASE("reversed and empty intervals") {
  const auto f = [](double x) { return x * x; };
  CHECK(integrate(f, 1.0, 0.0).value == doctest::Approx(-1.0 / 3.0));
  CHECK(integrate(f, 2.0, 2.0).value == 0.0);
}

TEST_CASE("budget exhaustion raises") {
  QuadratureOptions options;
  options.max_intervals = 3;
  options.abs_tolerance = 0.0;
  options.rel_tolerance = 1e-15;
  CHECK_THROWS_AS(integrate([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, options),
                  QuadratureError);
  try {
    integrate([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, options);
  } catch (const QuadratureError& e) {
    CHECK(e.error_estimate() > 0.0);
    CHECK(std::isfinite(e.value()));
  }
}
