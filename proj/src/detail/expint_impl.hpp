#pragma once

// Generic kernel for exp(x) * E1(x), shared by the double and the
// extended-precision closed forms.

#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/constants/constants.hpp>

namespace barelay::detail {

inline constexpr int kMaxExpintTerms = 100000;

// E1(x) = -gamma - ln x + sum_{n>=1} (-1)^{n+1} x^n / (n n!), used for x < 1.
template <typename T>
T e1_series(const T& x) {
  using std::abs;
  using std::log;
  const T eps = std::numeric_limits<T>::epsilon();
  T term = x;  // (-1)^{n+1} x^n / n!
  T sum = x;
  for (int n = 2; n < kMaxExpintTerms; ++n) {
    term *= -x / T(n);
    const T contrib = term / T(n);
    sum += contrib;
    if (abs(contrib) <= eps * abs(sum)) break;
  }
  return -boost::math::constants::euler<T>() - log(x) + sum;
}

template <typename T>
T scaled_e1(const T& x) {
  using std::abs;
  using std::exp;
  const T eps = std::numeric_limits<T>::epsilon();

  if (x < T(1)) return exp(x) * e1_series(x);

  // Modified Lentz evaluation of the continued fraction
  // exp(x) E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...))).
  const T tiny = std::numeric_limits<T>::min() / eps;
  T b = x + T(1);
  T c = T(1) / tiny;
  T d = T(1) / b;
  T h = d;
  for (int i = 1; i < kMaxExpintTerms; ++i) {
    const T a = -T(i) * T(i);
    b += T(2);
    d = T(1) / (a * d + b);
    c = b + a / c;
    const T del = c * d;
    h *= del;
    if (abs(del - T(1)) <= eps) return h;
  }
  throw std::runtime_error("exponential integral continued fraction did not converge");
}

}  // namespace barelay::detail
