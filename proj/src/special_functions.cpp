#include "barelay/special_functions.hpp"

#include <cmath>
#include <stdexcept>

#include "detail/expint_impl.hpp"

namespace barelay {

namespace {

void require_positive(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::domain_error("exponential integral needs a finite positive argument");
}

}  // namespace

double scaled_exp_integral_e1(double x) {
  require_positive(x);
  return detail::scaled_e1(x);
}

double exp_integral_e1(double x) {
  require_positive(x);
  if (x < 1.0) return detail::e1_series(x);
  return std::exp(-x) * detail::scaled_e1(x);
}

}  // namespace barelay
