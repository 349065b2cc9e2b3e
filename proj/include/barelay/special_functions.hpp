#pragma once

namespace barelay {

inline constexpr double kEulerMascheroni = 0.57721566490153286060651209008240243;

// First-order exponential integral E1(x) = integral_1^inf exp(-x t) / t dt.
// Throws std::domain_error for x <= 0 or non-finite x.
double exp_integral_e1(double x);

// exp(x) * E1(x), evaluated without forming exp(x); finite for all x > 0.
double scaled_exp_integral_e1(double x);

}  // namespace barelay
