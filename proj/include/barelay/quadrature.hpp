#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace barelay {

struct QuadratureOptions {
  double abs_tolerance = 1e-11;
  double rel_tolerance = 1e-12;
  int max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double value, double error_estimate)
      : std::runtime_error(what), value_(value), error_estimate_(error_estimate) {}
  double value() const { return value_; }
  double error_estimate() const { return error_estimate_; }

 private:
  double value_;
  double error_estimate_;
};

// Globally adaptive 7/15-point Gauss-Kronrod integration over a finite
// interval [a, b]. The interval with the largest error estimate is bisected
// until the total estimate meets max(abs_tolerance, rel_tolerance * |I|).
// Throws QuadratureError when the interval budget runs out.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureOptions& options = {});

}  // namespace barelay
