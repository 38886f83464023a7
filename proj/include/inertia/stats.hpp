// Least-squares fits used by the convergence and tracking diagnostics.
#pragma once

#include <vector>

namespace inertia {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares y = slope x + intercept; needs two distinct x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Slope of log y against log x; all entries must be positive.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace inertia
