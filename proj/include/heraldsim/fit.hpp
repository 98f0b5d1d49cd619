#pragma once

#include <cmath>
#include <vector>

namespace heraldsim {

struct GaussianFit {
    double amplitude = 0.0;
    double center = 0.0;
    double sigma = 0.0;
    double offset = 0.0;
    bool converged = false;

    double fwhm() const { return 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma; }
};

/// Least-squares fit of y = A*exp(-(x-mu)^2/(2 sigma^2)) + c by
/// Levenberg-damped Gauss-Newton, seeded from the data extremum and moment
/// width. Used for delay-scan peak characterization.
GaussianFit fit_gaussian(const std::vector<double>& x, const std::vector<double>& y);

} // namespace heraldsim
