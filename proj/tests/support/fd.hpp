/// Finite-difference oracles used across the test suites. These stay
/// independent of the tape/dual implementation they are checking: everything
/// here works on plain double-valued callables.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace qpinn::test {

inline double fd_first(const std::function<double(double)>& f, double x,
                       double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double fd_second(const std::function<double(double)>& f, double x,
                        double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

/// Central-difference gradient of a multivariate callable.
inline std::vector<double> fd_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double fp = f(x);
        x[i] = x0 - h;
        const double fm = f(x);
        x[i] = x0;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// |a-b| relative to the larger magnitude, with an absolute floor so that
/// near-zero pairs do not blow the ratio up on finite-difference noise.
inline double mixed_err(double a, double b, double floor_) {
    return std::abs(a - b) / (std::max(std::abs(a), std::abs(b)) + floor_);
}

}  // namespace qpinn::test
