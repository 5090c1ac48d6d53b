/// Parameter-shift oracle for circuit gradients: exact for Ry generators,
/// two shifted evaluations per parameter. Kept test-side so the adjoint
/// implementation is checked against an independent route.

#pragma once

#include <numbers>
#include <vector>

#include "qpinn/quantum.hpp"

namespace qpinn::test {

inline std::vector<std::vector<double>> parameter_shift_gradient(
    const CircuitSpec& spec, std::vector<double> features,
    std::vector<double> params) {
    const int np = spec.param_count();
    const std::size_t nr = spec.readout.size();
    std::vector<std::vector<double>> grad(nr, std::vector<double>(np, 0.0));
    for (int j = 0; j < np; ++j) {
        const double theta = params[j];
        params[j] = theta + std::numbers::pi / 2;
        const auto plus = run_circuit<double>(spec, features, params);
        params[j] = theta - std::numbers::pi / 2;
        const auto minus = run_circuit<double>(spec, features, params);
        params[j] = theta;
        for (std::size_t k = 0; k < nr; ++k)
            grad[k][j] = 0.5 * (plus[k] - minus[k]);
    }
    return grad;
}

}  // namespace qpinn::test
