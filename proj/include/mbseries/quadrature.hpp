#pragma once

#include <optional>
#include <vector>

#include "mbseries/model.hpp"

namespace mb {

struct QuadratureResult {
    cplx value;
    double error_estimate = 0.0;
    double truncation_T = 0.0;
    long nodes_used = 0;
};

// gauss_legendre: tensor panels in y = s sinh(t), refined globally.
// double_exponential: tensor trapezoid in y = s sinh(pi/2 sinh(t)).
// gauss_kronrod: nested adaptive (boost), practical for 1 and 2 dimensions.
enum class QuadratureRule { gauss_legendre, double_exponential, gauss_kronrod };

struct QuadratureOptions {
    double tol = 1e-9;
    QuadratureRule rule = QuadratureRule::gauss_legendre;
    std::optional<std::vector<double>> base;  // contour override (real parts)
};

// Direct integration along Re z = base, 1 <= dimension <= 3.
QuadratureResult mb_quadrature(const MBSpec& spec, const ParamMap& params, double eps, const QuadratureOptions& opt);
QuadratureResult mb_quadrature(const MBSpec& spec, const ParamMap& params, double eps, double tol);

}  // namespace mb
