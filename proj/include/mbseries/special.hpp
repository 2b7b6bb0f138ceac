#pragma once

#include <complex>

namespace mb {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kEulerGamma = 0.577215664901532860606512090082402431;

// log Gamma up to an additive multiple of 2*pi*i; good for exp() of sums.
cplx lgamma_c(cplx z);
cplx gamma_c(cplx z);
// log(sin(pi z)) without overflow for large |Im z|, same branch caveat.
cplx log_sin_pi(cplx z);

// psi^{(k)}(z) by upward recurrence and the asymptotic series.
cplx polygamma(int k, cplx z);
double polygamma(int k, double x);

// log|Gamma(x)| and sign of Gamma(x) for real non-pole x
double lgamma_signed(double x, int& sign);

bool is_nonpositive_integer(double x, double tol = 0.0);

}  // namespace mb
