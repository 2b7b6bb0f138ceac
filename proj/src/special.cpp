#include "mbseries/special.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace mb {

namespace {

// B_{2j} for j = 1..13
constexpr std::array<double, 13> kBern = {
    1.0 / 6.0,          -1.0 / 30.0,          1.0 / 42.0,        -1.0 / 30.0,
    5.0 / 66.0,         -691.0 / 2730.0,      7.0 / 6.0,         -3617.0 / 510.0,
    43867.0 / 798.0,    -174611.0 / 330.0,    854513.0 / 138.0,  -236364091.0 / 2730.0,
    8553103.0 / 6.0};

constexpr double kHalfLog2Pi = 0.918938533204672741780329736405617640;

cplx stirling(cplx z) {
    cplx r = (z - 0.5) * std::log(z) - z + kHalfLog2Pi;
    cplx zi = 1.0 / z;
    cplx z2 = zi * zi;
    cplx p = zi;
    for (int j = 1; j <= 10; ++j) {
        r += kBern[j - 1] / (2.0 * j * (2.0 * j - 1.0)) * p;
        p *= z2;
    }
    return r;
}

}  // namespace

bool is_nonpositive_integer(double x, double tol) {
    if (x > tol) return false;
    return std::abs(x - std::round(x)) <= tol;
}

cplx log_sin_pi(cplx z) {
    const cplx I(0.0, 1.0);
    double y = z.imag();
    if (y > 5.0) {
        // sin(pi z) = e^{-i pi z} (e^{2 i pi z} - 1) / (2i)
        return -I * kPi * z + std::log((std::exp(2.0 * I * kPi * z) - 1.0) / (2.0 * I));
    }
    if (y < -5.0) {
        return I * kPi * z + std::log((1.0 - std::exp(-2.0 * I * kPi * z)) / (2.0 * I));
    }
    return std::log(std::sin(kPi * z));
}

cplx lgamma_c(cplx z) {
    if (z.imag() == 0.0 && is_nonpositive_integer(z.real()))
        throw std::domain_error("lgamma: pole at non-positive integer");
    if (z.real() < 0.5) {
        // reflection
        return std::log(kPi) - log_sin_pi(z) - lgamma_c(1.0 - z);
    }
    cplx acc = 0.0;
    cplx prod = 1.0;
    int count = 0;
    while (std::abs(z) < 8.0) {
        prod *= z;
        z += 1.0;
        if (++count == 8) {
            acc += std::log(prod);
            prod = 1.0;
            count = 0;
        }
    }
    acc += std::log(prod);
    return stirling(z) - acc;
}

cplx gamma_c(cplx z) { return std::exp(lgamma_c(z)); }

cplx polygamma(int k, cplx z) {
    if (k < 0) throw std::invalid_argument("polygamma: negative order");
    if (z.imag() == 0.0 && is_nonpositive_integer(z.real()))
        throw std::domain_error("polygamma: pole at non-positive integer");
    // (-1)^{k+1} k!
    double kfact = std::tgamma(k + 1.0);
    double sgn = (k % 2 == 0) ? -1.0 : 1.0;
    cplx shift = 0.0;
    const double target = 20.0 + k;
    while (z.real() < target) {
        shift += 1.0 / std::pow(z, k + 1);
        z += 1.0;
    }
    // psi^{(k)}(z) = psi^{(k)}(z+1) + (-1)^{k+1} k! / z^{k+1}
    cplx rec = sgn * kfact * shift;
    cplx zi = 1.0 / z;
    cplx z2 = zi * zi;
    cplx asym;
    if (k == 0) {
        asym = std::log(z) - 0.5 * zi;
        cplx p = z2;
        for (int j = 1; j <= 12; ++j) {
            asym -= kBern[j - 1] / (2.0 * j) * p;
            p *= z2;
        }
    } else {
        // (-1)^{k+1} [ (k-1)!/z^k + k!/(2 z^{k+1}) + sum B_{2j} (2j+k-1)!/((2j)! z^{2j+k}) ]
        cplx zk = std::pow(zi, k);
        cplx s = std::tgamma(static_cast<double>(k)) * zk + 0.5 * kfact * zk * zi;
        cplx p = zk * z2;
        for (int j = 1; j <= 12; ++j) {
            double c = std::exp(std::lgamma(2.0 * j + k) - std::lgamma(2.0 * j + 1.0));
            cplx t = kBern[j - 1] * c * p;
            s += t;
            if (std::abs(t) < 1e-18 * std::abs(s)) break;
            p *= z2;
        }
        asym = sgn * s;
    }
    return asym + rec;
}

double polygamma(int k, double x) { return polygamma(k, cplx(x, 0.0)).real(); }

double lgamma_signed(double x, int& sign) {
    if (is_nonpositive_integer(x)) throw std::domain_error("lgamma: pole at non-positive integer");
    double v = std::lgamma(x);
    if (x > 0) {
        sign = 1;
    } else {
        // Gamma(x) for x in (-n-1,-n) has sign (-1)^{n+1}
        double f = std::floor(x);
        sign = (static_cast<long long>(-f) % 2 == 1) ? -1 : 1;
    }
    return v;
}

}  // namespace mb
