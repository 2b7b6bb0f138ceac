#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mbseries/geometry.hpp"

namespace testsupport {

inline std::string data(const std::string& name) { return std::string(MB_DATA_DIR) + "/" + name; }

using Pred2 = std::function<bool(double, double)>;

// Closed-form regions in the reference numbering, as functions of two magnitudes.
// R_{-1}: (u1, u2).
inline std::vector<Pred2> r1_regions() {
    return {[](double a, double b) { return a + b < 1; },
            [](double a, double b) { return b < 1 && b + 1 < a; },
            [](double a, double b) { return a > 1 && b > 1 && a + 1 < b; },
            [](double a, double b) { return a < 1 && a + 1 < b; },
            [](double a, double b) { return a > 1 && b > 1 && b + 1 < a; }};
}

// R_{-1-z1} at u3 = 1: (u1, u2).
inline std::vector<Pred2> r1z1_regions() {
    auto s = [](double b) { return b >= 1 ? 1 + std::sqrt(1 - 1 / b) : -1.0; };
    return {[](double a, double b) { return b < 1 && a + 2 * std::sqrt(a * b) < 1; },
            [](double a, double b) { return b < 1 && 1 / a + 2 * std::sqrt(b / a) < 1; },
            [=](double a, double b) { return std::sqrt(a / b) < s(b) && std::sqrt(1 / (a * b)) < s(b); },
            [=](double a, double b) { return std::sqrt(a / b) < s(b) && a + 2 * std::sqrt(a * b) < 1; },
            [=](double a, double b) { return std::sqrt(1 / (a * b)) < s(b) && 1 / a + 2 * std::sqrt(b / a) < 1; }};
}

// box with x = t/m^2, y = t/s, so m^2/t = 1/x, s/t = 1/y, m^2/s = y/x
inline std::vector<Pred2> box_regions() {
    return {[](double x, double y) { return 1 / x + 1 / y < 1 && y / x < 1; },
            [](double x, double y) { return x + x / y < 1; },
            [](double x, double y) { return y / x + y < 1 && x < 1; },
            [](double x, double y) { return 1 / x + 1 / y < 1 && x / y < 1; },
            [](double x, double y) { return y / x + y < 1 && 1 / x < 1; }};
}

// cone id (angle order) -> reference number
inline const std::vector<int> kR1Ref{1, 2, 5, 3, 4};
inline const std::vector<int> kR1z1Ref{1, 2, 5, 3, 4};
inline const std::vector<int> kBoxRef{1, 4, 2, 3, 5};

inline int local_id(const std::vector<int>& ref, int reference) {
    for (std::size_t i = 0; i < ref.size(); ++i)
        if (ref[i] == reference) return static_cast<int>(i) + 1;
    return -1;
}

// true when the predicate is constant on a circle of radius `band`
inline bool stable(const Pred2& p, double a, double b, double band) {
    bool ref = p(a, b);
    for (int k = 0; k < 16; ++k) {
        double th = k * M_PI / 8;
        if (p(a + band * std::cos(th), b + band * std::sin(th)) != ref) return false;
    }
    return true;
}

// numeric pole set of a list of families, indices up to n
inline std::set<std::pair<long, long>> point_set(const std::vector<mb::IndexedFamily>& fams, int n, double eps,
                                                 double window, bool spurious = false) {
    std::set<std::pair<long, long>> out;
    for (auto& f : fams) {
        if (f.spurious != spurious) continue;
        const int a = f.arity();
        mb::IVec k(a, 0);
        for (;;) {
            auto p = f.point(k);
            double x = p[0].at(eps), y = p[1].at(eps);
            if (std::abs(x) <= window && std::abs(y) <= window)
                out.insert({std::lround(x * 1000), std::lround(y * 1000)});
            int i = 0;
            while (i < a && ++k[i] > n) k[i++] = 0;
            if (i >= a) break;
        }
    }
    return out;
}

// explicit family listing -> point set, with p(m, n)
inline std::set<std::pair<long, long>> listing(const std::vector<std::function<std::pair<double, double>(int, int)>>& fs,
                                               int n, double window) {
    std::set<std::pair<long, long>> out;
    for (auto& f : fs)
        for (int m = 0; m <= n; ++m)
            for (int k = 0; k <= n; ++k) {
                auto [x, y] = f(m, k);
                if (std::abs(x) <= window && std::abs(y) <= window)
                    out.insert({std::lround(x * 1000), std::lround(y * 1000)});
            }
    return out;
}

// Lanczos (g = 7, n = 9) complex gamma, independent of the library's Stirling path.
inline std::complex<double> lanczos_gamma(std::complex<double> z) {
    static const double c[] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                               771.32342877765313,   -176.61502916214059,   12.507343278686905,
                               -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (z.real() < 0.5) return M_PI / (std::sin(M_PI * z) * lanczos_gamma(1.0 - z));
    z -= 1.0;
    std::complex<double> x = c[0];
    for (int i = 1; i < 9; ++i) x += c[i] / (z + static_cast<double>(i));
    std::complex<double> t = z + 7.5;
    return std::sqrt(2 * M_PI) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

// zero-dimensional phi^4 generating functional by direct integration
inline double z0_direct(double lambda) {
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [&](double phi) { return std::exp(-0.5 * phi * phi - lambda / 24.0 * phi * phi * phi * phi); };
    return 2.0 * integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity()) / std::sqrt(2 * M_PI);
}

// convergent large-mass expansion of the vacuum polarisation moment (r >= 1)
inline double al_right_series(double r, int terms = 400) {
    double s = 0;
    double lr = std::log(r);
    for (int n = 0; n < terms; ++n) {
        double a = 3.0 + n, b = 3.0 + 2 * n, c = 5.0 + 2 * n;
        double den = a * b * c;
        s += std::pow(1 / r, n + 1) * ((45.0 - 28.0 * n * n - 8.0 * n * n * n) / (den * den) - n / den * lr);
    }
    return s;
}

// regular part of the R-1 integrand at (-1,-1): integrand * w1 w2 (w1+w2)
inline std::complex<double> h_r1(std::complex<double> w1, std::complex<double> w2, double u1, double u2) {
    auto G = lanczos_gamma;
    std::complex<double> s = w1 + w2;
    std::complex<double> z1 = -1.0 + w1, z2 = -1.0 + w2;
    auto pole = [&](std::complex<double> w) { return -G(1.0 + w) * G(1.0 - w) / G(2.0 - w); };  // w * Gamma(-1+w)
    return -G(-z1) * G(-z1) * pole(w1) * G(-z2) * G(-z2) * pole(w2) * pole(s) * std::pow(std::complex<double>(u1), z1) *
           std::pow(std::complex<double>(u2), z2);
}

// Taylor coefficient by the trapezoid rule on a torus
using CFun2 = std::function<std::complex<double>(std::complex<double>, std::complex<double>)>;

inline std::complex<double> taylor2(const CFun2& f, int i, int j, double r = 0.3, int N = 64) {
    std::complex<double> acc = 0;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            std::complex<double> e1 = std::polar(1.0, 2 * M_PI * a / N), e2 = std::polar(1.0, 2 * M_PI * b / N);
            acc += f(r * e1, r * e2) / (std::pow(r * e1, i) * std::pow(r * e2, j));
        }
    return acc / static_cast<double>(N * N);
}

}  // namespace testsupport
