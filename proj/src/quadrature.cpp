#include "mbseries/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>

#include "mbseries/special.hpp"

namespace mb {

namespace {

constexpr double kMaxT = 400.0;

struct Integrand {
    const MBSpec& spec;
    const ParamMap& params;
    double eps;
    std::vector<double> base;
    long calls = 0;

    cplx operator()(const std::vector<double>& y) {
        ++calls;
        CVec z(base.size());
        for (std::size_t i = 0; i < base.size(); ++i) z[i] = cplx(base[i], y[i]);
        cplx l = log_integrand(spec, z, params, eps);
        if (l.real() < -700) return {};
        return std::exp(l);
    }
};

// Radius beyond which |f| stays below `floor` on the sampled directions.
double truncation(Integrand& f, double floor) {
    const int n = static_cast<int>(f.base.size());
    std::vector<std::vector<double>> dirs;
    for (int mask = 1; mask < (1 << n); ++mask)
        for (int signs = 0; signs < (1 << n); ++signs) {
            if (signs & ~mask) continue;
            std::vector<double> d(n, 0.0);
            for (int i = 0; i < n; ++i)
                if (mask & (1 << i)) d[i] = (signs & (1 << i)) ? -1.0 : 1.0;
            dirs.push_back(d);
        }
    auto peak = [&](double r) {
        double m = 0;
        for (auto& d : dirs) {
            std::vector<double> y(n);
            for (int i = 0; i < n; ++i) y[i] = r * d[i];
            m = std::max(m, std::abs(f(y)));
        }
        return m;
    };
    double T = 2.0;
    // two consecutive radii below the floor to skip accidental zeros
    while (T < kMaxT && (peak(T) > floor || peak(1.5 * T) > floor)) T *= 1.5;
    if (T >= kMaxT)
        throw MathError("integrand does not decay along the contour; the convergence condition |arg x| < pi*alpha/2 "
                        "is violated for these parameters");
    return T;
}

// distance (per axis, in Im y) to the nearest complex singularity of the integrand
std::vector<double> singularity_scales(const MBSpec& spec, const std::vector<double>& base, double eps) {
    const int n = spec.dimension;
    std::vector<double> sc(n, 1e300);
    auto visit = [&](const LinearForm& form) {
        double lam = std::abs(form.at(base, eps));
        for (int i = 0; i < n; ++i)
            if (form.coeffs[i] != 0) sc[i] = std::min(sc[i], lam / std::abs(static_cast<double>(form.coeffs[i])));
    };
    for (auto& g : spec.gammas)
        if (g.power > 0) visit(g.form);
    for (auto& m : spec.monomials) visit(m.form);
    for (auto& s : sc) s = std::clamp(s, 1e-3, 1.0);
    return sc;
}

struct Node {
    double y, w;
};

std::vector<Node> gl_nodes(double s, double L, double width) {
    using GL = boost::math::quadrature::gauss<double, 10>;
    const auto& x = GL::abscissa();
    const auto& wt = GL::weights();
    int panels = std::max(1, static_cast<int>(std::ceil(2 * L / width)));
    double h = 2 * L / panels;
    std::vector<Node> out;
    for (int p = 0; p < panels; ++p) {
        double mid = -L + (p + 0.5) * h;
        for (std::size_t k = 0; k < x.size(); ++k)
            for (int sgn : {-1, 1}) {
                if (x[k] == 0.0 && sgn < 0) continue;
                double t = mid + sgn * x[k] * h / 2;
                out.push_back({s * std::sinh(t), wt[k] * h / 2 * s * std::cosh(t)});
            }
    }
    return out;
}

std::vector<Node> de_nodes(double s, double T, double h) {
    double tmax = std::asinh(std::asinh(T / s) * 2 / kPi);
    int K = static_cast<int>(std::ceil(tmax / h));
    std::vector<Node> out;
    for (int k = -K; k <= K; ++k) {
        double t = k * h;
        double u = kPi / 2 * std::sinh(t);
        out.push_back({s * std::sinh(u), h * s * std::cosh(u) * kPi / 2 * std::cosh(t)});
    }
    return out;
}

cplx tensor_sum(Integrand& f, const std::vector<std::vector<Node>>& axes) {
    const int n = static_cast<int>(axes.size());
    std::vector<double> y(n);
    std::function<cplx(int, double)> rec = [&](int d, double w) -> cplx {
        cplx acc = 0;
        for (auto& nd : axes[d]) {
            y[d] = nd.y;
            acc += d + 1 == n ? f(y) * (w * nd.w) : rec(d + 1, w * nd.w);
        }
        return acc;
    };
    return rec(0, 1.0);
}

}  // namespace

QuadratureResult mb_quadrature(const MBSpec& spec, const ParamMap& params, double eps, const QuadratureOptions& opt) {
    const int n = spec.dimension;
    if (n < 1 || n > 3) throw MathError("quadrature supports dimensions 1 to 3");
    Integrand f{spec, params, eps, opt.base ? *opt.base : spec.base_point_d()};
    if (static_cast<int>(f.base.size()) != n) throw MathError("contour base has the wrong dimension");
    const double scale = std::abs(f(std::vector<double>(n, 0.0)));
    const double floor = opt.tol * 1e-3 * std::max(scale, 1e-300);
    const double T = truncation(f, floor);
    // y_i = s_i sinh(t): the nearest complex singularity along axis i sits at
    // distance s_i, which the map moves out to Im t = pi/2
    const auto sc = singularity_scales(spec, f.base, eps);
    const double norm = std::pow(2.0 * kPi, n);

    QuadratureResult res;
    res.truncation_T = T;
    double tail = floor * std::pow(2 * T, n) / norm;
    if (opt.rule == QuadratureRule::gauss_kronrod) {
        std::vector<double> y(n, 0.0);
        double err_sum = 0.0;
        std::function<cplx(int)> level = [&](int d) -> cplx {
            auto mapped = [&](double t) {
                y[d] = sc[d] * std::sinh(t);
                return (d + 1 == n ? f(y) : level(d + 1)) * (sc[d] * std::cosh(t));
            };
            double err = 0.0;
            double L = std::asinh(T / sc[d]);
            cplx r = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(mapped, -L, L, 12, opt.tol, &err);
            if (d == 0) err_sum += err;
            return r;
        };
        res.value = level(0) / norm;
        res.error_estimate = err_sum / norm + tail;
        res.nodes_used = f.calls;
        return res;
    }
    // global refinement until two successive tensor rules agree
    cplx prev;
    bool have = false;
    double width = 1.6, h = 0.4;
    for (int level = 0; level < 6; ++level) {
        std::vector<std::vector<Node>> axes;
        for (int i = 0; i < n; ++i)
            axes.push_back(opt.rule == QuadratureRule::gauss_legendre ? gl_nodes(sc[i], std::asinh(T / sc[i]), width)
                                                                       : de_nodes(sc[i], T, h));
        cplx v = tensor_sum(f, axes) / norm;
        if (have) {
            double diff = std::abs(v - prev);
            res.value = v;
            res.error_estimate = diff + tail;
            if (diff <= opt.tol * std::max(1.0, std::abs(v))) break;
        }
        prev = v;
        have = true;
        width /= 2;
        h /= 2;
    }
    res.nodes_used = f.calls;
    return res;
}

QuadratureResult mb_quadrature(const MBSpec& spec, const ParamMap& params, double eps, double tol) {
    QuadratureOptions o;
    o.tol = tol;
    return mb_quadrature(spec, params, eps, o);
}

}  // namespace mb
