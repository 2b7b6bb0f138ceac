#include "mbseries/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>

#include "mbseries/special.hpp"

namespace mb {

namespace {

constexpr double kTol = 1e-9;

double dot(const IVec& a, const std::vector<double>& x) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * x[i];
    return s;
}

std::vector<double> numeric(const EVec& p, double eps) {
    std::vector<double> r;
    for (auto& v : p) r.push_back(v.at(eps));
    return r;
}

std::int64_t det2(const IVec& a, const IVec& b) { return a[0] * b[1] - a[1] * b[0]; }

std::int64_t det3(const IVec& a, const IVec& b, const IVec& c) {
    return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
}

std::int64_t det_rows(const std::vector<IVec>& rows) {
    switch (rows.size()) {
        case 1: return rows[0][0];
        case 2: return det2(rows[0], rows[1]);
        case 3: return det3(rows[0], rows[1], rows[2]);
        default: break;
    }
    throw std::logic_error("determinant: unsupported size");
}

// exact inverse of a small integer matrix
std::optional<std::vector<RVec>> inverse(const std::vector<IVec>& rows) {
    const std::size_t n = rows.size();
    std::vector<RVec> m(n, RVec(2 * n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m[i][j] = Rational(rows[i][j]);
        m[i][n + i] = Rational(1);
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && m[piv][c].is_zero()) ++piv;
        if (piv == n) return std::nullopt;
        std::swap(m[c], m[piv]);
        Rational inv = Rational(1) / m[c][c];
        for (auto& x : m[c]) x *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || m[r][c].is_zero()) continue;
            Rational f = m[r][c];
            for (std::size_t k = 0; k < 2 * n; ++k) m[r][k] -= f * m[c][k];
        }
    }
    std::vector<RVec> inv(n, RVec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = m[i][n + j];
    return inv;
}

bool parallel(const IVec& a, const IVec& b) {
    // a and b proportional (any sign)
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (a[i] * b[j] - a[j] * b[i] != 0) return false;
    return true;
}

int matrix_rank(std::vector<std::vector<double>> m) {
    int rank = 0;
    const std::size_t cols = m.empty() ? 0 : m[0].size();
    for (std::size_t c = 0; c < cols && rank < static_cast<int>(m.size()); ++c) {
        std::size_t piv = rank;
        for (std::size_t r = rank; r < m.size(); ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        if (std::abs(m[piv][c]) < 1e-12) continue;
        std::swap(m[rank], m[piv]);
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (r == static_cast<std::size_t>(rank)) continue;
            double f = m[r][c] / m[rank][c];
            for (std::size_t k = 0; k < cols; ++k) m[r][k] -= f * m[rank][k];
        }
        ++rank;
    }
    return rank;
}

int normals_rank(const std::vector<IVec>& normals) {
    std::vector<std::vector<double>> m;
    for (auto& v : normals) m.emplace_back(v.begin(), v.end());
    return matrix_rank(m);
}

struct FormKey {
    IVec a;
    EpsAffine b;
    friend auto operator<=>(const FormKey&, const FormKey&) = default;
};

// Solve rows * z = rhs exactly.
EVec solve(const std::vector<RVec>& inv, const EVec& rhs) {
    EVec z(inv.size());
    for (std::size_t i = 0; i < inv.size(); ++i)
        for (std::size_t j = 0; j < inv.size(); ++j) z[i] += rhs[j] * inv[i][j];
    return z;
}

std::string sense_str(HalfSpace::Sense s) { return s == HalfSpace::Sense::greater ? " > " : " < "; }

// exact vertices of {form > 0} valid at eps
std::vector<EVec> polytope_vertices(const std::vector<HalfSpace>& all, int n, double eps) {
    std::set<EVec> out;
    std::vector<int> pick(n);
    std::function<void(int, int)> rec = [&](int depth, int start) {
        if (depth == n) {
            std::vector<IVec> rows;
            for (int j : pick) rows.push_back(all[j].form.coeffs);
            auto inv = inverse(rows);
            if (!inv) return;
            EVec rhs;
            for (int j : pick) rhs.push_back(-all[j].form.offset);
            EVec p = solve(*inv, rhs);
            auto v = numeric(p, eps);
            for (auto& h : all)
                if (h.form.at(v, eps) < -kTol) return;
            out.insert(p);
            return;
        }
        for (int s = start; s < static_cast<int>(all.size()); ++s) {
            pick[depth] = s;
            rec(depth + 1, s + 1);
        }
    };
    rec(0, 0);
    return {out.begin(), out.end()};
}

std::vector<HalfSpace> pole_halfspaces(const MBSpec& spec, const Setting& st) {
    auto nf = normalize(spec, st);
    std::vector<HalfSpace> all;
    std::set<FormKey> seen;
    for (auto& f : nf.factors) {
        if (!f.pole_bearing()) continue;
        auto g = gcd_all(f.a);
        FormKey key{primitive(f.a), f.b * Rational(1, g)};
        if (!seen.insert(key).second) continue;
        all.push_back({{f.a, f.b}, HalfSpace::Sense::greater});
    }
    return all;
}

}  // namespace

Setting default_setting(const MBSpec& spec) { return {spec.eps_value(), spec.base_point_d()}; }

EpsAffine NFactor::at(const EVec& z) const {
    EpsAffine r = b;
    for (std::size_t i = 0; i < a.size(); ++i) r += z[i] * Rational(a[i]);
    return r;
}

double NFactor::at(const std::vector<double>& z, double eps) const { return b.at(eps) + dot(a, z); }

Normalized normalize(const MBSpec& spec, const Setting& st) {
    Normalized nf;
    nf.dimension = spec.dimension;
    std::vector<NFactor> raw;
    auto push_linear = [&](IVec a, EpsAffine b, int power, int source, bool mono) {
        double v = b.at(st.eps) + dot(a, st.base);
        if (std::abs(v) < kTol) throw MathError("a linear factor vanishes at the base point");
        if (v < 0) {
            for (auto& x : a) x = -x;
            b = -b;
            if (power % 2 != 0) nf.sign = -nf.sign;
        }
        raw.push_back({std::move(a), b, power, false, source, mono});
    };
    for (std::size_t k = 0; k < spec.gammas.size(); ++k) {
        const auto& g = spec.gammas[k];
        double sigma = g.form.at(st.base, st.eps);
        if (sigma > kTol) {
            raw.push_back({g.form.coeffs, g.form.offset, g.power, true, static_cast<int>(k), false});
            continue;
        }
        if (is_nonpositive_integer(sigma, kTol)) throw MathError("gamma argument is a pole at the base point");
        // Gamma(L) = Gamma(L+K) / prod_{j<K} (L+j)
        auto K = static_cast<std::int64_t>(std::floor(-sigma)) + 1;
        raw.push_back({g.form.coeffs, g.form.offset + EpsAffine(Rational(K)), g.power, true, static_cast<int>(k), false});
        for (std::int64_t j = 0; j < K; ++j)
            push_linear(g.form.coeffs, g.form.offset + EpsAffine(Rational(j)), -g.power, static_cast<int>(k), false);
    }
    for (std::size_t k = 0; k < spec.monomials.size(); ++k) {
        const auto& m = spec.monomials[k];
        push_linear(m.form.coeffs, m.form.offset, m.exponent, static_cast<int>(k), true);
    }
    // merge identical factors
    for (auto& f : raw) {
        auto it = std::find_if(nf.factors.begin(), nf.factors.end(),
                               [&](const NFactor& g) { return g.gamma == f.gamma && g.a == f.a && g.b == f.b; });
        if (it == nf.factors.end()) nf.factors.push_back(f);
        else it->power += f.power;
    }
    std::erase_if(nf.factors, [](const NFactor& f) { return f.power == 0; });
    return nf;
}

MBSpec to_spec(const MBSpec& like, const Normalized& nf) {
    MBSpec s = like;
    s.gammas.clear();
    s.monomials.clear();
    for (auto& f : nf.factors) {
        if (f.gamma) s.gammas.push_back({{f.a, f.b}, f.power});
        else s.monomials.push_back({{f.a, f.b}, f.power});
    }
    if (nf.sign < 0) s.constant = ConstExpr::parse("-(" + like.constant.text() + ")");
    return s;
}

PointInfo analyze_point(const Normalized& nf, const EVec& p, const Setting& st) {
    PointInfo info;
    info.point = p;
    std::vector<std::pair<IVec, Divisor>> groups;
    for (std::size_t j = 0; j < nf.factors.size(); ++j) {
        const auto& f = nf.factors[j];
        EpsAffine lam = f.at(p);
        if (lam.has_eps()) continue;
        bool hit = f.gamma ? (lam.c.is_integer() && lam.c.sign() <= 0) : lam.c.is_zero();
        if (!hit) continue;
        info.active.push_back(static_cast<int>(j));
        info.levels[static_cast<int>(j)] = f.gamma ? -lam.c.num() : 0;
        IVec n = primitive(f.a);
        int contrib = f.gamma ? f.power : -f.power;
        auto it = std::find_if(groups.begin(), groups.end(), [&](auto& g) { return g.first == n; });
        if (it == groups.end()) {
            Divisor d;
            d.normal = n;
            d.order = contrib;
            d.factors = {static_cast<int>(j)};
            groups.emplace_back(n, d);
        } else {
            it->second.order += contrib;
            it->second.factors.push_back(static_cast<int>(j));
        }
    }
    (void)st;
    for (auto& [n, d] : groups)
        if (d.order > 0) info.divisors.push_back(d);
    return info;
}

std::vector<PointInfo> singular_points(const Normalized& nf, const Setting& st, double window) {
    const int n = nf.dimension;
    std::vector<int> poles;
    for (std::size_t j = 0; j < nf.factors.size(); ++j)
        if (nf.factors[j].pole_bearing()) poles.push_back(static_cast<int>(j));
    std::map<EVec, bool> seen;
    std::vector<PointInfo> out;
    std::vector<int> pick(n);
    auto inside = [&](const EVec& p) {
        for (int i = 0; i < n; ++i)
            if (std::abs(p[i].at(st.eps) - st.base[i]) > window + kTol) return false;
        return true;
    };
    std::function<void(int, int)> rec = [&](int depth, int start) {
        if (depth == n) {
            std::vector<IVec> rows;
            for (int j : pick) rows.push_back(nf.factors[j].a);
            auto inv = inverse(rows);
            if (!inv) return;
            std::vector<std::int64_t> kmax(n);
            for (int i = 0; i < n; ++i) {
                const auto& f = nf.factors[pick[i]];
                if (!f.gamma) { kmax[i] = 0; continue; }
                double reach = std::abs(f.b.at(st.eps)) + std::abs(dot(f.a, st.base));
                for (auto c : f.a) reach += std::abs(static_cast<double>(c)) * window;
                kmax[i] = static_cast<std::int64_t>(std::ceil(reach)) + 1;
            }
            std::vector<std::int64_t> k(n, 0);
            for (;;) {
                EVec rhs(n);
                for (int i = 0; i < n; ++i) rhs[i] = EpsAffine(Rational(-k[i])) - nf.factors[pick[i]].b;
                EVec p = solve(*inv, rhs);
                if (inside(p) && !seen.count(p)) {
                    seen[p] = true;
                    auto info = analyze_point(nf, p, st);
                    std::vector<IVec> normals;
                    for (auto& d : info.divisors) normals.push_back(d.normal);
                    if (!info.divisors.empty() && normals_rank(normals) == n) out.push_back(std::move(info));
                }
                int i = 0;
                while (i < n && ++k[i] > kmax[i]) k[i++] = 0;
                if (i == n) break;
            }
            return;
        }
        for (std::size_t s = start; s < poles.size(); ++s) {
            pick[depth] = poles[s];
            rec(depth + 1, static_cast<int>(s) + 1);
        }
    };
    rec(0, 0);
    std::sort(out.begin(), out.end(), [](const PointInfo& a, const PointInfo& b) { return a.point < b.point; });
    return out;
}

std::string HalfSpace::str(const std::vector<std::string>& vars) const {
    return form.str(vars) + sense_str(sense) + "0";
}

std::string HalfSpace::canonical(const std::vector<std::string>& vars) const {
    LinearForm f = form;
    Sense s = sense;
    auto lead = std::find_if(f.coeffs.begin(), f.coeffs.end(), [](auto c) { return c != 0; });
    if (lead != f.coeffs.end() && *lead < 0) {
        for (auto& c : f.coeffs) c = -c;
        f.offset = -f.offset;
        s = s == Sense::greater ? Sense::less : Sense::greater;
    }
    auto g = gcd_all(f.coeffs);
    if (g > 1) {
        for (auto& c : f.coeffs) c /= g;
        f.offset *= Rational(1, g);
    }
    LinearForm lhs = f;
    lhs.offset = EpsAffine();
    return lhs.str(vars) + sense_str(s) + (-f.offset).str();
}

std::vector<HalfSpace> fundamental_polytope(const MBSpec& spec, const Setting& st) {
    auto all = pole_halfspaces(spec, st);
    const int n = spec.dimension;
    if (static_cast<int>(all.size()) <= n || n > 3) return all;
    std::vector<std::vector<double>> verts;
    for (auto& v : polytope_vertices(all, n, st.eps)) verts.push_back(numeric(v, st.eps));
    if (verts.empty()) throw MathError("fundamental polytope is empty at the working eps (pinch)");
    std::vector<HalfSpace> facets;
    for (auto& h : all) {
        std::vector<std::vector<double>> on;
        for (auto& v : verts)
            if (std::abs(h.form.at(v, st.eps)) < 1e-9) on.push_back(v);
        if (static_cast<int>(on.size()) < n) continue;
        std::vector<std::vector<double>> diffs;
        for (std::size_t i = 1; i < on.size(); ++i) {
            std::vector<double> d(n);
            for (int k = 0; k < n; ++k) d[k] = on[i][k] - on[0][k];
            diffs.push_back(d);
        }
        if (matrix_rank(diffs) == n - 1) facets.push_back(h);
    }
    // unbounded polytopes: fall back to the full list
    return facets.empty() ? all : facets;
}

std::vector<HalfSpace> fundamental_polytope(const MBSpec& spec) { return fundamental_polytope(spec, default_setting(spec)); }

std::optional<EVec> polytope_centroid(const MBSpec& spec, const Setting& st) {
    const int n = spec.dimension;
    if (n > 3) return std::nullopt;
    auto verts = polytope_vertices(pole_halfspaces(spec, st), n, st.eps);
    if (static_cast<int>(verts.size()) < n + 1) return std::nullopt;
    EVec c(n);
    for (auto& v : verts)
        for (int i = 0; i < n; ++i) c[i] += v[i];
    Rational w(1, static_cast<std::int64_t>(verts.size()));
    for (auto& x : c) x = x * w;
    return c;
}

DeltaVector delta_vector(const MBSpec& spec) {
    DeltaVector d;
    d.components.assign(spec.dimension, 0);
    std::int64_t alpha = 0;
    for (auto& g : spec.gammas) {
        for (int i = 0; i < spec.dimension; ++i) d.components[i] += g.power * g.form.coeffs[i];
        if (spec.dimension == 1) alpha += g.power * std::abs(g.form.coeffs[0]);
    }
    if (spec.dimension == 1) d.alpha = alpha;
    bool zero = std::all_of(d.components.begin(), d.components.end(), [](auto c) { return c == 0; });
    if (zero) d.classification = DeltaVector::Kind::degenerate;
    else {
        bool semi = spec.dimension > 1 && std::any_of(spec.gammas.begin(), spec.gammas.end(), [&](const GammaFactor& g) {
                        return parallel(g.form.coeffs, d.components);
                    });
        d.classification = semi ? DeltaVector::Kind::semi_degenerate : DeltaVector::Kind::nondegenerate;
    }
    return d;
}

PointRole classify_point(const Cone& cone, const PointInfo& info) {
    const auto& st = cone.setting;
    auto p = numeric(info.point, st.eps);
    auto in_region = [&]() {
        for (auto& h : cone.constraints) {
            double v = h.form.at(p, st.eps);
            if (h.sense == HalfSpace::Sense::less ? v > kTol : v < -kTol) return false;
        }
        return true;
    };
    if (cone.dimension == 1) {
        for (auto& d : info.divisors)
            if ((d.normal[0] < 0 ? 1 : -1) == cone.side) return PointRole::contributing;
        return PointRole::outside;
    }
    if (cone.dimension == 2) {
        std::vector<const Divisor*> north, south;
        for (auto& d : info.divisors) {
            Rational s = Rational(d.normal[0]) * cone.l_direction[0] + Rational(d.normal[1]) * cone.l_direction[1];
            if (s.sign() < 0) north.push_back(&d);
            else if (s.sign() > 0) south.push_back(&d);
        }
        for (auto* a : north)
            for (auto* b : south) {
                auto dt = det2(a->normal, b->normal);
                if (cone.east ? dt < 0 : dt > 0) return PointRole::contributing;
            }
        if (!cone.constraints.empty() && (north.empty() || south.empty()) && in_region()) return PointRole::spurious;
        return PointRole::outside;
    }
    // 3D and higher: every divisor aligned with a frame normal, frame covered
    if (!in_region()) return PointRole::outside;
    std::vector<bool> covered(cone.frame.size(), false);
    for (auto& d : info.divisors) {
        bool ok = false;
        for (std::size_t i = 0; i < cone.frame.size(); ++i)
            if (primitive(cone.frame[i]) == d.normal) { covered[i] = true; ok = true; }
        if (!ok) return PointRole::spurious;
    }
    return std::all_of(covered.begin(), covered.end(), [](bool b) { return b; }) ? PointRole::contributing
                                                                                : PointRole::spurious;
}

namespace {

constexpr double kConeWindow = 6.0;

double angle_of(double x, double y) {
    double a = std::atan2(y, x);
    return a < 0 ? a + 2 * kPi : a;
}

// Half-spaces {factor <= 0} valid on every contributing point; picks the two
// whose recession cone equals that of all valid ones.
void attach_constraints_2d(Cone& cone, const Normalized& nf, const std::vector<PointInfo>& pts) {
    const auto& st = cone.setting;
    std::vector<int> valid;
    std::set<FormKey> seen;
    for (std::size_t j = 0; j < nf.factors.size(); ++j) {
        const auto& f = nf.factors[j];
        if (!f.pole_bearing()) continue;
        auto g = gcd_all(f.a);
        FormKey key{primitive(f.a), f.b * Rational(1, g)};
        if (seen.count(key)) continue;
        bool ok = true;
        for (auto& p : pts)
            if (f.at(numeric(p.point, st.eps), st.eps) > kTol) { ok = false; break; }
        if (!ok) continue;
        seen.insert(key);
        valid.push_back(static_cast<int>(j));
    }
    auto in_recession = [&](double x, double y) {
        for (int j : valid)
            if (nf.factors[j].a[0] * x + nf.factors[j].a[1] * y > kTol) return false;
        return true;
    };
    std::optional<std::pair<int, int>> best;
    for (std::size_t i = 0; i < valid.size() && !best; ++i)
        for (std::size_t k = i + 1; k < valid.size() && !best; ++k) {
            const auto& a = nf.factors[valid[i]].a;
            const auto& b = nf.factors[valid[k]].a;
            if (det2(a, b) == 0) continue;
            // extreme rays of {<a,x> <= 0, <b,x> <= 0}
            double r1x = -a[1], r1y = a[0];
            if (b[0] * r1x + b[1] * r1y > 0) { r1x = -r1x; r1y = -r1y; }
            double r2x = -b[1], r2y = b[0];
            if (a[0] * r2x + a[1] * r2y > 0) { r2x = -r2x; r2y = -r2y; }
            if (in_recession(r1x, r1y) && in_recession(r2x, r2y)) best = {valid[i], valid[k]};
        }
    if (best) {
        for (int j : {best->first, best->second}) {
            const auto& f = nf.factors[j];
            cone.constraints.push_back({{f.a, f.b}, HalfSpace::Sense::less});
            cone.generating_gammas.push_back(f.source);
        }
        return;
    }
    // No factor half-space pair fits (contour away from the fundamental
    // polytope): shift pole normals onto the point set, dropping directions in
    // which the windowed set is unbounded.
    struct Shifted {
        IVec a;
        EpsAffine top;
        int source;
    };
    std::vector<Shifted> cand;
    std::set<IVec> normals;
    for (auto& f : nf.factors) {
        if (!f.pole_bearing()) continue;
        IVec u = primitive(f.a);
        for (IVec a : {u, IVec{-u[0], -u[1]}}) {
            if (!normals.insert(a).second) continue;
            const PointInfo* arg = nullptr;
            double top = -1e300;
            for (auto& p : pts) {
                double v = dot(a, numeric(p.point, st.eps));
                if (v > top) { top = v; arg = &p; }
            }
            auto q = numeric(arg->point, st.eps);
            bool edge = false;
            for (int i = 0; i < 2; ++i) edge = edge || std::abs(q[i] - st.base[i]) > kConeWindow - 1.5;
            if (edge) continue;
            EpsAffine t;
            for (int i = 0; i < 2; ++i) t += arg->point[i] * Rational(a[i]);
            cand.push_back({a, t, a == f.a ? f.source : -1});
        }
    }
    auto in_cand = [&](double x, double y) {
        for (auto& c : cand)
            if (c.a[0] * x + c.a[1] * y > kTol) return false;
        return true;
    };
    for (std::size_t i = 0; i < cand.size(); ++i)
        for (std::size_t k = i + 1; k < cand.size(); ++k) {
            const auto& a = cand[i].a;
            const auto& b = cand[k].a;
            if (det2(a, b) == 0) continue;
            double r1x = -a[1], r1y = a[0];
            if (b[0] * r1x + b[1] * r1y > 0) { r1x = -r1x; r1y = -r1y; }
            double r2x = -b[1], r2y = b[0];
            if (a[0] * r2x + a[1] * r2y > 0) { r2x = -r2x; r2y = -r2y; }
            if (!in_cand(r1x, r1y) || !in_cand(r2x, r2y)) continue;
            for (auto* c : {&cand[i], &cand[k]}) {
                cone.constraints.push_back({{c->a, -c->top}, HalfSpace::Sense::less});
                cone.generating_gammas.push_back(c->source);
            }
            return;
        }
    throw std::logic_error("cone without a simplicial pair of bounding half-spaces");
}


double bisector_angle(const Cone& cone) {
    const auto& a = cone.constraints[0].form.coeffs;
    const auto& b = cone.constraints[1].form.coeffs;
    double r1x = -a[1], r1y = a[0];
    if (b[0] * r1x + b[1] * r1y > 0) { r1x = -r1x; r1y = -r1y; }
    double r2x = -b[1], r2y = b[0];
    if (a[0] * r2x + a[1] * r2y > 0) { r2x = -r2x; r2y = -r2y; }
    double n1 = std::hypot(r1x, r1y), n2 = std::hypot(r2x, r2y);
    return angle_of(r1x / n1 + r2x / n2, r1y / n1 + r2y / n2);
}

std::vector<Cone> cones_2d(const MBSpec& spec, const Setting& st) {
    auto nf = normalize(spec, st);
    auto pts = singular_points(nf, st, kConeWindow);
    // critical directions: perpendiculars of every pole-bearing normal
    std::vector<IVec> crit;
    for (auto& f : nf.factors) {
        if (!f.pole_bearing()) continue;
        IVec u = primitive(IVec{-f.a[1], f.a[0]});
        for (IVec v : {u, IVec{-u[0], -u[1]}})
            if (std::find(crit.begin(), crit.end(), v) == crit.end()) crit.push_back(v);
    }
    std::sort(crit.begin(), crit.end(), [](const IVec& a, const IVec& b) {
        return angle_of(static_cast<double>(a[0]), static_cast<double>(a[1])) <
               angle_of(static_cast<double>(b[0]), static_cast<double>(b[1]));
    });
    std::vector<Cone> cones;
    std::set<std::vector<EVec>> seen;
    for (std::size_t i = 0; i < crit.size(); ++i) {
        const IVec& u = crit[i];
        const IVec& v = crit[(i + 1) % crit.size()];
        Rational nu = Rational(std::abs(u[0]) + std::abs(u[1]));
        Rational nv = Rational(std::abs(v[0]) + std::abs(v[1]));
        RVec d = {Rational(u[0]) / nu + Rational(v[0]) / nv, Rational(u[1]) / nu + Rational(v[1]) / nv};
        if (d[0].is_zero() && d[1].is_zero()) continue;
        for (bool east : {true, false}) {
            Cone c;
            c.dimension = 2;
            c.l_direction = d;
            c.east = east;
            c.setting = st;
            std::vector<PointInfo> mine;
            std::vector<EVec> key;
            for (auto& p : pts)
                if (classify_point(c, p) == PointRole::contributing) {
                    mine.push_back(p);
                    key.push_back(p.point);
                }
            if (mine.empty() || !seen.insert(key).second) continue;
            for (std::size_t j = 0; j < nf.factors.size(); ++j) {
                const auto& f = nf.factors[j];
                if (!f.pole_bearing()) continue;
                Rational s = Rational(f.a[0]) * d[0] + Rational(f.a[1]) * d[1];
                c.side_of_l[static_cast<int>(j)] =
                    s.sign() < 0 ? CrossSide::arrow : s.sign() > 0 ? CrossSide::tail : CrossSide::parallel;
            }
            attach_constraints_2d(c, nf, mine);
            cones.push_back(std::move(c));
        }
    }
    std::stable_sort(cones.begin(), cones.end(),
                     [](const Cone& a, const Cone& b) { return bisector_angle(a) < bisector_angle(b); });
    for (std::size_t i = 0; i < cones.size(); ++i) cones[i].id = static_cast<int>(i) + 1;
    return cones;
}

std::vector<Cone> cones_3d(const MBSpec& spec, const Setting& st) {
    auto nf = normalize(spec, st);
    auto pts = singular_points(nf, st, 4.0);
    std::vector<int> forms;
    std::set<FormKey> seen;
    for (std::size_t j = 0; j < nf.factors.size(); ++j) {
        const auto& f = nf.factors[j];
        if (!f.pole_bearing()) continue;
        auto g = gcd_all(f.a);
        if (seen.insert({primitive(f.a), f.b * Rational(1, g)}).second) forms.push_back(static_cast<int>(j));
    }
    struct Cand {
        Cone cone;
        std::set<EVec> points;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < forms.size(); ++i)
        for (std::size_t j = i + 1; j < forms.size(); ++j)
            for (std::size_t k = j + 1; k < forms.size(); ++k) {
                std::vector<IVec> rows = {nf.factors[forms[i]].a, nf.factors[forms[j]].a, nf.factors[forms[k]].a};
                if (det3(rows[0], rows[1], rows[2]) == 0) continue;
                Cone c;
                c.dimension = 3;
                c.setting = st;
                for (int idx : {forms[i], forms[j], forms[k]}) {
                    const auto& f = nf.factors[idx];
                    c.constraints.push_back({{f.a, f.b}, HalfSpace::Sense::less});
                    c.generating_gammas.push_back(f.source);
                    c.frame.push_back(f.a);
                }
                // the base point lies strictly outside {all <= 0}, so a
                // separating plane through it always exists for a simplicial cone
                Cand cand{c, {}};
                for (auto& p : pts)
                    if (classify_point(c, p) == PointRole::contributing) cand.points.insert(p.point);
                if (!cand.points.empty()) cands.push_back(std::move(cand));
            }
    std::vector<Cone> out;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < cands.size() && !dominated; ++j) {
            if (i == j) continue;
            const auto& a = cands[i].points;
            const auto& b = cands[j].points;
            bool subset = std::includes(b.begin(), b.end(), a.begin(), a.end());
            if (subset && (a.size() < b.size() || j < i)) dominated = true;
        }
        if (!dominated) out.push_back(cands[i].cone);
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i) + 1;
    return out;
}

}  // namespace

std::vector<Cone> enumerate_cones(const MBSpec& spec, const Setting& st) {
    std::vector<Cone> cones;
    if (spec.dimension == 1) {
        cones = {onefold_cone(spec, +1, st), onefold_cone(spec, -1, st)};
    } else if (spec.dimension == 2) {
        cones = cones_2d(spec, st);
    } else if (spec.dimension == 3) {
        cones = cones_3d(spec, st);
    } else {
        throw MathError("cone enumeration is implemented for dimensions 1 to 3");
    }
    if (cones.empty()) throw MathError("no cone found");
    return cones;
}

std::vector<Cone> enumerate_cones(const MBSpec& spec) { return enumerate_cones(spec, default_setting(spec)); }

Cone onefold_cone(const MBSpec& spec, int side, const Setting& st) {
    if (spec.dimension != 1) throw MathError("onefold cone requested for a multi-dimensional spec");
    Cone c;
    c.dimension = 1;
    c.side = side;
    c.id = side > 0 ? 1 : 2;
    c.setting = st;
    LinearForm f{{1}, EpsAffine(-spec.base_point[0])};
    c.constraints.push_back({f, side > 0 ? HalfSpace::Sense::greater : HalfSpace::Sense::less});
    return c;
}

EVec IndexedFamily::point(const IVec& k) const {
    EVec p = offset;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < k.size(); ++j) p[i] += EpsAffine(index_matrix[i][j] * Rational(k[j]));
    return p;
}

std::string IndexedFamily::str(const std::vector<std::string>& idx) const {
    std::string s = "(";
    for (std::size_t i = 0; i < offset.size(); ++i) {
        if (i) s += ",";
        std::string t = offset[i].str();
        bool empty = offset[i] == EpsAffine();
        std::string acc = empty ? "" : t;
        for (int j = 0; j < arity(); ++j) {
            const Rational& c = index_matrix[i][j];
            if (c.is_zero()) continue;
            std::string name = j < static_cast<int>(idx.size()) ? idx[j] : "k" + std::to_string(j + 1);
            auto num = std::abs(c.num());
            std::string term = (num == 1 ? "" : std::to_string(num)) + name;
            if (!c.is_integer()) term += "/" + std::to_string(c.den());
            if (acc.empty()) acc = (c.sign() < 0 ? "-" : "") + term;
            else acc += (c.sign() < 0 ? "-" : "+") + term;
        }
        s += acc.empty() ? "0" : acc;
    }
    return s + ")";
}

namespace {

struct Fitter {
    const Normalized& nf;
    const Setting& st;
    int n;
    double window;

    bool inside(const EVec& p) const {
        for (int i = 0; i < n; ++i)
            if (std::abs(p[i].at(st.eps) - st.base[i]) > window + kTol) return false;
        return true;
    }
    double edge_distance(const EVec& p) const {
        double d = 1e300;
        for (int i = 0; i < n; ++i) d = std::min(d, window - std::abs(p[i].at(st.eps) - st.base[i]));
        return d;
    }
};

// z-space steps (rational) that keep a point on every signature line family
std::vector<RVec> candidate_steps(const Normalized& nf, const std::vector<int>& basis, int n) {
    std::vector<IVec> rows;
    for (int j : basis) rows.push_back(nf.factors[j].a);
    auto inv = *inverse(rows);
    std::vector<IVec> level_dirs;
    for (int i = 0; i < n; ++i) {
        if (!nf.factors[basis[i]].gamma) continue;
        IVec e(n, 0);
        e[i] = 1;
        level_dirs.push_back(e);
    }
    // rows r_l = a_l * inv in level coordinates (up to the sign of the map)
    std::vector<RVec> r;
    for (auto& f : nf.factors) {
        RVec v(n);
        for (int c = 0; c < n; ++c)
            for (int k = 0; k < n; ++k) v[c] += Rational(f.a[k]) * inv[k][c];
        r.push_back(v);
    }
    auto to_int = [&](RVec v) -> std::optional<IVec> {
        std::int64_t l = 1;
        for (auto& x : v) l = std::lcm(l, x.den());
        IVec out;
        for (auto& x : v) out.push_back((x * Rational(l)).num());
        bool zero = std::all_of(out.begin(), out.end(), [](auto c) { return c == 0; });
        if (zero) return std::nullopt;
        return primitive(out);
    };
    if (n == 2) {
        for (auto& v : r)
            if (auto d = to_int({-v[1], v[0]})) level_dirs.push_back(*d);
    } else if (n == 3) {
        for (std::size_t a = 0; a < r.size(); ++a)
            for (std::size_t b = a + 1; b < r.size(); ++b) {
                RVec c = {r[a][1] * r[b][2] - r[a][2] * r[b][1], r[a][2] * r[b][0] - r[a][0] * r[b][2],
                          r[a][0] * r[b][1] - r[a][1] * r[b][0]};
                if (auto d = to_int(c)) level_dirs.push_back(*d);
            }
    }
    std::vector<RVec> steps;
    std::set<RVec> seen;
    for (auto& ld : level_dirs) {
        // linear basis factors must keep level 0
        bool ok = true;
        for (int i = 0; i < n; ++i)
            if (!nf.factors[basis[i]].gamma && ld[i] != 0) ok = false;
        if (!ok) continue;
        for (int sgn : {1, -1})
            for (int mult = 1; mult <= 3; ++mult) {
                // z = inv * (-k - b): a level step dk moves z by -inv*dk
                RVec s(n);
                for (int i = 0; i < n; ++i)
                    for (int k = 0; k < n; ++k) s[i] -= inv[i][k] * Rational(sgn * mult * ld[k]);
                if (seen.insert(s).second) steps.push_back(s);
            }
    }
    return steps;
}

EVec add_step(const EVec& p, const RVec& s, std::int64_t k) {
    EVec q = p;
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += EpsAffine(s[i] * Rational(k));
    return q;
}

bool independent(const std::vector<RVec>& dirs) {
    std::vector<std::vector<double>> m;
    for (auto& d : dirs) {
        std::vector<double> row;
        for (auto& x : d) row.push_back(x.to_double());
        m.push_back(row);
    }
    return matrix_rank(m) == static_cast<int>(dirs.size());
}

// exact check that P0 + M k keeps the signature for every k >= 0
bool verify_family(const Normalized& nf, const IndexedFamily& fam, const std::vector<int>& active) {
    std::set<int> act(active.begin(), active.end());
    for (std::size_t j = 0; j < nf.factors.size(); ++j) {
        const auto& f = nf.factors[j];
        EpsAffine lam = f.at(fam.offset);
        RVec g(fam.arity());
        for (int c = 0; c < fam.arity(); ++c)
            for (std::size_t i = 0; i < f.a.size(); ++i) g[c] += Rational(f.a[i]) * fam.index_matrix[i][c];
        bool integral = std::all_of(g.begin(), g.end(), [](const Rational& x) { return x.is_integer(); });
        bool all_nonpos = std::all_of(g.begin(), g.end(), [](const Rational& x) { return x.sign() <= 0; });
        bool all_nonneg = std::all_of(g.begin(), g.end(), [](const Rational& x) { return x.sign() >= 0; });
        bool all_zero = std::all_of(g.begin(), g.end(), [](const Rational& x) { return x.is_zero(); });
        if (act.count(static_cast<int>(j))) {
            if (lam.has_eps() || !lam.c.is_integer() || !integral) return false;
            if (f.gamma ? !(lam.c.sign() <= 0 && all_nonpos) : !(lam.c.is_zero() && all_zero)) return false;
            continue;
        }
        if (lam.has_eps()) continue;
        if (!integral) {
            if (fam.arity() != 1) return false;
            // integer values form the progression v0 + j*step
            std::int64_t q = g[0].den();
            std::optional<Rational> v0;
            for (std::int64_t k = 0; k < q && !v0; ++k)
                if ((lam.c + g[0] * Rational(k)).is_integer()) v0 = lam.c + g[0] * Rational(k);
            if (!v0) continue;
            std::int64_t step = (g[0] * Rational(q)).num();
            if (f.gamma) {
                if (v0->sign() <= 0 || step < 0) return false;
            } else {
                std::int64_t v = v0->num();
                if (v == 0 || (step != 0 && -v % step == 0 && -v / step >= 0)) return false;
            }
            continue;
        }
        if (!lam.c.is_integer()) continue;
        if (f.gamma) {
            if (!(lam.c.sign() > 0 && all_nonneg)) return false;
        } else {
            bool ok = (lam.c.sign() > 0 && all_nonneg) || (lam.c.sign() < 0 && all_nonpos);
            if (!ok) return false;
        }
    }
    return true;
}

std::vector<IndexedFamily> fit_group(const Normalized& nf, const Setting& st, const Fitter& fit,
                                     const std::vector<PointInfo>& group, bool spurious) {
    const int n = nf.dimension;
    const auto& active = group.front().active;
    // lattice basis: first independent n-tuple of pole-bearing active factors
    std::vector<int> poles;
    for (int j : active)
        if (nf.factors[j].pole_bearing()) poles.push_back(j);
    std::vector<int> basis;
    std::vector<int> pick(n);
    std::function<bool(int, int)> rec = [&](int depth, int start) {
        if (depth == n) {
            std::vector<IVec> rows;
            for (int j : pick) rows.push_back(nf.factors[j].a);
            if (det_rows(rows) != 0) { basis = pick; return true; }
            return false;
        }
        for (std::size_t s = start; s < poles.size(); ++s) {
            pick[depth] = poles[s];
            if (rec(depth + 1, static_cast<int>(s) + 1)) return true;
        }
        return false;
    };
    if (!rec(0, 0)) throw std::logic_error("singular point without an independent set of divisors");
    auto steps = candidate_steps(nf, basis, n);

    std::set<EVec> remaining;
    for (auto& p : group)
        if (fit.inside(p.point)) remaining.insert(p.point);

    std::vector<IndexedFamily> fams;
    auto make_family = [&](const EVec& apex, const std::vector<RVec>& dirs) {
        IndexedFamily f;
        f.offset = apex;
        f.index_matrix.assign(n, RVec(dirs.size()));
        for (std::size_t c = 0; c < dirs.size(); ++c)
            for (int i = 0; i < n; ++i) f.index_matrix[i][c] = dirs[c][i];
        f.spurious = spurious;
        for (int j : active)
            if (nf.factors[j].pole_bearing()) {
                const auto& fj = nf.factors[j];
                f.divisor_orders[j] = fj.gamma ? fj.power : -fj.power;
            }
        return f;
    };
    // in-window points of apex + sum k_i d_i; false if one leaves the group
    auto generate_box = [&](const EVec& apex, const std::vector<RVec>& dirs, std::vector<EVec>& out) -> bool {
        const int r = static_cast<int>(dirs.size());
        std::int64_t cap = static_cast<std::int64_t>(2 * fit.window) + 2;
        std::vector<std::int64_t> k(r, 0);
        for (;;) {
            EVec p = apex;
            for (int i = 0; i < r; ++i) p = add_step(p, dirs[i], k[i]);
            if (fit.inside(p)) {
                if (!remaining.count(p)) return false;
                out.push_back(p);
            }
            int i = 0;
            while (i < r && ++k[i] > cap) k[i++] = 0;
            if (i == r) break;
        }
        return true;
    };

    for (int arity = n; arity >= 1; --arity) {
        for (;;) {
            std::optional<std::pair<EVec, std::vector<RVec>>> best;
            std::size_t best_cov = 0;
            std::vector<int> sel(arity);
            std::function<void(int, int)> choose = [&](int depth, int start) {
                if (depth == arity) {
                    std::vector<RVec> dirs;
                    for (int s : sel) dirs.push_back(steps[s]);
                    if (!independent(dirs)) return;
                    for (auto& apex : remaining) {
                        bool corner = true;
                        for (auto& d : dirs) {
                            EVec back = add_step(apex, d, -1);
                            if (remaining.count(back)) corner = false;
                            EVec fwd = add_step(apex, d, 1);
                            if (!remaining.count(fwd)) corner = false;
                        }
                        if (!corner) continue;
                        std::vector<EVec> cov;
                        if (!generate_box(apex, dirs, cov)) continue;
                        if (cov.size() > best_cov || (cov.size() == best_cov && best && apex > best->first)) {
                            best_cov = cov.size();
                            best = {apex, dirs};
                        }
                    }
                    return;
                }
                for (std::size_t s = start; s < steps.size(); ++s) {
                    sel[depth] = static_cast<int>(s);
                    choose(depth + 1, static_cast<int>(s) + 1);
                }
            };
            choose(0, 0);
            if (!best || best_cov < static_cast<std::size_t>(arity + 1)) break;
            auto fam = make_family(best->first, best->second);
            if (!verify_family(nf, fam, active)) throw std::logic_error("family fit failed exact verification: " + fam.str());
            std::vector<EVec> cov;
            generate_box(best->first, best->second, cov);
            for (auto& p : cov) remaining.erase(p);
            fams.push_back(std::move(fam));
        }
    }
    for (auto& p : remaining) {
        if (fit.edge_distance(p) < 2.0) continue;  // tail of a family beyond the window
        auto fam = make_family(p, {});
        fam.index_matrix.assign(n, {});
        fams.push_back(std::move(fam));
    }
    (void)st;
    return fams;
}

}  // namespace

std::vector<IndexedFamily> intersection_families(const MBSpec& spec, const Cone& cone) {
    const auto& st = cone.setting;
    auto nf = normalize(spec, st);
    const double window = spec.dimension >= 3 ? 4.0 : 7.0;
    auto pts = singular_points(nf, st, window);
    Fitter fit{nf, st, spec.dimension, window};
    std::map<std::pair<bool, std::vector<int>>, std::vector<PointInfo>> groups;
    for (auto& p : pts) {
        auto role = classify_point(cone, p);
        if (role == PointRole::outside) continue;
        if (role == PointRole::spurious && spec.dimension != 2) continue;
        groups[{role == PointRole::spurious, p.active}].push_back(p);
    }
    std::vector<IndexedFamily> out;
    for (auto& [key, g] : groups) {
        auto fams = fit_group(nf, st, fit, g, key.first);
        out.insert(out.end(), fams.begin(), fams.end());
    }
    std::sort(out.begin(), out.end(), [](const IndexedFamily& a, const IndexedFamily& b) {
        if (a.spurious != b.spurious) return !a.spurious;
        if (a.arity() != b.arity()) return a.arity() > b.arity();
        return a.offset < b.offset;
    });
    return out;
}

bool detect_spurious(const MBSpec& spec, const Cone& cone, const IndexedFamily& family) {
    auto nf = normalize(spec, cone.setting);
    auto info = analyze_point(nf, family.offset, cone.setting);
    return classify_point(cone, info) == PointRole::spurious;
}

Orientation orient(const Cone& cone, const PointInfo& info) {
    Orientation o;
    if (info.divisors.empty()) throw MathError("not a singular point");
    if (cone.dimension == 1) {
        std::vector<int> all(info.divisors.size());
        std::iota(all.begin(), all.end(), 0);
        o.groups = {all};
        o.sign = info.divisors[0].normal[0] > 0 ? 1 : -1;
        return o;
    }
    if (cone.dimension == 2) {
        std::vector<int> north, south;
        for (std::size_t i = 0; i < info.divisors.size(); ++i) {
            const auto& nrm = info.divisors[i].normal;
            Rational s = Rational(nrm[0]) * cone.l_direction[0] + Rational(nrm[1]) * cone.l_direction[1];
            if (s.sign() < 0) north.push_back(static_cast<int>(i));
            else if (s.sign() > 0) south.push_back(static_cast<int>(i));
            else throw MathError("undecidable: a singular line is parallel to the l-line");
        }
        if (north.empty() || south.empty())
            throw MathError("undecidable: spurious singular point (all lines cross the same side of l)");
        o.groups = cone.east ? std::vector<std::vector<int>>{south, north} : std::vector<std::vector<int>>{north, south};
        auto dt = det2(info.divisors[o.groups[0][0]].normal, info.divisors[o.groups[1][0]].normal);
        o.sign = dt > 0 ? 1 : -1;
        return o;
    }
    o.groups.assign(cone.frame.size(), {});
    for (std::size_t i = 0; i < info.divisors.size(); ++i) {
        bool placed = false;
        for (std::size_t g = 0; g < cone.frame.size() && !placed; ++g)
            if (primitive(cone.frame[g]) == info.divisors[i].normal) {
                o.groups[g].push_back(static_cast<int>(i));
                placed = true;
            }
        if (!placed) throw MathError("undecidable: divisor not aligned with the cone frame");
    }
    for (auto& g : o.groups)
        if (g.empty()) throw MathError("undecidable: spurious singular point");
    o.sign = det_rows(cone.frame) > 0 ? 1 : -1;
    return o;
}

std::pair<std::vector<int>, std::vector<int>> orientation_partition(const MBSpec& spec, const Cone& cone,
                                                                    const IndexedFamily& family) {
    if (cone.dimension != 2) throw MathError("orientation partition is defined for twofold cones");
    auto nf = normalize(spec, cone.setting);
    auto info = analyze_point(nf, family.offset, cone.setting);
    auto o = orient(cone, info);
    auto expand = [&](const std::vector<int>& g) {
        std::vector<int> out;
        for (int d : g)
            for (int f : info.divisors[d].factors) out.push_back(f);
        std::sort(out.begin(), out.end());
        return out;
    };
    return {expand(o.groups[0]), expand(o.groups[1])};
}

}  // namespace mb
