#include "mbseries/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

namespace mb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BigQ to_big(const Rational& r) { return BigQ(r.num()) / BigQ(r.den()); }

// c + <beta,k> as a polynomial
Poly affine(int n, const Rational& c, const RVec& beta) {
    Poly p = Poly::constant(n, to_big(c));
    for (int i = 0; i < n; ++i)
        if (!beta[i].is_zero()) p += Poly::constant(n, to_big(beta[i])) * Poly::monomial(n, i, 1);
    return p;
}

std::string monomial_str(const std::map<std::string, Rational>& mono) {
    auto part = [](const std::string& name, const Rational& e) {
        return e == Rational(1) ? name : name + "^" + (e.is_integer() ? e.str() : "(" + e.str() + ")");
    };
    std::vector<std::string> up, down;
    for (auto& [name, e] : mono) {
        if (e.sign() > 0) up.push_back(part(name, e));
        else if (e.sign() < 0) down.push_back(part(name, -e));
    }
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (auto& x : v) s += (s.empty() ? "" : "*") + x;
        return s;
    };
    std::string s = up.empty() ? "1" : join(up);
    if (!down.empty()) s += "/" + (down.size() > 1 ? "(" + join(down) + ")" : down[0]);
    return s;
}

std::map<std::string, Rational> x_monomial(const GammaTerm& term, int i) {
    std::map<std::string, Rational> m;
    for (auto& [name, e] : term.parameter_powers)
        if (!e[i].is_zero()) m[name] = e[i];
    return m;
}

// compositions of total into parts of length s
void compositions(int s, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == s - 1) {
        cur.push_back(total);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int a = 0; a <= total; ++a) {
        cur.push_back(a);
        compositions(s, total - a, cur, out);
        cur.pop_back();
    }
}

}  // namespace

bool GammaTerm::integral() const {
    for (auto& f : factors)
        for (auto& a : f.alpha)
            if (!a.is_integer()) return false;
    return true;
}

double GammaTerm::log_x(int i, const std::map<std::string, double>& mags) const {
    double r = 0;
    for (auto& [name, e] : parameter_powers) {
        if (e[i].is_zero()) continue;
        auto it = mags.find(name);
        if (it == mags.end()) throw MathError("unbound parameter '" + name + "'");
        r += e[i].to_double() * std::log(std::abs(it->second));
    }
    return r;
}

double GammaTerm::log_abs_core(const IVec& k, double eps_value) const {
    double r = 0;
    for (auto& f : factors) {
        double x = f.c.at(eps_value);
        for (std::size_t i = 0; i < k.size(); ++i) x += f.alpha[i].to_double() * static_cast<double>(k[i]);
        r += f.power * (f.gamma ? std::lgamma(x) : std::log(std::abs(x)));
    }
    return r;
}

GammaTerm gamma_ratio_term(const MBSpec& spec, const IndexedFamily& family, const Setting& st) {
    Normalized nf = normalize(spec, st);
    PointInfo info = analyze_point(nf, family.offset, st);
    std::set<int> act(info.active.begin(), info.active.end());
    const int n = spec.dimension;
    const int r = family.arity();

    GammaTerm t;
    t.arity = r;
    t.eps = spec.epsilon.value_or(Rational(0));
    t.sign_factor.assign(r, Rational(0));
    auto index_form = [&](const IVec& a) {
        RVec alpha(r);
        for (int c = 0; c < r; ++c)
            for (int i = 0; i < n; ++i) alpha[c] += Rational(a[i]) * family.index_matrix[i][c];
        return alpha;
    };
    for (std::size_t j = 0; j < nf.factors.size(); ++j) {
        const auto& f = nf.factors[j];
        RVec alpha = index_form(f.a);
        EpsAffine lam = f.at(family.offset);
        if (act.count(static_cast<int>(j))) {
            if (!f.gamma) continue;
            // Gamma(-K+x)^q ~ ((-1)^K / (K! x))^q with K = -lam - <alpha,k>
            RVec beta(r);
            for (int c = 0; c < r; ++c) {
                beta[c] = -alpha[c];
                t.sign_factor[c] += Rational(f.power) * beta[c];
            }
            t.factors.push_back({beta, EpsAffine(Rational(1)) - lam, -f.power, true});
        } else {
            t.factors.push_back({alpha, lam, f.power, f.gamma});
        }
    }
    for (auto& s : t.sign_factor) {
        if (!s.is_integer()) continue;
        std::int64_t v = s.num() % 2;
        s = Rational(v < 0 ? -v : v);
    }
    for (auto& p : spec.parameters) {
        t.parameter_powers.emplace_back(p.name, index_form(p.exponent));
        EpsAffine off;
        for (int i = 0; i < n; ++i) off += family.offset[i] * Rational(p.exponent[i]);
        t.parameter_offsets[p.name] = off;
    }
    return t;
}

GammaTerm gamma_ratio_term(const MBSpec& spec, const IndexedFamily& family) {
    return gamma_ratio_term(spec, family, default_setting(spec));
}

std::string RationalFunction::str(const std::vector<std::string>& vars) const {
    return "(" + numerator.str(vars) + ")/(" + denominator.str(vars) + ")";
}

bool RationalFunction::equals(const RationalFunction& o) const {
    return numerator * o.denominator == o.numerator * denominator;
}

HornFunctions horn_functions(const GammaTerm& term) {
    if (!term.integral()) throw MathError("Horn ratios need integer index coefficients");
    const int n = term.arity;
    if (n < 1) throw MathError("Horn ratios need at least one index");
    HornFunctions h;
    for (int i = 0; i < n; ++i) {
        Poly num = Poly::constant(n, 1), den = Poly::constant(n, 1);
        // leading part: constant times primitive directions with multiplicity
        BigQ lead = 1;
        std::map<IVec, std::int64_t> dirs;
        for (auto& f : term.factors) {
            std::int64_t b = f.alpha[i].num();
            if (b == 0) continue;
            Rational c = f.c.c + f.c.e * term.eps;
            Poly P = Poly::constant(n, 1), Q = Poly::constant(n, 1);
            if (!f.gamma) {
                P = affine(n, c + Rational(b), f.alpha);
                Q = affine(n, c, f.alpha);
            } else if (b > 0) {
                for (std::int64_t s = 0; s < b; ++s) P = P * affine(n, c + Rational(s), f.alpha);
            } else {
                for (std::int64_t s = 1; s <= -b; ++s) Q = Q * affine(n, c - Rational(s), f.alpha);
            }
            if (f.power > 0) {
                num = num * P.pow(f.power);
                den = den * Q.pow(f.power);
            } else {
                num = num * Q.pow(-f.power);
                den = den * P.pow(-f.power);
            }
            if (!f.gamma) continue;
            std::int64_t w = f.power * b;
            IVec a;
            for (auto& x : f.alpha) a.push_back(x.num());
            IVec d = primitive(a);
            auto lead_nz = std::find_if(d.begin(), d.end(), [](std::int64_t x) { return x != 0; });
            if (*lead_nz < 0)
                for (auto& x : d) x = -x;
            std::int64_t scale = 0;
            for (std::size_t k = 0; k < a.size(); ++k)
                if (d[k] != 0) { scale = a[k] / d[k]; break; }
            BigQ sc(scale);
            for (std::int64_t e = 0; e < std::abs(w); ++e) { if (w > 0) lead *= sc; else lead /= sc; }
            dirs[d] += w;
        }
        bool odd = term.sign_factor[i].is_integer() && term.sign_factor[i].num() % 2 != 0;
        if (odd) {
            num = Poly::constant(n, -1) * num;
            lead = -lead;
        }
        h.degrees.emplace_back(num.degree(), den.degree());
        h.f.push_back({num, den});
        Poly Fn = Poly::constant(n, lead), Fd = Poly::constant(n, 1);
        for (auto& [d, w] : dirs) {
            if (w == 0) continue;
            Poly lin = Poly::linear(d);
            if (w > 0) Fn = Fn * lin.pow(static_cast<int>(w));
            else Fd = Fd * lin.pow(static_cast<int>(-w));
        }
        h.F.push_back({Fn, Fd});
    }
    return h;
}

bool PowerSumConstraint::holds(const std::map<std::string, double>& mags) const {
    double s = 0;
    for (auto& t : terms) {
        double l = 0;
        for (auto& [name, e] : t.monomial) {
            auto it = mags.find(name);
            if (it == mags.end()) throw MathError("unbound parameter '" + name + "'");
            l += e.to_double() * std::log(std::abs(it->second));
        }
        s += t.coeff * std::exp(root.to_double() * l);
    }
    return s < 1.0;
}

std::string PowerSumConstraint::str() const {
    std::string s;
    for (auto& t : terms) {
        if (!s.empty()) s += " + ";
        if (std::abs(t.coeff - 1.0) > 1e-12) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g*", t.coeff);
            s += buf;
        }
        s += "|" + monomial_str(t.monomial) + "|";
        if (root != Rational(1)) s += "^(" + root.str() + ")";
    }
    return s + " < 1";
}

FamilyRegion::FamilyRegion(const GammaTerm& term, int sweep) : arity_(term.arity), sweep_(sweep) {
    net_.assign(arity_, 0.0);
    for (auto& f : term.factors) {
        if (!f.gamma) continue;
        bool any = false;
        std::vector<double> b, w;
        for (int i = 0; i < arity_; ++i) {
            b.push_back(f.alpha[i].to_double());
            w.push_back(f.power * f.alpha[i].to_double());
            any = any || !f.alpha[i].is_zero();
        }
        if (!any) continue;
        for (int i = 0; i < arity_; ++i) net_[i] += w[i];
        beta_.push_back(b);
        weight_.push_back(w);
    }
    x_.resize(arity_);
    for (auto& [name, e] : term.parameter_powers)
        for (int i = 0; i < arity_; ++i)
            if (!e[i].is_zero()) x_[i].emplace_back(name, e[i].to_double());
    for (int mask = 0; mask < (1 << arity_); ++mask)
        if (__builtin_popcount(mask) >= 2) {
            std::vector<int> s;
            for (int i = 0; i < arity_; ++i)
                if (mask & (1 << i)) s.push_back(i);
            subsets_.push_back(s);
        }
    precompute();
}

double FamilyRegion::log_f(int i, const std::vector<double>& t) const {
    if (net_[i] < -1e-12) return -kInf;
    double r = 0;
    for (std::size_t j = 0; j < beta_.size(); ++j) {
        double w = weight_[j][i];
        if (w == 0) continue;
        double d = 0;
        for (int k = 0; k < arity_; ++k) d += beta_[j][k] * t[k];
        r += w * std::log(std::abs(d));
    }
    return r;
}

void FamilyRegion::precompute() {
    for (auto& s : subsets_) {
        const int k = static_cast<int>(s.size());
        int total = k == 2 ? sweep_ : k == 3 ? 48 : 16;
        std::vector<std::vector<int>> comps;
        std::vector<int> cur;
        compositions(k, total - 1, cur, comps);
        std::vector<std::vector<double>> dirs, vals;
        for (auto& c : comps) {
            std::vector<double> t(arity_, 0.0);
            for (int a = 0; a < k; ++a) t[s[a]] = (c[a] + 1.0 / k) / total;
            std::vector<double> v;
            for (int a = 0; a < k; ++a) v.push_back(log_f(s[a], t));
            dirs.push_back(std::move(t));
            vals.push_back(std::move(v));
        }
        dirs_.push_back(std::move(dirs));
        cache_.push_back(std::move(vals));
    }
}

// sup over directions supported on `subset` of min_i (log X_i + log F_i)
double FamilyRegion::sup_min(const std::vector<int>& subset, const std::vector<double>& lx) const {
    std::size_t si = std::find(subsets_.begin(), subsets_.end(), subset) - subsets_.begin();
    const auto& dirs = dirs_[si];
    const auto& vals = cache_[si];
    auto phi_cached = [&](std::size_t p) {
        double m = kInf;
        for (std::size_t a = 0; a < subset.size(); ++a) m = std::min(m, lx[subset[a]] + vals[p][a]);
        return m;
    };
    auto phi = [&](const std::vector<double>& t) {
        double m = kInf;
        for (int i : subset) m = std::min(m, lx[i] + log_f(i, t));
        return m;
    };
    double best = -kInf;
    std::size_t arg = 0;
    for (std::size_t p = 0; p < dirs.size(); ++p) {
        double v = phi_cached(p);
        if (std::isnan(v)) continue;
        if (v > best) { best = v; arg = p; }
    }
    if (best == -kInf || best == kInf) return best;
    const int k = static_cast<int>(subset.size());
    if (k == 2) {
        // golden section on t in a bracket around the best sample
        double h = 1.0 / sweep_;
        double t0 = dirs[arg][subset[0]];
        double a = std::max(1e-12, t0 - 1.5 * h), b = std::min(1 - 1e-12, t0 + 1.5 * h);
        auto at = [&](double x) {
            std::vector<double> t(arity_, 0.0);
            t[subset[0]] = x;
            t[subset[1]] = 1 - x;
            double v = phi(t);
            return std::isnan(v) ? -kInf : v;
        };
        const double g = (std::sqrt(5.0) - 1) / 2;
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = at(c), fd = at(d);
        for (int it = 0; it < 60; ++it) {
            if (fc > fd) { b = d; d = c; fd = fc; c = b - g * (b - a); fc = at(c); }
            else { a = c; c = d; fc = fd; d = a + g * (b - a); fd = at(d); }
        }
        best = std::max({best, fc, fd});
    } else {
        // pattern search on the simplex
        std::vector<double> t = dirs[arg];
        double step = 1.0 / (k == 3 ? 48 : 16);
        for (int it = 0; it < 40; ++it) {
            bool moved = false;
            for (int a = 0; a < k && !moved; ++a)
                for (int b = 0; b < k && !moved; ++b) {
                    if (a == b) continue;
                    std::vector<double> u = t;
                    u[subset[a]] += step;
                    u[subset[b]] -= step;
                    if (u[subset[b]] <= 0) continue;
                    double v = phi(u);
                    if (!std::isnan(v) && v > best) { best = v; t = u; moved = true; }
                }
            if (!moved) step /= 2;
        }
    }
    return best;
}

bool FamilyRegion::contains(const std::map<std::string, double>& mags) const {
    for (double d : net_)
        if (d > 1e-12) return false;
    if (arity_ == 0) return true;
    std::vector<double> lx(arity_, 0.0);
    for (int i = 0; i < arity_; ++i)
        for (auto& [name, e] : x_[i]) {
            auto it = mags.find(name);
            if (it == mags.end()) throw MathError("unbound parameter '" + name + "'");
            lx[i] += e * std::log(std::abs(it->second));
        }
    for (int i = 0; i < arity_; ++i) {
        std::vector<double> t(arity_, 0.0);
        t[i] = 1;
        double v = log_f(i, t);
        if (std::isnan(v)) {
            for (auto& x : t) x += 1e-9;
            v = log_f(i, t);
        }
        if (!(lx[i] + v < 0)) return false;
    }
    for (auto& s : subsets_)
        if (!(sup_min(s, lx) < 0)) return false;
    return true;
}

bool RegionPredicate::contains(const std::map<std::string, double>& mags) const {
    if (parts.empty() && recognized_form) {
        for (auto& c : *recognized_form)
            if (!c.holds(mags)) return false;
        return true;
    }
    for (auto& p : parts)
        if (!p.contains(mags)) return false;
    return true;
}

std::vector<std::string> RegionPredicate::recognized_strings() const {
    std::vector<std::string> r;
    if (recognized_form)
        for (auto& c : *recognized_form) r.push_back(c.str());
    return r;
}

std::optional<RegionPredicate> kampe_region(const GammaTerm& term) {
    if (!term.integral()) return std::nullopt;
    const int n = term.arity;
    if (n == 0) return std::nullopt;
    std::int64_t p = 0, l = 0;
    std::vector<std::int64_t> num(n, 0), den(n, 0);
    for (auto& f : term.factors) {
        int ones = 0, zeros = 0, unit = -1;
        // a linear factor (c-k) is the Pochhammer ratio of (-c+k) up to sign
        auto nz = std::find_if(f.alpha.begin(), f.alpha.end(), [](const Rational& a) { return !a.is_zero(); });
        Rational flip = !f.gamma && nz != f.alpha.end() && nz->sign() < 0 ? Rational(-1) : Rational(1);
        for (int i = 0; i < n; ++i) {
            if (f.alpha[i] * flip == Rational(1)) { ++ones; unit = i; }
            else if (f.alpha[i].is_zero()) ++zeros;
        }
        if (zeros == n) continue;
        bool sum = n > 1 && ones == n;
        bool single = ones == 1 && zeros == n - 1;
        if (!sum && !single) return std::nullopt;
        if (!f.gamma) continue;
        if (sum) (f.power > 0 ? p : l) += std::abs(f.power);
        else (f.power > 0 ? num[unit] : den[unit]) += std::abs(f.power);
    }
    for (int i = 0; i < n; ++i)
        if (l + den[i] - p - num[i] < 0) return std::nullopt;
    RegionPredicate r;
    std::vector<PowerSumConstraint> cs;
    if (p > l) {
        PowerSumConstraint c;
        c.root = Rational(1, p - l);
        for (int i = 0; i < n; ++i) c.terms.push_back({1.0, x_monomial(term, i)});
        cs.push_back(c);
    } else {
        for (int i = 0; i < n; ++i) {
            PowerSumConstraint c;
            c.terms.push_back({1.0, x_monomial(term, i)});
            cs.push_back(c);
        }
    }
    r.recognized_form = cs;
    return r;
}

RegionPredicate family_region(const GammaTerm& term) {
    RegionPredicate r;
    r.parts.emplace_back(term);
    return r;
}

RegionPredicate convergence_region(const MBSpec& spec, const Cone& cone) {
    RegionPredicate r;
    std::vector<PowerSumConstraint> forms;
    bool recognized = true;
    for (auto& fam : intersection_families(spec, cone)) {
        if (fam.spurious) continue;
        GammaTerm term = gamma_ratio_term(spec, fam, cone.setting);
        FamilyRegion part(term);
        for (int i = 0; i < part.arity(); ++i)
            if (part.net_degrees()[i] > 1e-12)
                throw MathError("series of family " + fam.str() + " diverges for every nonzero parameter");
        if (term.arity == 1) {
            if (part.net_degrees()[0] == 0) {
                PowerSumConstraint c;
                c.terms.push_back({std::exp(part.log_f(0, {1.0})), x_monomial(term, 0)});
                forms.push_back(c);
            }
        } else if (term.arity >= 2) {
            auto k = kampe_region(term);
            if (k) forms.insert(forms.end(), k->recognized_form->begin(), k->recognized_form->end());
            else recognized = false;
        }
        r.parts.push_back(std::move(part));
    }
    if (recognized) {
        std::vector<PowerSumConstraint> uniq;
        std::set<std::string> seen;
        for (auto& c : forms)
            if (seen.insert(c.str()).second) uniq.push_back(c);
        r.recognized_form = uniq;
    }
    return r;
}

OnefoldReport onefold_classify(const MBSpec& spec) {
    if (spec.dimension != 1) throw SpecError("onefold classification needs a one-dimensional integral");
    OnefoldReport rep;
    for (auto& g : spec.gammas) {
        Rational a(g.form.coeffs[0]);
        rep.delta += Rational(g.power) * a;
        rep.alpha += Rational(g.power) * (a.sign() < 0 ? -a : a);
    }
    Setting st = default_setting(spec);
    std::optional<double> radius[2];
    for (int side : {1, -1}) {
        Cone cone = onefold_cone(spec, side, st);
        RegionPredicate region;
        double worst = -kInf;
        bool any = false, inside = false;
        std::optional<double> rad;
        for (auto& fam : intersection_families(spec, cone)) {
            if (fam.spurious) continue;
            GammaTerm term = gamma_ratio_term(spec, fam, st);
            FamilyRegion part(term);
            if (term.arity == 1) {
                any = true;
                double d = part.net_degrees()[0];
                worst = std::max(worst, d);
                if (std::abs(d) < 1e-12 && term.parameter_powers.size() == 1) {
                    // |x|^e < rho
                    double e = term.parameter_powers[0].second[0].to_double();
                    double rho = std::exp(-part.log_f(0, {1.0}));
                    double rr = std::pow(rho, 1.0 / e);
                    inside = e > 0;
                    rad = !rad ? rr : inside ? std::min(*rad, rr) : std::max(*rad, rr);
                }
            }
            region.parts.push_back(std::move(part));
        }
        std::string verdict;
        if (!any) verdict = "terminating";
        else if (worst > 1e-12) verdict = "divergent_asymptotic";
        else if (worst < -1e-12) verdict = "convergent_everywhere";
        else verdict = inside ? "convergent_inside_disk" : "convergent_outside_disk";
        if (verdict.rfind("convergent_", 0) == 0 && verdict != "convergent_everywhere") radius[side > 0 ? 0 : 1] = rad;
        (side > 0 ? rep.right_verdict : rep.left_verdict) = verdict;
        (side > 0 ? rep.right_region : rep.left_region) = std::move(region);
    }
    rep.disk_radius = radius[0] ? radius[0] : radius[1];
    return rep;
}

}  // namespace mb
