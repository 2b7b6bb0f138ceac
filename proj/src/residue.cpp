#include "mbseries/residue.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "mbseries/special.hpp"

namespace mb {

// ---------------------------------------------------------------- Poly

Poly Poly::constant(int n, const BigQ& c) {
    Poly p;
    p.n = n;
    if (c != 0) p.terms[std::vector<int>(n, 0)] = c;
    return p;
}

Poly Poly::linear(const IVec& a) {
    Poly p;
    p.n = static_cast<int>(a.size());
    for (int i = 0; i < p.n; ++i) {
        if (a[i] == 0) continue;
        std::vector<int> e(p.n, 0);
        e[i] = 1;
        p.terms[e] = BigQ(a[i]);
    }
    return p;
}

Poly Poly::monomial(int n, int var, int power) {
    Poly p;
    p.n = n;
    std::vector<int> e(n, 0);
    e[var] = power;
    p.terms[e] = 1;
    return p;
}

bool Poly::is_zero() const { return terms.empty(); }

int Poly::degree() const {
    int d = -1;
    for (auto& [e, c] : terms) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
    return d;
}

Poly& Poly::operator+=(const Poly& o) {
    n = std::max(n, o.n);
    for (auto& [e, c] : o.terms) {
        auto& t = terms[e];
        t += c;
        if (t == 0) terms.erase(e);
    }
    return *this;
}

Poly& Poly::operator-=(const Poly& o) {
    n = std::max(n, o.n);
    for (auto& [e, c] : o.terms) {
        auto& t = terms[e];
        t -= c;
        if (t == 0) terms.erase(e);
    }
    return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    r.n = std::max(a.n, b.n);
    for (auto& [ea, ca] : a.terms)
        for (auto& [eb, cb] : b.terms) {
            std::vector<int> e(r.n);
            for (int i = 0; i < r.n; ++i) e[i] = ea[i] + eb[i];
            auto& t = r.terms[e];
            t += ca * cb;
            if (t == 0) r.terms.erase(e);
        }
    return r;
}

Poly Poly::pow(int k) const {
    Poly r = constant(n, 1);
    for (int i = 0; i < k; ++i) r = r * *this;
    return r;
}

bool operator==(const Poly& a, const Poly& b) { return a.terms == b.terms; }

std::string Poly::str(const std::vector<std::string>& vars) const {
    if (terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
        const auto& [e, c] = *it;
        BigQ mag = c < 0 ? BigQ(-c) : c;
        os << (c < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
        bool is_const = std::all_of(e.begin(), e.end(), [](int x) { return x == 0; });
        if (mag != 1 || is_const) os << mag.str() << (is_const ? "" : "*");
        bool need = false;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (!e[i]) continue;
            os << (need ? "*" : "") << (i < vars.size() ? vars[i] : "w" + std::to_string(i + 1));
            if (e[i] > 1) os << "^" << e[i];
            need = true;
        }
        first = false;
    }
    return os.str();
}

// ---------------------------------------------------------------- Jet

Jet::Jet(std::vector<int> order) : order_(std::move(order)) {
    std::size_t n = 1;
    for (int o : order_) n *= static_cast<std::size_t>(o + 1);
    c_.assign(n, cplx{});
}

Jet Jet::constant(std::vector<int> order, cplx c) {
    Jet j(std::move(order));
    j.c_[0] = c;
    return j;
}

Jet Jet::linear(std::vector<int> order, const std::vector<cplx>& a) {
    Jet j(std::move(order));
    for (int i = 0; i < j.dimension(); ++i) {
        if (j.order_[i] < 1) continue;
        std::vector<int> e(j.dimension(), 0);
        e[i] = 1;
        j.at(e) = a[i];
    }
    return j;
}

std::size_t Jet::index(const std::vector<int>& e) const {
    std::size_t k = 0;
    for (std::size_t i = 0; i < order_.size(); ++i) k = k * static_cast<std::size_t>(order_[i] + 1) + e[i];
    return k;
}

std::vector<int> Jet::exponent(std::size_t flat) const {
    std::vector<int> e(order_.size());
    for (std::size_t i = order_.size(); i-- > 0;) {
        e[i] = static_cast<int>(flat % static_cast<std::size_t>(order_[i] + 1));
        flat /= static_cast<std::size_t>(order_[i] + 1);
    }
    return e;
}

bool Jet::contains(const std::vector<int>& e) const {
    for (std::size_t i = 0; i < order_.size(); ++i)
        if (e[i] < 0 || e[i] > order_[i]) return false;
    return true;
}

Jet& Jet::operator+=(const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

Jet& Jet::operator*=(cplx s) {
    for (auto& x : c_) x *= s;
    return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.order_);
    const std::size_t n = a.c_.size();
    std::vector<std::vector<int>> ex(n);
    for (std::size_t i = 0; i < n; ++i) ex[i] = a.exponent(i);
    std::vector<int> e(a.order_.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a.c_[i] == cplx{}) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (b.c_[j] == cplx{}) continue;
            bool ok = true;
            for (std::size_t k = 0; k < e.size(); ++k) {
                e[k] = ex[i][k] + ex[j][k];
                if (e[k] > a.order_[k]) { ok = false; break; }
            }
            if (ok) r.c_[r.index(e)] += a.c_[i] * b.c_[j];
        }
    }
    return r;
}

Jet Jet::exp_nilpotent() const {
    int total = std::accumulate(order_.begin(), order_.end(), 0);
    Jet result = constant(order_, 1.0);
    Jet power = constant(order_, 1.0);
    for (int k = 1; k <= total; ++k) {
        power = power * *this;
        power *= 1.0 / k;
        result += power;
    }
    return result;
}

Jet Jet::compose(const std::vector<cplx>& c, const Jet& x) {
    // Horner
    Jet r = constant(x.order_, c.empty() ? cplx{} : c.back());
    for (std::size_t k = c.size(); k-- > 1;) {
        r = r * x;
        r.c_[0] += c[k - 1];
    }
    return r;
}

// ---------------------------------------------------------------- localize

namespace {

cplx eval_point(const EpsAffine& v, double eps) { return cplx(v.at(eps), 0.0); }

}  // namespace

LocalForm localize(const MBSpec& spec, const Normalized& nf, const EVec& point, const ParamMap& params,
                   const Setting& st) {
    LocalForm lf;
    lf.dimension = nf.dimension;
    lf.shift = point;
    auto info = analyze_point(nf, point, st);
    cplx log_scale = std::log(spec.constant.eval(st.eps) * nf.sign);

    // per direction: net exponent of <n,w>
    std::vector<std::pair<IVec, int>> dirs;
    auto add_dir = [&](const IVec& n, int e) {
        auto it = std::find_if(dirs.begin(), dirs.end(), [&](auto& d) { return d.first == n; });
        if (it == dirs.end()) dirs.emplace_back(n, e);
        else it->second += e;
    };
    for (std::size_t j = 0; j < nf.factors.size(); ++j) {
        const auto& f = nf.factors[j];
        bool active = info.levels.count(static_cast<int>(j)) > 0;
        if (!active) {
            LocalForm::Piece p;
            p.kind = f.gamma ? LocalForm::Piece::Kind::lgamma : LocalForm::Piece::Kind::log;
            p.a = f.a;
            p.v = eval_point(f.at(point), st.eps);
            p.q = f.power;
            lf.pieces.push_back(p);
            continue;
        }
        IVec n = primitive(f.a);
        double g = static_cast<double>(gcd_all(f.a));
        if (!f.gamma) {
            // (g <n,w>)^power
            log_scale += static_cast<double>(f.power) * std::log(g);
            add_dir(n, f.power);
            continue;
        }
        // Gamma(-K + x)^q = [(-1)^K Gamma(1+x) Gamma(1-x) / (x Gamma(K+1-x))]^q
        std::int64_t K = info.levels.at(static_cast<int>(j));
        if ((K * f.power) % 2 != 0) log_scale += cplx(0.0, kPi);
        IVec neg(f.a.size());
        for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -f.a[i];
        lf.pieces.push_back({LocalForm::Piece::Kind::lgamma, f.a, 1.0, f.power});
        lf.pieces.push_back({LocalForm::Piece::Kind::lgamma, neg, 1.0, f.power});
        lf.pieces.push_back({LocalForm::Piece::Kind::lgamma, neg, cplx(static_cast<double>(K + 1)), -f.power});
        log_scale -= static_cast<double>(f.power) * std::log(g);
        add_dir(n, -f.power);
    }
    for (auto& d : info.divisors) {
        auto it = std::find_if(dirs.begin(), dirs.end(), [&](auto& x) { return x.first == d.normal; });
        lf.divisors.push_back({d.normal, -it->second});
    }
    for (auto& [n, e] : dirs)
        if (e > 0) lf.zeros.emplace_back(n, e);

    // parameters: u^{<c,z>} = u^{<c,P>} exp(ln u <c,w>)
    auto logs = param_logs(spec, params);
    lf.log_params.assign(nf.dimension, cplx{});
    for (std::size_t p = 0; p < spec.parameters.size(); ++p) {
        const auto& c = spec.parameters[p].exponent;
        double cp = 0;
        for (int i = 0; i < nf.dimension; ++i) {
            cp += static_cast<double>(c[i]) * point[i].at(st.eps);
            lf.log_params[i] += logs[p] * static_cast<double>(c[i]);
        }
        log_scale += logs[p] * cp;
    }
    lf.log_scale = log_scale;
    return lf;
}

LocalForm localize(const MBSpec& spec, const IndexedFamily& family, const IVec& idx, const ParamMap& params,
                   const Setting& st) {
    if (family.spurious) throw MathError("undecidable: residue requested on a spurious family " + family.str());
    if (static_cast<int>(idx.size()) != family.arity()) throw MathError("index vector does not match family arity");
    for (auto k : idx)
        if (k < 0) throw MathError("index vector out of domain");
    auto nf = normalize(spec, st);
    return localize(spec, nf, family.point(idx), params, st);
}

LocalKind classify_local(const LocalForm& lf) {
    for (auto& d : lf.divisors) {
        int nz = 0;
        for (auto c : d.normal) nz += c != 0;
        if (nz != 1) return LocalKind::oblique;
    }
    return LocalKind::cauchy;
}

// ---------------------------------------------------------------- transformation law

namespace {

void monomials_of_degree(int n, int d, std::vector<std::vector<int>>& out) {
    std::vector<int> e(n, 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == n - 1) {
            e[i] = left;
            out.push_back(e);
            return;
        }
        for (int k = left; k >= 0; --k) {
            e[i] = k;
            rec(i + 1, left - k);
        }
    };
    if (n == 0) return;
    rec(0, d);
}

// solve M x = b exactly; nullopt if inconsistent
std::optional<std::vector<BigQ>> solve_rational(std::vector<std::vector<BigQ>> M, std::vector<BigQ> b) {
    const std::size_t rows = M.size();
    const std::size_t cols = rows ? M[0].size() : 0;
    std::vector<int> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && M[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(M[p], M[r]);
        std::swap(b[p], b[r]);
        BigQ inv = 1 / M[r][c];
        for (std::size_t k = c; k < cols; ++k) M[r][k] *= inv;
        b[r] *= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || M[i][c] == 0) continue;
            BigQ f = M[i][c];
            for (std::size_t k = c; k < cols; ++k) M[i][k] -= f * M[r][k];
            b[i] -= f * b[r];
        }
        pivot_col.push_back(static_cast<int>(c));
        ++r;
    }
    for (std::size_t i = r; i < rows; ++i)
        if (b[i] != 0) return std::nullopt;
    std::vector<BigQ> x(cols, 0);
    for (std::size_t i = 0; i < r; ++i) x[pivot_col[i]] = b[i];
    return x;
}

// A-row with sum_j A_j f_j = w_var^e, homogeneous ansatz
std::optional<std::vector<Poly>> ideal_row(const std::vector<Poly>& f, int var, int e) {
    const int n = f.front().n;
    std::vector<std::vector<std::vector<int>>> basis(f.size());
    std::size_t unknowns = 0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        int d = e - f[j].degree();
        if (d >= 0) monomials_of_degree(n, d, basis[j]);
        unknowns += basis[j].size();
    }
    if (unknowns == 0) return std::nullopt;
    std::vector<std::vector<int>> eqs;
    monomials_of_degree(n, e, eqs);
    std::map<std::vector<int>, std::size_t> row_of;
    for (std::size_t i = 0; i < eqs.size(); ++i) row_of[eqs[i]] = i;
    std::vector<std::vector<BigQ>> M(eqs.size(), std::vector<BigQ>(unknowns, 0));
    std::vector<BigQ> b(eqs.size(), 0);
    std::vector<int> target(n, 0);
    target[var] = e;
    b[row_of.at(target)] = 1;
    std::size_t col = 0;
    for (std::size_t j = 0; j < f.size(); ++j)
        for (auto& m : basis[j]) {
            for (auto& [fe, fc] : f[j].terms) {
                std::vector<int> s(n);
                for (int i = 0; i < n; ++i) s[i] = fe[i] + m[i];
                M[row_of.at(s)][col] += fc;
            }
            ++col;
        }
    auto x = solve_rational(std::move(M), std::move(b));
    if (!x) return std::nullopt;
    std::vector<Poly> row;
    col = 0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        Poly p;
        p.n = n;
        for (auto& m : basis[j]) {
            if ((*x)[col] != 0) p.terms[m] = (*x)[col];
            ++col;
        }
        row.push_back(p);
    }
    return row;
}

Poly determinant(const std::vector<std::vector<Poly>>& A) {
    const std::size_t n = A.size();
    if (n == 1) return A[0][0];
    if (n == 2) return A[0][0] * A[1][1] - A[0][1] * A[1][0];
    Poly d;
    d.n = A[0][0].n;
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<std::vector<Poly>> minor;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<Poly> row;
            for (std::size_t k = 0; k < n; ++k)
                if (k != c) row.push_back(A[r][k]);
            minor.push_back(row);
        }
        Poly term = A[0][c] * determinant(minor);
        if (c % 2) d -= term;
        else d += term;
    }
    return d;
}

}  // namespace

TransformationCertificate solve_transformation(const LocalForm& lf, const std::vector<std::vector<int>>& groups,
                                               const std::optional<std::vector<int>>& target) {
    const int n = lf.dimension;
    if (static_cast<int>(groups.size()) != n) throw MathError("transformation law needs one group per variable");
    TransformationCertificate cert;
    cert.groups = groups;
    int total = 0;
    std::vector<int> seen(lf.divisors.size(), 0);
    for (auto& g : groups) {
        if (g.empty()) throw MathError("empty divisor group");
        Poly p = Poly::constant(n, 1);
        std::vector<IVec> normals;
        for (int d : g) {
            p = p * Poly::linear(lf.divisors[d].normal).pow(lf.divisors[d].order);
            total += lf.divisors[d].order;
            ++seen[d];
        }
        cert.f.push_back(p);
    }
    for (int s : seen)
        if (s != 1) throw MathError("divisor groups must partition the divisors");
    // groups sharing a direction have a common zero set beyond the origin
    for (std::size_t a = 0; a < groups.size(); ++a)
        for (std::size_t b = a + 1; b < groups.size(); ++b)
            for (int x : groups[a])
                for (int y : groups[b])
                    if (lf.divisors[x].normal == lf.divisors[y].normal)
                        throw MathError("divisor groups share a common factor");
    const int cap = 4 * std::max(total, 1);
    cert.A.resize(n);
    cert.g_exponents.resize(n);
    for (int i = 0; i < n; ++i) {
        std::optional<std::vector<Poly>> row;
        if (target) {
            row = ideal_row(cert.f, i, (*target)[i]);
            if (!row) throw MathError("requested transformation target is not in the ideal");
            cert.g_exponents[i] = (*target)[i];
        } else {
            for (int e = 1; e <= cap && !row; ++e) {
                row = ideal_row(cert.f, i, e);
                if (row) cert.g_exponents[i] = e;
            }
            if (!row) throw MathError("transformation law: no solution within the degree bound");
        }
        cert.A[i] = *row;
    }
    cert.detA = determinant(cert.A);
    if (!verify_certificate(cert)) throw std::logic_error("transformation certificate failed verification");
    return cert;
}

bool verify_certificate(const TransformationCertificate& cert) {
    const int n = static_cast<int>(cert.f.size());
    for (int i = 0; i < n; ++i) {
        Poly s;
        s.n = n;
        for (int j = 0; j < n; ++j) s += cert.A[i][j] * cert.f[j];
        if (!(s == Poly::monomial(n, i, cert.g_exponents[i]))) return false;
    }
    return true;
}

// ---------------------------------------------------------------- jets

Jet local_jet(const LocalForm& lf, const std::vector<int>& orders) {
    const int n = lf.dimension;
    const int total = std::accumulate(orders.begin(), orders.end(), 0);
    Jet log_jet = Jet::linear(orders, lf.log_params);
    cplx log_scale = lf.log_scale;
    for (auto& p : lf.pieces) {
        std::vector<cplx> a(n);
        for (int i = 0; i < n; ++i) a[i] = static_cast<double>(p.a[i]);
        Jet x = Jet::linear(orders, a);
        std::vector<cplx> c(total + 1);
        double q = p.q;
        if (p.kind == LocalForm::Piece::Kind::lgamma) {
            if (p.v.imag() == 0.0 && is_nonpositive_integer(p.v.real(), 1e-12))
                throw std::logic_error("numerator gamma evaluated at a pole");
            c[0] = q * lgamma_c(p.v);
            double fact = 1;
            for (int k = 1; k <= total; ++k) {
                fact *= k;
                c[k] = q * polygamma(k - 1, p.v) / fact;
            }
        } else {
            c[0] = q * std::log(p.v);
            cplx vp = 1;
            for (int k = 1; k <= total; ++k) {
                vp *= p.v;
                c[k] = q * ((k % 2) ? 1.0 : -1.0) / (static_cast<double>(k) * vp);
            }
        }
        log_scale += c[0];
        c[0] = 0;
        log_jet += Jet::compose(c, x);
    }
    Jet h = log_jet.exp_nilpotent();
    for (auto& [nrm, k] : lf.zeros) {
        std::vector<cplx> a(n);
        for (int i = 0; i < n; ++i) a[i] = static_cast<double>(nrm[i]);
        Jet x = Jet::linear(orders, a);
        for (int r = 0; r < k; ++r) h = h * x;
    }
    h *= std::exp(log_scale);
    return h;
}

cplx residue_with(const LocalForm& lf, const TransformationCertificate& cert) {
    const int n = lf.dimension;
    std::vector<int> t(n);
    for (int i = 0; i < n; ++i) t[i] = cert.g_exponents[i] - 1;
    Jet h = local_jet(lf, t);
    cplx acc = 0;
    for (auto& [e, c] : cert.detA.terms) {
        std::vector<int> k(n);
        for (int i = 0; i < n; ++i) k[i] = t[i] - e[i];
        acc += h.coeff(k) * c.convert_to<double>();
    }
    return static_cast<double>(cert.sign) * acc;
}

TransformationCertificate certificate_for(const Cone& cone, const LocalForm& lf) {
    PointInfo info;
    info.point = lf.shift;
    for (auto& d : lf.divisors) info.divisors.push_back({d.normal, d.order, {}});
    auto o = orient(cone, info);
    auto cert = solve_transformation(lf, o.groups);
    // sign(det of the group normals) times the Grothendieck residue
    cert.sign = o.sign;
    return cert;
}

cplx residue_at(const MBSpec& spec, const Cone& cone, const IndexedFamily& family, const IVec& idx,
                const ParamMap& params) {
    auto lf = localize(spec, family, idx, params, cone.setting);
    auto cert = certificate_for(cone, lf);
    return residue_with(lf, cert);
}

ResidueEngine::ResidueEngine(const MBSpec& spec, const Cone& cone, ParamMap params)
    : spec_(spec), cone_(cone), params_(std::move(params)), nf_(normalize(spec, cone.setting)) {}

cplx ResidueEngine::term(const IndexedFamily& family, const IVec& idx) {
    if (family.spurious) throw MathError("undecidable: residue requested on a spurious family " + family.str());
    auto lf = localize(spec_, nf_, family.point(idx), params_, cone_.setting);
    std::string key;
    for (auto& d : lf.divisors) {
        for (auto c : d.normal) key += std::to_string(c) + ",";
        key += "^" + std::to_string(d.order) + ";";
    }
    std::shared_ptr<const TransformationCertificate> cert;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) cert = it->second;
    }
    if (!cert) {
        auto made = std::make_shared<const TransformationCertificate>(certificate_for(cone_, lf));
        std::lock_guard<std::mutex> lock(mu_);
        cert = cache_.emplace(key, made).first->second;
    }
    return residue_with(lf, *cert);
}

}  // namespace mb
