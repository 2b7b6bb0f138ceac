#include "mbseries/series.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

namespace mb {

int thread_count() {
    if (const char* env = std::getenv("MB_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

int order_for(const std::vector<int>& orders, int i) {
    if (orders.empty()) return 0;
    return orders[std::min<std::size_t>(i, orders.size() - 1)];
}

// shell of an index vector when the orders differ per index
int shell_of(const IVec& k, const std::vector<int>& ord, int top) {
    int s = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (ord[i] == 0) continue;
        auto v = static_cast<int>((k[i] * top + ord[i] - 1) / ord[i]);
        s = std::max(s, v);
    }
    return s;
}

std::map<std::string, double> magnitudes(const ParamMap& params) {
    std::map<std::string, double> m;
    for (auto& [k, v] : params) m[k] = std::abs(v);
    return m;
}

}  // namespace

FamilySum sum_family(ResidueEngine& engine, const IndexedFamily& family, const std::vector<int>& orders) {
    const int a = family.arity();
    FamilySum out;
    if (a == 0) {
        out.value = engine.term(family, {});
        out.shells = {std::abs(out.value)};
        out.terms = 1;
        return out;
    }
    std::vector<int> ord(a);
    for (int i = 0; i < a; ++i) ord[i] = std::max(0, order_for(orders, i));
    const int top = *std::max_element(ord.begin(), ord.end());

    struct Block {
        cplx value;
        std::vector<double> shells;
        long terms = 0;
    };
    std::vector<Block> blocks(ord[0] + 1);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex fail_mu;

    auto work = [&] {
        for (;;) {
            int b = next.fetch_add(1);
            if (b > ord[0]) return;
            Block blk;
            blk.shells.assign(top + 1, 0.0);
            try {
                IVec k(a, 0);
                k[0] = b;
                for (;;) {
                    cplx t = engine.term(family, k);
                    blk.value += t;
                    blk.shells[shell_of(k, ord, top)] += std::abs(t);
                    ++blk.terms;
                    int i = 1;
                    while (i < a && ++k[i] > ord[i]) k[i++] = 0;
                    if (i == a) break;
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(fail_mu);
                if (!failure) failure = std::current_exception();
                next = ord[0] + 1;
                return;
            }
            blocks[b] = std::move(blk);
        }
    };
    const int nt = std::min(thread_count(), ord[0] + 1);
    if (nt <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    out.shells.assign(top + 1, 0.0);
    for (auto& blk : blocks) {
        out.value += blk.value;
        out.terms += blk.terms;
        for (int s = 0; s <= top; ++s) out.shells[s] += blk.shells[s];
    }
    return out;
}

double tail_from_shells(const std::vector<double>& shells) {
    if (shells.size() < 2) return shells.empty() ? 0.0 : shells.back();
    double last = shells.back();
    double prev = shells[shells.size() - 2];
    if (last == 0.0) return 0.0;
    if (prev == 0.0) return last;
    double rho = last / prev;
    if (rho < 1.0) return last * rho / (1.0 - rho);
    return last * static_cast<double>(shells.size());
}

SeriesResult sum_cone(const MBSpec& spec, const Cone& cone, const std::vector<int>& orders, const ParamMap& params,
                      bool check_region) {
    SeriesResult res;
    res.orders = orders;
    if (check_region) {
        try {
            auto region = convergence_region(spec, cone);
            if (!region.contains(magnitudes(params))) {
                res.inside_region = false;
                res.note = "parameter point outside the convergence region of this cone";
            }
        } catch (const MathError& e) {
            res.inside_region = false;
            res.note = e.what();
        }
    }
    auto fams = intersection_families(spec, cone);
    ResidueEngine engine(spec, cone, params);
    std::vector<double> shells;
    for (auto& f : fams) {
        if (f.spurious) continue;
        auto fs = sum_family(engine, f, orders);
        res.value += fs.value;
        res.terms += fs.terms;
        res.breakdown.emplace_back(f.str(), fs.value);
        if (shells.size() < fs.shells.size()) shells.resize(fs.shells.size(), 0.0);
        for (std::size_t s = 0; s < fs.shells.size(); ++s) shells[s] += fs.shells[s];
    }
    res.tail_estimate = tail_from_shells(shells);
    return res;
}

SeriesResult onefold_series(const MBSpec& spec, int side, int order, const ParamMap& params) {
    auto cone = onefold_cone(spec, side, default_setting(spec));
    return sum_cone(spec, cone, {order}, params);
}

Selection select_cone(const MBSpec& spec, const std::map<std::string, double>& mags) {
    Selection sel;
    auto cones = enumerate_cones(spec);
    std::vector<std::pair<int, RegionPredicate>> hits;
    for (auto& c : cones) {
        try {
            auto region = convergence_region(spec, c);
            if (region.contains(mags)) hits.emplace_back(c.id, std::move(region));
        } catch (const MathError&) {
            // divergent cone: never selected
        }
    }
    for (auto& h : hits) sel.candidates.push_back(h.first);
    if (hits.empty()) {
        sel.reason = "unreachable";
        return sel;
    }
    if (hits.size() == 1) {
        sel.cone = hits[0].first;
        sel.reason = "unique";
        return sel;
    }
    // sampled area on a log grid, 10^-3 .. 10^3 per parameter
    std::vector<std::string> names;
    for (auto& p : spec.parameters) names.push_back(p.name);
    const int np = static_cast<int>(names.size());
    const int g = np <= 1 ? 400 : np == 2 ? 60 : 18;
    long total = 1;
    for (int i = 0; i < np; ++i) total *= g;
    std::size_t best = 0;
    long best_count = -1;
    for (std::size_t h = 0; h < hits.size(); ++h) {
        long count = 0;
        for (long flat = 0; flat < total; ++flat) {
            std::map<std::string, double> m;
            long r = flat;
            for (int i = 0; i < np; ++i) {
                int c = static_cast<int>(r % g);
                r /= g;
                m[names[i]] = std::pow(10.0, -3.0 + 6.0 * (c + 0.5) / g);
            }
            if (hits[h].second.contains(m)) ++count;
        }
        if (best_count < 0 || count < best_count) {
            best_count = count;
            best = h;
        }
    }
    sel.cone = hits[best].first;
    sel.reason = "smallest region among overlapping cones";
    return sel;
}

namespace {

constexpr int kIndexWindow = 16;
constexpr int kIndexWide = 40;
constexpr double kSpaceWindow = 4.0;

void for_each_index(int arity, int n, const std::function<void(const IVec&)>& fn) {
    IVec k(arity, 0);
    if (arity == 0) {
        fn(k);
        return;
    }
    for (;;) {
        fn(k);
        int i = 0;
        while (i < arity && ++k[i] > n) k[i++] = 0;
        if (i == arity) return;
    }
}

std::set<EVec> all_points(const std::vector<IndexedFamily>& fams, int n) {
    std::set<EVec> out;
    for (auto& f : fams) {
        if (f.spurious) continue;
        for_each_index(f.arity(), n, [&](const IVec& k) { out.insert(f.point(k)); });
    }
    return out;
}

struct Window {
    std::vector<double> center;
    double half = 0;
    double eps = 0;
    bool contains(const EVec& p) const {
        for (std::size_t i = 0; i < p.size(); ++i)
            if (std::abs(p[i].at(eps) - center[i]) > half) return false;
        return true;
    }
};

// Decompose the window points of `family` that are absent from `other` into
// sub-families (offset + a subset of the index columns).
std::vector<IndexedFamily> split_family(const IndexedFamily& family, const std::set<EVec>& other, const Window& w) {
    const int a = family.arity();
    std::set<IVec> target;
    for_each_index(a, kIndexWindow, [&](const IVec& k) {
        auto p = family.point(k);
        if (w.contains(p) && !other.count(p)) target.insert(k);
    });
    std::vector<IndexedFamily> out;
    std::set<IVec> covered;
    while (covered.size() < target.size()) {
        struct Cand {
            int mask = 0;
            IVec start;
            std::vector<IVec> pts;
        };
        std::optional<Cand> best;
        for (int mask = (1 << a) - 1; mask >= 0; --mask) {
            for (auto& k0 : target) {
                if (covered.count(k0)) continue;
                // the start must be minimal along every free direction
                bool minimal = true;
                for (int i = 0; i < a && minimal; ++i) {
                    if (!(mask >> i & 1) || k0[i] == 0) continue;
                    IVec prev = k0;
                    --prev[i];
                    if (target.count(prev) && !covered.count(prev)) minimal = false;
                }
                if (!minimal) continue;
                Cand c{mask, k0, {}};
                bool ok = true;
                int free = __builtin_popcount(static_cast<unsigned>(mask));
                for_each_index(free, kIndexWindow, [&](const IVec& j) {
                    if (!ok) return;
                    IVec k = k0;
                    int t = 0;
                    for (int i = 0; i < a; ++i)
                        if (mask >> i & 1) k[i] += j[t++];
                    bool in_range = true;
                    for (int i = 0; i < a; ++i)
                        if (k[i] > kIndexWindow) in_range = false;
                    if (!in_range || !w.contains(family.point(k))) return;
                    if (!target.count(k) || covered.count(k)) {
                        ok = false;
                        return;
                    }
                    c.pts.push_back(k);
                });
                if (!ok || c.pts.empty()) continue;
                if (!best || c.pts.size() > best->pts.size()) best = std::move(c);
            }
        }
        if (!best) throw MathError("relocation: crossed poles do not split into families");
        for (auto& k : best->pts) covered.insert(k);
        IndexedFamily sub;
        sub.offset = family.point(best->start);
        sub.divisor_orders = family.divisor_orders;
        sub.index_matrix.assign(family.index_matrix.size(), RVec{});
        for (std::size_t r = 0; r < family.index_matrix.size(); ++r)
            for (int i = 0; i < a; ++i)
                if (best->mask >> i & 1) sub.index_matrix[r].push_back(family.index_matrix[r][i]);
        out.push_back(std::move(sub));
    }
    return out;
}

void check_relocation_base(const MBSpec& spec, const RVec& base) {
    auto bad = [&](const LinearForm& f, double eps, bool gamma) {
        double v = f.at(base).at(eps);
        if (gamma) return v <= 1e-12 && std::abs(v - std::round(v)) < 1e-12;
        return std::abs(v) < 1e-12;
    };
    for (double eps : {spec.eps_value(), 0.0}) {
        for (auto& g : spec.gammas)
            if (g.power > 0 && bad(g.form, eps, true))
                throw MathError("relocation path ambiguous: new base lies on a pole at eps = " + std::to_string(eps));
        for (auto& m : spec.monomials)
            if (m.exponent < 0 && bad(m.form, eps, false))
                throw MathError("relocation path ambiguous: new base lies on a pole at eps = " + std::to_string(eps));
    }
}

}  // namespace

EpsResolution epsilon_resolve(const MBSpec& spec, const Cone& cone, const RVec& new_base, const ParamMap& params,
                              const std::vector<int>& orders) {
    if (static_cast<int>(new_base.size()) != spec.dimension) throw SpecError("relocation target has wrong dimension");
    check_relocation_base(spec, new_base);
    EpsResolution res;
    res.new_base = new_base;

    MBSpec moved = spec;
    moved.base_point = new_base;
    const Setting st2 = default_setting(moved);
    auto cones2 = enumerate_cones(moved, st2);

    Window w;
    w.eps = cone.setting.eps;
    double shift = 0;
    for (int i = 0; i < spec.dimension; ++i) {
        double a = cone.setting.base[i], b = st2.base[i];
        w.center.push_back(0.5 * (a + b));
        shift = std::max(shift, std::abs(a - b));
    }
    w.half = kSpaceWindow + shift;

    auto fams_a = intersection_families(spec, cone);
    auto wide_a = all_points(fams_a, kIndexWide);
    std::set<EVec> win_a;
    for (auto& p : all_points(fams_a, kIndexWindow))
        if (w.contains(p)) win_a.insert(p);

    int best_id = -1;
    std::size_t best_overlap = 0;
    std::vector<IndexedFamily> fams_b;
    for (auto& c : cones2) {
        auto fb = intersection_families(moved, c);
        std::size_t overlap = 0;
        for (auto& p : all_points(fb, kIndexWindow))
            if (w.contains(p) && win_a.count(p)) ++overlap;
        if (best_id < 0 || overlap > best_overlap) {
            best_id = c.id;
            best_overlap = overlap;
            fams_b = std::move(fb);
        }
    }
    if (best_id < 0) throw MathError("relocation: no cone at the new base");
    res.new_cone = best_id;
    const Cone& cone_b = cones2[best_id - 1];
    auto wide_b = all_points(fams_b, kIndexWide);

    for (auto& f : fams_a) {
        if (f.spurious) continue;
        for (auto& sub : split_family(f, wide_b, w)) res.corrections.push_back({+1, sub});
    }
    for (auto& f : fams_b) {
        if (f.spurious) continue;
        for (auto& sub : split_family(f, wide_a, w)) res.corrections.push_back({-1, sub});
    }

    res.original_value = sum_cone(spec, cone, orders, params, false).value;
    res.relocated_value = sum_cone(moved, cone_b, orders, params, false).value;
    ResidueEngine eng_a(spec, cone, params);
    ResidueEngine eng_b(moved, cone_b, params);
    for (auto& c : res.corrections) {
        auto& eng = c.sign > 0 ? eng_a : eng_b;
        res.correction_value += static_cast<double>(c.sign) * sum_family(eng, c.family, orders).value;
    }
    res.identity_residual = res.original_value - (res.relocated_value + res.correction_value);
    return res;
}

LaurentFit laurent_fit(const std::vector<std::pair<double, cplx>>& samples, int lowest, int count) {
    if (count <= 0 || static_cast<int>(samples.size()) < count)
        throw MathError("Laurent fit needs at least as many samples as coefficients");
    const int n = static_cast<int>(samples.size());
    Eigen::MatrixXd v(n, count);
    Eigen::VectorXd re(n), im(n);
    for (int r = 0; r < n; ++r) {
        double e = samples[r].first;
        if (e == 0.0) throw MathError("Laurent fit sample at eps = 0");
        for (int c = 0; c < count; ++c) v(r, c) = std::pow(e, lowest + c);
        re(r) = samples[r].second.real();
        im(r) = samples[r].second.imag();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd xr = svd.solve(re), xi = svd.solve(im);
    LaurentFit fit;
    fit.lowest = lowest;
    fit.samples = samples;
    auto sv = svd.singularValues();
    fit.condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    for (int c = 0; c < count; ++c) fit.coeffs.emplace_back(xr(c), xi(c));
    return fit;
}

std::vector<std::pair<double, cplx>> eps_samples(const MBSpec& spec, int cone_id, const std::vector<Rational>& samples,
                                                 const ParamMap& params, const std::vector<int>& orders) {
    if (!spec.epsilon) throw MathError("eps sampling needs an eps-dependent spec");
    auto centroid = polytope_centroid(spec, default_setting(spec));
    if (!centroid) throw MathError("fundamental polytope is unbounded; no canonical contour for eps sampling");
    std::vector<std::pair<double, cplx>> out;
    for (auto& e : samples) {
        MBSpec s = spec;
        s.epsilon = e;
        s.base_point.clear();
        for (auto& c : *centroid) s.base_point.push_back(c.c + c.e * e);
        auto cones = enumerate_cones(s);
        if (cone_id < 1 || cone_id > static_cast<int>(cones.size()))
            throw MathError("cone " + std::to_string(cone_id) + " does not exist at eps = " + e.str());
        auto r = sum_cone(s, cones[cone_id - 1], orders, params, false);
        out.emplace_back(e.to_double(), r.value);
    }
    return out;
}

}  // namespace mb
