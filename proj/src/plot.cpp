#include "mbseries/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "mbseries/convergence.hpp"

namespace mb {

namespace {

const char* kPalette[] = {"#1f4e9c", "#c0392b", "#2e8b57", "#e67e22", "#8e44ad", "#16a085", "#7f8c8d", "#b7950b"};
constexpr int kPaletteSize = 8;
constexpr double kSeparation = 0.06;  // world units between coinciding lines
constexpr int kPointIndex = 12;

using Pt = std::pair<double, double>;
using Poly = std::vector<Pt>;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

std::string escape(const std::string& s) {
    std::string r;
    for (char c : s) {
        if (c == '<') r += "&lt;";
        else if (c == '>') r += "&gt;";
        else if (c == '&') r += "&amp;";
        else r += c;
    }
    return r;
}

class Canvas {
public:
    Canvas(const PlotOptions& o) : o_(o) {
        out_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(o.width + 220) +
                "\" height=\"" + std::to_string(o.height + 40) + "\">\n";
        out_ += "<rect id=\"background\" x=\"0\" y=\"0\" width=\"" + std::to_string(o.width + 220) + "\" height=\"" +
                std::to_string(o.height + 40) + "\" fill=\"white\"/>\n";
        out_ += "<g id=\"plot\" transform=\"translate(20,20)\">\n";
    }

    double px(double x) const { return (x - o_.xmin) / (o_.xmax - o_.xmin) * o_.width; }
    double py(double y) const { return o_.height - (y - o_.ymin) / (o_.ymax - o_.ymin) * o_.height; }

    void line(Pt a, Pt b, const std::string& color, double w, const std::string& extra = "") {
        out_ += "<line x1=\"" + num(px(a.first)) + "\" y1=\"" + num(py(a.second)) + "\" x2=\"" + num(px(b.first)) +
                "\" y2=\"" + num(py(b.second)) + "\" stroke=\"" + color + "\" stroke-width=\"" + num(w) + "\"" + extra +
                "/>\n";
    }
    void polygon(const Poly& p, const std::string& fill, double opacity, const std::string& id) {
        if (p.size() < 3) return;
        out_ += "<polygon id=\"" + id + "\" points=\"";
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (i) out_ += ' ';
            out_ += num(px(p[i].first)) + "," + num(py(p[i].second));
        }
        out_ += "\" fill=\"" + fill + "\" fill-opacity=\"" + num(opacity) + "\" stroke=\"none\"/>\n";
    }
    void circle(Pt c, double r, const std::string& color, bool filled) {
        out_ += "<circle cx=\"" + num(px(c.first)) + "\" cy=\"" + num(py(c.second)) + "\" r=\"" + num(r) + "\" ";
        out_ += filled ? "fill=\"" + color + "\"" : "fill=\"white\" stroke=\"" + color + "\" stroke-width=\"1.00\"";
        out_ += "/>\n";
    }
    void rect_px(double x, double y, double w, double h, const std::string& fill) {
        out_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
                "\" fill=\"" + fill + "\"/>\n";
    }
    void text_px(double x, double y, const std::string& s, const std::string& color = "black", int size = 12) {
        out_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
                std::to_string(size) + "\" fill=\"" + color + "\">" + escape(s) + "</text>\n";
    }
    void raw(const std::string& s) { out_ += s; }
    void frame(const std::string& xlabel, const std::string& ylabel) {
        out_ += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(o_.width) + "\" height=\"" +
                std::to_string(o_.height) + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.00\"/>\n";
        text_px(o_.width / 2.0, o_.height + 16, xlabel);
        text_px(-16, o_.height / 2.0, ylabel);
        text_px(0, o_.height + 16, num(o_.xmin), "#555555", 10);
        text_px(o_.width - 24, o_.height + 16, num(o_.xmax), "#555555", 10);
        text_px(-18, o_.height, num(o_.ymin), "#555555", 10);
        text_px(-18, 10, num(o_.ymax), "#555555", 10);
    }
    void legend(const std::vector<std::pair<std::string, std::string>>& items) {
        double y = 20;
        for (auto& [color, label] : items) {
            rect_px(o_.width + 16, y - 10, 12, 12, color);
            text_px(o_.width + 34, y, label);
            y += 18;
        }
    }
    std::string finish() {
        out_ += "</g>\n</svg>\n";
        return out_;
    }

private:
    const PlotOptions& o_;
    std::string out_;
};

Poly viewport(const PlotOptions& o) { return {{o.xmin, o.ymin}, {o.xmax, o.ymin}, {o.xmax, o.ymax}, {o.xmin, o.ymax}}; }

// keep a0*x + a1*y + b >= 0
Poly clip(const Poly& p, double a0, double a1, double b) {
    Poly out;
    auto val = [&](Pt q) { return a0 * q.first + a1 * q.second + b; };
    for (std::size_t i = 0; i < p.size(); ++i) {
        Pt cur = p[i], nxt = p[(i + 1) % p.size()];
        double vc = val(cur), vn = val(nxt);
        if (vc >= 0) out.push_back(cur);
        if ((vc >= 0) != (vn >= 0)) {
            double t = vc / (vc - vn);
            out.push_back({cur.first + t * (nxt.first - cur.first), cur.second + t * (nxt.second - cur.second)});
        }
    }
    return out;
}

Poly clip_halfspace(const Poly& p, const HalfSpace& h, double eps) {
    double s = h.sense == HalfSpace::Sense::greater ? 1.0 : -1.0;
    return clip(p, s * h.form.coeffs[0], s * h.form.coeffs[1], s * h.form.offset.at(eps));
}

// segment of a0*x + a1*y = c inside the viewport
std::optional<std::pair<Pt, Pt>> clip_line(const PlotOptions& o, double a0, double a1, double c) {
    std::vector<Pt> hits;
    auto add = [&](Pt q) {
        for (auto& h : hits)
            if (std::abs(h.first - q.first) < 1e-12 && std::abs(h.second - q.second) < 1e-12) return;
        hits.push_back(q);
    };
    if (a1 != 0) {
        for (double x : {o.xmin, o.xmax}) {
            double y = (c - a0 * x) / a1;
            if (y >= o.ymin - 1e-12 && y <= o.ymax + 1e-12) add({x, y});
        }
    }
    if (a0 != 0) {
        for (double y : {o.ymin, o.ymax}) {
            double x = (c - a1 * y) / a0;
            if (x >= o.xmin - 1e-12 && x <= o.xmax + 1e-12) add({x, y});
        }
    }
    if (hits.size() < 2) return std::nullopt;
    return std::make_pair(hits[0], hits[1]);
}

std::string factor_label(const MBSpec& spec, const LinearForm& f, bool gamma) {
    std::string s = f.str(spec.variables);
    return gamma ? "Gamma(" + s + ")" : "(" + s + ")";
}

void draw_polytope(Canvas& cv, const MBSpec& spec, const Setting& st, const PlotOptions& o) {
    Poly p = viewport(o);
    for (auto& h : fundamental_polytope(spec, st)) p = clip_halfspace(p, h, st.eps);
    cv.polygon(p, "#ffe08a", 0.6, "polytope");
}

std::string render_singular(const MBSpec& spec, const PlotOptions& o) {
    Canvas cv(o);
    auto st = default_setting(spec);
    draw_polytope(cv, spec, st, o);
    struct Src {
        LinearForm form;
        bool gamma;
        int power;
    };
    std::vector<Src> srcs;
    for (auto& g : spec.gammas)
        if (g.power > 0) srcs.push_back({g.form, true, g.power});
    for (auto& m : spec.monomials)
        if (m.exponent < 0) srcs.push_back({m.form, false, -m.exponent});

    std::vector<IVec> directions;
    std::map<std::pair<IVec, double>, int> drawn;  // coinciding line bookkeeping
    std::vector<std::pair<std::string, std::string>> legend;
    cv.raw("<g id=\"singular\">\n");
    for (std::size_t s = 0; s < srcs.size(); ++s) {
        auto& f = srcs[s].form;
        IVec prim = f.coeffs;
        auto g = std::accumulate(prim.begin(), prim.end(), std::int64_t{0},
                                 [](std::int64_t a, std::int64_t b) { return std::gcd(a, b); });
        if (g == 0) continue;
        for (auto& c : prim) c /= g;
        if (prim[0] < 0 || (prim[0] == 0 && prim[1] < 0))
            for (auto& c : prim) c = -c;
        auto it = std::find(directions.begin(), directions.end(), prim);
        int color = static_cast<int>(it - directions.begin());
        if (it == directions.end()) directions.push_back(prim);
        const std::string col = kPalette[color % kPaletteSize];
        legend.emplace_back(col, factor_label(spec, f, srcs[s].gamma));

        double a0 = static_cast<double>(f.coeffs[0]), a1 = static_cast<double>(f.coeffs[1]);
        double b = f.offset.at(st.eps);
        // range of <a,z> over the viewport
        double lo = 1e300, hi = -1e300;
        for (auto& q : viewport(o)) {
            double v = a0 * q.first + a1 * q.second;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        std::vector<double> levels;
        if (srcs[s].gamma) {
            for (long k = std::max(0L, static_cast<long>(std::ceil(-hi - b - 1e-12)));
                 k <= static_cast<long>(std::floor(-lo - b + 1e-12)); ++k)
                levels.push_back(-static_cast<double>(k) - b);
        } else {
            levels.push_back(-b);
        }
        const double sgn = (a0 * prim[0] + a1 * prim[1]) > 0 ? 1.0 : -1.0;
        const double scale = sgn * static_cast<double>(g);  // a = scale * prim
        const double pnorm = std::hypot(static_cast<double>(prim[0]), static_cast<double>(prim[1]));
        for (double c : levels) {
            double level = std::round(c / scale * 1e9) / 1e9;
            int& count = drawn[{prim, level}];
            double shift = kSeparation * count * pnorm * scale;
            ++count;
            auto seg = clip_line(o, a0, a1, c + shift);
            if (!seg) continue;
            cv.line(seg->first, seg->second, col, srcs[s].power > 1 ? 2.0 : 1.0);
        }
    }
    cv.raw("</g>\n");
    cv.circle({st.base[0], st.base[1]}, 3.5, "black", true);
    cv.frame("Re " + spec.variables[0], "Re " + spec.variables[1]);
    cv.legend(legend);
    return cv.finish();
}

bool inside(const Cone& cone, const std::vector<double>& z, double eps) {
    for (auto& h : cone.constraints) {
        double v = h.form.at(z, eps);
        if (h.sense == HalfSpace::Sense::greater ? v < -1e-9 : v > 1e-9) return false;
    }
    return true;
}

std::string render_cones(const MBSpec& spec, const PlotOptions& o) {
    Canvas cv(o);
    auto st = default_setting(spec);
    auto cones = enumerate_cones(spec, st);
    if (o.cone < 0 || o.cone > static_cast<int>(cones.size()))
        throw MathError("cone " + std::to_string(o.cone) + " does not exist");
    draw_polytope(cv, spec, st, o);
    std::vector<std::pair<std::string, std::string>> legend;
    for (auto& c : cones) {
        if (o.cone && c.id != o.cone) continue;
        const std::string col = kPalette[(c.id - 1) % kPaletteSize];
        Poly p = viewport(o);
        for (auto& h : c.constraints) p = clip_halfspace(p, h, st.eps);
        cv.polygon(p, col, 0.18, "cone" + std::to_string(c.id));
        std::string label = "Cone " + std::to_string(c.id) + ":";
        for (auto& h : c.constraints) label += " " + h.canonical(spec.variables);
        legend.emplace_back(col, label);
    }
    for (auto& c : cones) {
        if (o.cone && c.id != o.cone) continue;
        const std::string col = kPalette[(c.id - 1) % kPaletteSize];
        cv.raw("<g id=\"points" + std::to_string(c.id) + "\">\n");
        for (auto& f : intersection_families(spec, c)) {
            const int a = f.arity();
            IVec k(a, 0);
            for (;;) {
                auto p = f.point(k);
                std::vector<double> z{p[0].at(st.eps), p[1].at(st.eps)};
                if (z[0] >= o.xmin && z[0] <= o.xmax && z[1] >= o.ymin && z[1] <= o.ymax) {
                    if (!f.spurious && !inside(c, z, st.eps))
                        throw std::logic_error("family " + f.str() + " has a point outside cone " +
                                               std::to_string(c.id));
                    cv.circle({z[0], z[1]}, f.spurious ? 3.0 : 2.5, col, !f.spurious);
                }
                int i = 0;
                while (i < a && ++k[i] > kPointIndex) k[i++] = 0;
                if (i >= a) break;
            }
        }
        cv.raw("</g>\n");
        if (o.cone && c.l_direction.size() == 2) {
            double dx = c.l_direction[0].to_double(), dy = c.l_direction[1].to_double();
            auto l = clip_line(o, -dy, dx, -dy * st.base[0] + dx * st.base[1]);
            if (l) cv.line(l->first, l->second, "black", 1.5, " stroke-dasharray=\"6,4\"");
            double len = std::hypot(dx, dy);
            Pt tip{st.base[0] + dx / len, st.base[1] + dy / len};
            cv.line({st.base[0], st.base[1]}, tip, "black", 2.5);
            cv.circle(tip, 3.0, "black", true);
        }
    }
    cv.circle({st.base[0], st.base[1]}, 3.5, "black", true);
    cv.frame("Re " + spec.variables[0], "Re " + spec.variables[1]);
    cv.legend(legend);
    return cv.finish();
}

std::string render_regions(const MBSpec& spec, PlotOptions o) {
    std::vector<std::string> axes = o.axes;
    for (auto& p : spec.parameters)
        if (axes.size() < 2 && std::find(axes.begin(), axes.end(), p.name) == axes.end()) axes.push_back(p.name);
    if (axes.size() < 2) throw MathError("region plots need two parameters");
    o.xmin = 0;
    o.ymin = 0;
    o.xmax = o.range;
    o.ymax = o.range;
    Canvas cv(o);
    std::vector<std::pair<int, RegionPredicate>> regions;
    std::vector<std::pair<std::string, std::string>> legend;
    for (auto& c : enumerate_cones(spec)) {
        const std::string col = kPalette[(c.id - 1) % kPaletteSize];
        try {
            regions.emplace_back(c.id, convergence_region(spec, c));
            std::string label = "Cone " + std::to_string(c.id);
            auto rec = regions.back().second.recognized_strings();
            for (std::size_t i = 0; i < rec.size(); ++i) label += (i ? " and " : ": ") + rec[i];
            legend.emplace_back(col, label);
        } catch (const MathError&) {
            legend.emplace_back("#dddddd", "Cone " + std::to_string(c.id) + ": divergent");
        }
    }
    std::map<std::string, double> mags;
    for (auto& p : spec.parameters) mags[p.name] = o.fixed.count(p.name) ? o.fixed.at(p.name) : 1.0;
    const double cw = static_cast<double>(o.width) / o.grid, ch = static_cast<double>(o.height) / o.grid;
    cv.raw("<g id=\"bitmap\">\n");
    for (int r = 0; r < o.grid; ++r) {
        mags[axes[1]] = o.range * (r + 1) / o.grid;
        int run_start = 0;
        int run_cone = -1;
        auto flush = [&](int end) {
            if (run_cone > 0)
                cv.rect_px(run_start * cw, o.height - (r + 1) * ch, (end - run_start) * cw, ch,
                           kPalette[(run_cone - 1) % kPaletteSize]);
        };
        for (int col = 0; col < o.grid; ++col) {
            mags[axes[0]] = o.range * (col + 1) / o.grid;
            int id = 0;
            for (auto& [cid, reg] : regions)
                if (reg.contains(mags)) {
                    id = cid;
                    break;
                }
            if (id != run_cone) {
                flush(col);
                run_start = col;
                run_cone = id;
            }
        }
        flush(o.grid);
    }
    cv.raw("</g>\n");
    cv.frame("|" + axes[0] + "|", "|" + axes[1] + "|");
    cv.legend(legend);
    return cv.finish();
}

}  // namespace

std::string render_svg(const MBSpec& spec, const PlotOptions& opt) {
    if (opt.xmax <= opt.xmin || opt.ymax <= opt.ymin) throw SpecError("empty viewport");
    if (opt.what == PlotKind::regions) return render_regions(spec, opt);
    if (spec.dimension != 2) throw MathError("plane plots need a two-dimensional integral");
    return opt.what == PlotKind::singular ? render_singular(spec, opt) : render_cones(spec, opt);
}

}  // namespace mb
