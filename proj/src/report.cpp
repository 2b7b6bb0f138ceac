#include "mbseries/report.hpp"

#include <algorithm>
#include <cmath>

namespace mb {

namespace {

const char* kind_name(DeltaVector::Kind k) {
    switch (k) {
        case DeltaVector::Kind::degenerate: return "degenerate";
        case DeltaVector::Kind::nondegenerate: return "nondegenerate";
        case DeltaVector::Kind::semi_degenerate: return "semi_degenerate";
    }
    return "unknown";
}

json region_json(const RegionPredicate& r) {
    json j;
    if (r.recognized_form)
        j["recognized"] = r.recognized_strings();
    else
        j["recognized"] = nullptr;
    return j;
}

}  // namespace

json family_json(const IndexedFamily& f, const std::vector<std::string>&) {
    json j;
    j["family"] = f.str();
    json off = json::array();
    for (auto& v : f.offset) off.push_back(v.str());
    j["offset"] = off;
    json m = json::array();
    for (auto& row : f.index_matrix) {
        json r = json::array();
        for (auto& x : row) r.push_back(x.str());
        m.push_back(r);
    }
    j["matrix"] = m;
    j["spurious"] = f.spurious;
    return j;
}

json cone_json(const MBSpec& spec, const Cone& cone) {
    json j;
    j["id"] = cone.id;
    json cs = json::array();
    for (auto& h : cone.constraints) cs.push_back(h.canonical(spec.variables));
    j["constraints"] = cs;
    if (cone.dimension == 1) j["side"] = cone.side > 0 ? "right" : "left";
    json fams = json::array();
    for (auto& f : intersection_families(spec, cone)) fams.push_back(family_json(f, spec.variables));
    j["families"] = fams;
    return j;
}

json analyze_report(const MBSpec& spec) {
    json j;
    j["dimension"] = spec.dimension;
    j["variables"] = spec.variables;
    auto d = delta_vector(spec);
    j["delta"] = d.components;
    j["classification"] = kind_name(d.classification);
    if (d.alpha) j["alpha"] = *d.alpha;
    auto st = default_setting(spec);
    j["eps"] = st.eps;
    j["base_point"] = st.base;
    json poly = json::array();
    for (auto& h : fundamental_polytope(spec, st)) poly.push_back(h.canonical(spec.variables));
    j["polytope"] = poly;
    if (auto c = polytope_centroid(spec, st)) {
        json cj = json::array();
        for (auto& v : *c) cj.push_back(v.str());
        j["vertex_average"] = cj;
    }
    if (spec.dimension == 1) {
        auto rep = onefold_classify(spec);
        json o;
        o["delta"] = rep.delta.str();
        o["alpha"] = rep.alpha.str();
        o["left"] = rep.left_verdict;
        o["right"] = rep.right_verdict;
        if (rep.disk_radius) o["disk_radius"] = *rep.disk_radius;
        j["onefold"] = o;
    }
    return j;
}

json cones_report(const MBSpec& spec) {
    json j;
    auto cones = enumerate_cones(spec);
    j["count"] = cones.size();
    json arr = json::array();
    for (auto& c : cones) arr.push_back(cone_json(spec, c));
    j["cones"] = arr;
    return j;
}

json regions_report(const MBSpec& spec, const RegionGrid& grid) {
    std::vector<std::string> axes = grid.axes;
    for (auto& p : spec.parameters)
        if (axes.size() < 2 && std::find(axes.begin(), axes.end(), p.name) == axes.end()) axes.push_back(p.name);
    json j;
    j["axes"] = axes;
    j["grid"] = grid.n;
    j["range"] = grid.range;
    json cones = json::array();
    for (auto& c : enumerate_cones(spec)) {
        json cj;
        cj["id"] = c.id;
        try {
            auto region = convergence_region(spec, c);
            cj.update(region_json(region));
            std::map<std::string, double> mags;
            for (auto& p : spec.parameters) mags[p.name] = grid.fixed.count(p.name) ? grid.fixed.at(p.name) : 1.0;
            json rows = json::array();
            long count = 0;
            for (int r = 1; r <= grid.n; ++r) {
                std::string row;
                for (int col = 1; col <= grid.n; ++col) {
                    mags[axes[0]] = grid.range * col / grid.n;
                    if (axes.size() > 1) mags[axes[1]] = grid.range * r / grid.n;
                    bool in = region.contains(mags);
                    row += in ? '1' : '0';
                    count += in;
                }
                rows.push_back(row);
                if (axes.size() < 2) break;
            }
            cj["bitmap"] = rows;
            cj["inside_count"] = count;
        } catch (const MathError& e) {
            cj["recognized"] = nullptr;
            cj["divergent"] = e.what();
        }
        cones.push_back(cj);
    }
    j["cones"] = cones;
    return j;
}

json series_json(const SeriesResult& r) {
    json j;
    j["value_re"] = r.value.real();
    j["value_im"] = r.value.imag();
    j["orders"] = r.orders;
    j["tail"] = r.tail_estimate;
    json b = json::array();
    for (auto& [name, v] : r.breakdown) b.push_back({{"family", name}, {"re", v.real()}, {"im", v.imag()}});
    j["breakdown"] = b;
    j["terms"] = r.terms;
    j["inside_region"] = r.inside_region;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

json selection_json(const Selection& s) {
    json j;
    if (s.cone)
        j["cone"] = *s.cone;
    else
        j["cone"] = nullptr;
    j["reason"] = s.reason;
    j["candidates"] = s.candidates;
    return j;
}

json resolution_json(const EpsResolution& r, const std::vector<std::string>& vars) {
    json j;
    json base = json::array();
    for (auto& x : r.new_base) base.push_back(x.str());
    j["new_base"] = base;
    j["new_cone"] = r.new_cone;
    json corr = json::array();
    for (auto& c : r.corrections) {
        json cj = family_json(c.family, vars);
        cj["sign"] = c.sign;
        corr.push_back(cj);
    }
    j["corrections"] = corr;
    auto cp = [](cplx v) { return json{{"re", v.real()}, {"im", v.imag()}}; };
    j["original"] = cp(r.original_value);
    j["relocated"] = cp(r.relocated_value);
    j["correction_sum"] = cp(r.correction_value);
    j["identity_residual"] = std::abs(r.identity_residual);
    return j;
}

json laurent_json(const LaurentFit& f) {
    json j;
    json cs = json::array();
    for (std::size_t k = 0; k < f.coeffs.size(); ++k)
        cs.push_back({{"power", f.lowest + static_cast<int>(k)}, {"re", f.coeffs[k].real()}, {"im", f.coeffs[k].imag()}});
    j["coefficients"] = cs;
    j["condition"] = f.condition;
    json s = json::array();
    for (auto& [e, v] : f.samples) s.push_back({{"eps", e}, {"re", v.real()}, {"im", v.imag()}});
    j["samples"] = s;
    return j;
}

json quadrature_json(const QuadratureResult& q) {
    return {{"value_re", q.value.real()},
            {"value_im", q.value.imag()},
            {"error_estimate", q.error_estimate},
            {"truncation", q.truncation_T},
            {"nodes", q.nodes_used}};
}

}  // namespace mb
