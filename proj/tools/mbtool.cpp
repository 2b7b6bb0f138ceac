// mbtool: command-line front end.  JSON on stdout, error JSON on stderr.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mbseries/plot.hpp"
#include "mbseries/report.hpp"

using namespace mb;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

double parse_number(const std::string& s) {
    if (s.find('/') != std::string::npos) return Rational::parse(s).to_double();
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw UsageError("bad number '" + s + "'");
    return v;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& kv) {
    std::map<std::string, double> out;
    for (auto& item : kv) {
        for (auto& part : split(item, ' ')) {
            auto eq = part.find('=');
            if (eq == std::string::npos) throw UsageError("parameter '" + part + "' is not k=v");
            out[part.substr(0, eq)] = parse_number(part.substr(eq + 1));
        }
    }
    return out;
}

ParamMap to_complex(const MBSpec& spec, const std::map<std::string, double>& p) {
    ParamMap m;
    for (auto& f : spec.parameters) {
        auto it = p.find(f.name);
        if (it == p.end()) throw UsageError("missing parameter " + f.name);
        m[f.name] = it->second;
    }
    return m;
}

std::vector<int> parse_orders(const std::string& s) {
    std::vector<int> out;
    for (auto& t : split(s, ',')) {
        int v = std::stoi(t);
        if (v < 0) throw UsageError("negative order");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("empty --orders");
    return out;
}

Cone pick_cone(const MBSpec& spec, int id) {
    auto cones = enumerate_cones(spec);
    if (id < 1 || id > static_cast<int>(cones.size()))
        throw MathError("cone " + std::to_string(id) + " does not exist (" + std::to_string(cones.size()) + " cones)");
    return cones[id - 1];
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

int fail(int code, const std::string& kind, const std::string& msg) {
    json e{{"error", kind}, {"message", msg}, {"exit_code", code}};
    std::cerr << e.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Series representations of Mellin-Barnes integrals"};
    app.require_subcommand(1);

    std::string spec_path;
    std::vector<std::string> params_kv;
    int cone_id = 1;
    std::string orders_s;
    int grid = 100;
    double range = 3.0;
    std::vector<std::string> axes;
    std::vector<std::string> fixed_kv;
    double tol = 1e-9;
    std::string rule = "gl";
    std::string to_s;
    std::string samples_s;
    int lowest = -2;
    int nterms = 0;
    std::string what = "singular";
    std::string out_path;
    std::string viewport_s;

    auto* analyze = app.add_subcommand("analyze", "Delta vector, polytope, degeneracy");
    analyze->add_option("spec", spec_path)->required();

    auto* cones = app.add_subcommand("cones", "Cones with their pole families");
    cones->add_option("spec", spec_path)->required();

    auto* regions = app.add_subcommand("regions", "Convergence regions with a sampled bitmap");
    regions->add_option("spec", spec_path)->required();
    regions->add_option("--grid", grid);
    regions->add_option("--range", range);
    regions->add_option("--axes", axes)->delimiter(',');
    regions->add_option("--fix", fixed_kv);

    auto* sum = app.add_subcommand("sum", "Truncated cone series");
    sum->add_option("spec", spec_path)->required();
    sum->add_option("--cone", cone_id)->required();
    sum->add_option("--orders", orders_s)->required();
    sum->add_option("--params", params_kv)->required();

    auto* oracle = app.add_subcommand("oracle", "Direct quadrature of the integral");
    oracle->add_option("spec", spec_path)->required();
    oracle->add_option("--params", params_kv)->required();
    oracle->add_option("--tol", tol);
    oracle->add_option("--rule", rule)->check(CLI::IsMember({"gl", "de", "gk"}));

    auto* select = app.add_subcommand("select", "Cone whose region contains the parameters");
    select->add_option("spec", spec_path)->required();
    select->add_option("--params", params_kv)->required();

    auto* resolve = app.add_subcommand("eps-resolve", "Relocate the contour and list crossed residues");
    resolve->add_option("spec", spec_path)->required();
    resolve->add_option("--cone", cone_id)->required();
    resolve->add_option("--to", to_s)->required();
    resolve->add_option("--params", params_kv)->required();
    resolve->add_option("--orders", orders_s);

    auto* fit = app.add_subcommand("eps-fit", "Laurent coefficients in eps from sampled sums");
    fit->add_option("spec", spec_path)->required();
    fit->add_option("--cone", cone_id)->required();
    fit->add_option("--samples", samples_s)->required();
    fit->add_option("--params", params_kv)->required();
    fit->add_option("--orders", orders_s);
    fit->add_option("--lowest", lowest);
    fit->add_option("--terms", nterms);

    auto* plot = app.add_subcommand("plot", "SVG rendering");
    plot->add_option("spec", spec_path)->required();
    plot->add_option("--what", what)->check(CLI::IsMember({"singular", "cones", "regions"}));
    plot->add_option("--out", out_path)->required();
    plot->add_option("--viewport", viewport_s);
    plot->add_option("--cone", cone_id);
    plot->add_option("--grid", grid);
    plot->add_option("--range", range);
    plot->add_option("--axes", axes)->delimiter(',');
    plot->add_option("--fix", fixed_kv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(2, "usage", e.what());
    }

    try {
        const MBSpec spec = load_spec(spec_path);
        if (*analyze) {
            emit(analyze_report(spec));
        } else if (*cones) {
            emit(cones_report(spec));
        } else if (*regions) {
            RegionGrid g;
            g.n = grid;
            g.range = range;
            g.axes = axes;
            g.fixed = parse_params(fixed_kv);
            emit(regions_report(spec, g));
        } else if (*sum) {
            auto p = to_complex(spec, parse_params(params_kv));
            emit(series_json(sum_cone(spec, pick_cone(spec, cone_id), parse_orders(orders_s), p)));
        } else if (*oracle) {
            auto p = to_complex(spec, parse_params(params_kv));
            QuadratureOptions opt;
            opt.tol = tol;
            opt.rule = rule == "de"   ? QuadratureRule::double_exponential
                       : rule == "gk" ? QuadratureRule::gauss_kronrod
                                      : QuadratureRule::gauss_legendre;
            emit(quadrature_json(mb_quadrature(spec, p, spec.eps_value(), opt)));
        } else if (*select) {
            auto p = parse_params(params_kv);
            std::map<std::string, double> mags;
            for (auto& [k, v] : to_complex(spec, p)) mags[k] = std::abs(v);
            auto sel = select_cone(spec, mags);
            emit(selection_json(sel));
            if (!sel.cone) return fail(3, "math", "parameter point is not reachable by any cone series");
        } else if (*resolve) {
            RVec to;
            for (auto& t : split(to_s, ',')) to.push_back(Rational::parse(t));
            auto p = to_complex(spec, parse_params(params_kv));
            auto orders = orders_s.empty() ? std::vector<int>{30, 30} : parse_orders(orders_s);
            emit(resolution_json(epsilon_resolve(spec, pick_cone(spec, cone_id), to, p, orders), spec.variables));
        } else if (*fit) {
            std::vector<Rational> samples;
            for (auto& t : split(samples_s, ',')) samples.push_back(Rational::parse(t));
            auto p = to_complex(spec, parse_params(params_kv));
            auto orders = orders_s.empty() ? std::vector<int>{30, 30} : parse_orders(orders_s);
            auto vals = eps_samples(spec, cone_id, samples, p, orders);
            int count = nterms > 0 ? nterms : static_cast<int>(samples.size());
            emit(laurent_json(laurent_fit(vals, lowest, count)));
        } else if (*plot) {
            PlotOptions o;
            o.what = what == "cones" ? PlotKind::cones : what == "regions" ? PlotKind::regions : PlotKind::singular;
            if (!viewport_s.empty()) {
                auto v = split(viewport_s, ',');
                if (v.size() != 4) throw UsageError("--viewport expects xmin,xmax,ymin,ymax");
                o.xmin = parse_number(v[0]);
                o.xmax = parse_number(v[1]);
                o.ymin = parse_number(v[2]);
                o.ymax = parse_number(v[3]);
            }
            o.cone = plot->count("--cone") ? cone_id : 0;
            o.grid = grid;
            o.range = range;
            o.axes = axes;
            o.fixed = parse_params(fixed_kv);
            auto svg = render_svg(spec, o);
            std::ofstream f(out_path, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + out_path);
            f << svg;
            emit({{"written", out_path}, {"bytes", svg.size()}});
        }
    } catch (const UsageError& e) {
        return fail(2, "usage", e.what());
    } catch (const SpecError& e) {
        return fail(2, "spec", e.what());
    } catch (const MathError& e) {
        return fail(3, "math", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(2, "usage", std::string("bad argument: ") + e.what());
    } catch (const std::exception& e) {
        return fail(1, "internal", e.what());
    }
    return 0;
}
