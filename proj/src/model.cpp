#include "mbseries/model.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mbseries/special.hpp"

namespace mb {

using json = nlohmann::ordered_json;

EpsAffine LinearForm::at(const EVec& z) const {
    EpsAffine r = offset;
    for (std::size_t i = 0; i < coeffs.size(); ++i) r += z[i] * Rational(coeffs[i]);
    return r;
}

EpsAffine LinearForm::at(const RVec& z) const {
    EpsAffine r = offset;
    for (std::size_t i = 0; i < coeffs.size(); ++i) r.c += z[i] * Rational(coeffs[i]);
    return r;
}

double LinearForm::at(const std::vector<double>& z, double eps) const {
    double r = offset.at(eps);
    for (std::size_t i = 0; i < coeffs.size(); ++i) r += static_cast<double>(coeffs[i]) * z[i];
    return r;
}

cplx LinearForm::at(const CVec& z, double eps) const {
    cplx r = offset.at(eps);
    for (std::size_t i = 0; i < coeffs.size(); ++i) r += static_cast<double>(coeffs[i]) * z[i];
    return r;
}

bool LinearForm::is_zero() const {
    for (auto c : coeffs)
        if (c != 0) return false;
    return true;
}

std::string LinearForm::str(const std::vector<std::string>& vars) const {
    std::string s;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        auto c = coeffs[i];
        if (c == 0) continue;
        std::string name = i < vars.size() ? vars[i] : "z" + std::to_string(i + 1);
        if (s.empty()) {
            if (c == -1) s += "-";
            else if (c != 1) s += std::to_string(c) + "*";
        } else {
            s += c < 0 ? " - " : " + ";
            auto a = c < 0 ? -c : c;
            if (a != 1) s += std::to_string(a) + "*";
        }
        s += name;
    }
    if (!offset.c.is_zero() || offset.has_eps() || s.empty()) {
        std::string o = offset.str();
        if (s.empty()) return o;
        if (o.front() == '-') s += " - " + o.substr(1);
        else s += " + " + o;
    }
    return s;
}

std::vector<double> MBSpec::base_point_d() const {
    std::vector<double> r;
    for (auto& q : base_point) r.push_back(q.to_double());
    return r;
}

namespace {

std::pair<int, int> line_col(std::string_view text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') { ++line; col = 1; }
        else ++col;
    }
    return {line, col};
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw SpecError(where + ": expected an object");
    for (auto& [k, v] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || k == a;
        if (!ok) throw SpecError(where + ": unknown field '" + k + "'");
    }
}

Rational rational_field(const json& v, const std::string& where) {
    try {
        if (v.is_string()) return Rational::parse(v.get<std::string>());
        if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    } catch (const std::exception& e) {
        throw SpecError(where + ": " + e.what());
    }
    throw SpecError(where + ": expected a rational string");
}

IVec int_vector(const json& v, int dim, const std::string& where) {
    if (!v.is_array()) throw SpecError(where + ": expected an integer array");
    if (static_cast<int>(v.size()) != dim)
        throw SpecError(where + ": dimension mismatch (expected " + std::to_string(dim) + " entries, got " +
                        std::to_string(v.size()) + ")");
    IVec r;
    for (auto& x : v) {
        if (!x.is_number_integer()) throw SpecError(where + ": coefficients must be integers");
        r.push_back(x.get<std::int64_t>());
    }
    return r;
}

LinearForm form_field(const json& obj, int dim, const std::string& where) {
    if (!obj.contains("coeffs")) throw SpecError(where + ": missing 'coeffs'");
    LinearForm f;
    f.coeffs = int_vector(obj.at("coeffs"), dim, where + ".coeffs");
    f.offset.c = obj.contains("const") ? rational_field(obj.at("const"), where + ".const") : Rational(0);
    f.offset.e = obj.contains("eps") ? rational_field(obj.at("eps"), where + ".eps") : Rational(0);
    if (f.is_zero()) throw SpecError(where + ": zero linear form");
    return f;
}

bool valid_identifier(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

}  // namespace

MBSpec parse_spec(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        auto [l, c] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        throw SpecError("syntax error at line " + std::to_string(l) + ", column " + std::to_string(c) + ": " +
                        e.what());
    }
    check_keys(doc, {"dimension", "variables", "constant", "parameters", "gammas", "monomials", "base_point", "epsilon"},
               "spec");
    MBSpec s;
    if (!doc.contains("dimension") || !doc["dimension"].is_number_integer())
        throw SpecError("spec: 'dimension' must be a positive integer");
    s.dimension = doc["dimension"].get<int>();
    if (s.dimension < 1) throw SpecError("spec: 'dimension' must be a positive integer");
    const int n = s.dimension;

    if (doc.contains("variables")) {
        auto& v = doc["variables"];
        if (!v.is_array() || static_cast<int>(v.size()) != n)
            throw SpecError("spec.variables: dimension mismatch");
        for (auto& x : v) {
            if (!x.is_string() || !valid_identifier(x.get<std::string>()))
                throw SpecError("spec.variables: expected identifiers");
            s.variables.push_back(x.get<std::string>());
        }
    } else {
        for (int i = 0; i < n; ++i) s.variables.push_back("z" + std::to_string(i + 1));
    }

    if (doc.contains("constant")) {
        auto& c = doc["constant"];
        try {
            if (c.is_string()) s.constant = ConstExpr::parse(c.get<std::string>());
            else if (c.is_number()) s.constant = ConstExpr::parse(c.dump());
            else throw SpecError("spec.constant: expected an expression string");
        } catch (const std::invalid_argument& e) {
            throw SpecError(std::string("spec.constant: ") + e.what());
        }
    }

    if (doc.contains("parameters")) {
        std::set<std::string> seen;
        int k = 0;
        for (auto& p : doc["parameters"]) {
            std::string where = "spec.parameters[" + std::to_string(k++) + "]";
            check_keys(p, {"name", "exponent"}, where);
            if (!p.contains("name") || !p["name"].is_string() || !valid_identifier(p["name"].get<std::string>()))
                throw SpecError(where + ": 'name' must be an identifier");
            ParameterFactor f;
            f.name = p["name"].get<std::string>();
            if (!seen.insert(f.name).second) throw SpecError(where + ": duplicate parameter name '" + f.name + "'");
            if (!p.contains("exponent")) throw SpecError(where + ": missing 'exponent'");
            f.exponent = int_vector(p["exponent"], n, where + ".exponent");
            s.parameters.push_back(std::move(f));
        }
    }

    if (doc.contains("gammas")) {
        int k = 0;
        for (auto& g : doc["gammas"]) {
            std::string where = "spec.gammas[" + std::to_string(k++) + "]";
            check_keys(g, {"coeffs", "const", "eps", "power"}, where);
            GammaFactor f;
            f.form = form_field(g, n, where);
            f.power = g.contains("power") ? g["power"].get<int>() : 1;
            if (f.power == 0) throw SpecError(where + ": power must be nonzero");
            s.gammas.push_back(std::move(f));
        }
    }

    if (doc.contains("monomials")) {
        int k = 0;
        for (auto& g : doc["monomials"]) {
            std::string where = "spec.monomials[" + std::to_string(k++) + "]";
            check_keys(g, {"coeffs", "const", "eps", "exponent"}, where);
            MonomialFactor f;
            f.form = form_field(g, n, where);
            f.exponent = g.contains("exponent") ? g["exponent"].get<int>() : -1;
            if (f.exponent > -1) throw SpecError(where + ": exponent must be a negative integer");
            s.monomials.push_back(std::move(f));
        }
    }

    if (!doc.contains("base_point") || !doc["base_point"].is_array() ||
        static_cast<int>(doc["base_point"].size()) != n)
        throw SpecError("spec.base_point: dimension mismatch");
    for (auto& x : doc["base_point"]) s.base_point.push_back(rational_field(x, "spec.base_point"));

    if (doc.contains("epsilon") && !doc["epsilon"].is_null()) s.epsilon = rational_field(doc["epsilon"], "spec.epsilon");

    // the contour must avoid every pole at the working eps
    double eps = s.eps_value();
    auto base = s.base_point_d();
    for (std::size_t k = 0; k < s.gammas.size(); ++k) {
        double v = s.gammas[k].form.at(base, eps);
        if (s.gammas[k].power > 0 && is_nonpositive_integer(v, 1e-12))
            throw SpecError("spec.gammas[" + std::to_string(k) + "]: argument is a pole on the contour");
    }
    for (std::size_t k = 0; k < s.monomials.size(); ++k) {
        if (std::abs(s.monomials[k].form.at(base, eps)) < 1e-12)
            throw SpecError("spec.monomials[" + std::to_string(k) + "]: vanishes on the contour");
    }
    return s;
}

MBSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open spec file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

std::string serialize_spec(const MBSpec& s) {
    json doc;
    doc["dimension"] = s.dimension;
    doc["variables"] = s.variables;
    doc["constant"] = s.constant.text();
    auto form_json = [](json& o, const LinearForm& f) {
        o["coeffs"] = f.coeffs;
        o["const"] = f.offset.c.str();
        o["eps"] = f.offset.e.str();
    };
    doc["parameters"] = json::array();
    for (auto& p : s.parameters) doc["parameters"].push_back({{"name", p.name}, {"exponent", p.exponent}});
    doc["gammas"] = json::array();
    for (auto& g : s.gammas) {
        json o;
        form_json(o, g.form);
        o["power"] = g.power;
        doc["gammas"].push_back(o);
    }
    doc["monomials"] = json::array();
    for (auto& m : s.monomials) {
        json o;
        form_json(o, m.form);
        o["exponent"] = m.exponent;
        doc["monomials"].push_back(o);
    }
    doc["base_point"] = json::array();
    for (auto& q : s.base_point) doc["base_point"].push_back(q.str());
    doc["epsilon"] = s.epsilon ? json(s.epsilon->str()) : json(nullptr);
    return doc.dump(2);
}

std::vector<cplx> param_logs(const MBSpec& spec, const ParamMap& params) {
    std::vector<cplx> r;
    for (auto& p : spec.parameters) {
        auto it = params.find(p.name);
        if (it == params.end()) throw MathError("unbound parameter '" + p.name + "'");
        if (it->second == cplx(0.0)) throw MathError("parameter '" + p.name + "' is zero");
        r.push_back(std::log(it->second));
    }
    return r;
}

cplx log_integrand(const MBSpec& spec, const CVec& z, const ParamMap& params, double eps) {
    if (static_cast<int>(z.size()) != spec.dimension) throw MathError("evaluation point has wrong dimension");
    auto logs = param_logs(spec, params);
    cplx acc = std::log(spec.constant.eval(eps));
    for (std::size_t p = 0; p < spec.parameters.size(); ++p) {
        cplx e = 0.0;
        for (int i = 0; i < spec.dimension; ++i) e += static_cast<double>(spec.parameters[p].exponent[i]) * z[i];
        acc += e * logs[p];
    }
    for (auto& g : spec.gammas) {
        cplx a = g.form.at(z, eps);
        if (std::abs(a.imag()) < 1e-300 && is_nonpositive_integer(a.real())) {
            if (g.power > 0) throw MathError("integrand evaluated at a gamma pole");
            return cplx(-std::numeric_limits<double>::infinity(), 0.0);
        }
        acc += static_cast<double>(g.power) * lgamma_c(a);
    }
    for (auto& m : spec.monomials) {
        cplx a = m.form.at(z, eps);
        if (a == cplx(0.0)) throw MathError("integrand evaluated at a monomial pole");
        acc += static_cast<double>(m.exponent) * std::log(a);
    }
    return acc;
}

cplx evaluate_integrand(const MBSpec& spec, const CVec& z, const ParamMap& params, double eps) {
    return std::exp(log_integrand(spec, z, params, eps));
}

}  // namespace mb
