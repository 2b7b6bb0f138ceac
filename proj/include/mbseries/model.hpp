#pragma once

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mbseries/expr.hpp"
#include "mbseries/rational.hpp"

namespace mb {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using ParamMap = std::map<std::string, cplx>;

// Raised for malformed spec documents (maps to CLI exit code 2).
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised for mathematically undefined requests: poles hit, spurious residues,
// unreachable parameter points (CLI exit code 3).
struct MathError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LinearForm {
    IVec coeffs;
    EpsAffine offset;

    EpsAffine at(const EVec& z) const;
    EpsAffine at(const RVec& z) const;
    double at(const std::vector<double>& z, double eps) const;
    cplx at(const CVec& z, double eps) const;
    bool is_zero() const;
    std::string str(const std::vector<std::string>& vars) const;
    friend bool operator==(const LinearForm&, const LinearForm&) = default;
};

struct GammaFactor {
    LinearForm form;
    int power = 1;
    friend bool operator==(const GammaFactor&, const GammaFactor&) = default;
};

struct MonomialFactor {
    LinearForm form;
    int exponent = -1;
    friend bool operator==(const MonomialFactor&, const MonomialFactor&) = default;
};

struct ParameterFactor {
    std::string name;
    IVec exponent;
    friend bool operator==(const ParameterFactor&, const ParameterFactor&) = default;
};

struct MBSpec {
    int dimension = 1;
    std::vector<std::string> variables;
    std::vector<GammaFactor> gammas;
    std::vector<MonomialFactor> monomials;
    std::vector<ParameterFactor> parameters;
    ConstExpr constant;
    RVec base_point;
    std::optional<Rational> epsilon;

    double eps_value() const { return epsilon ? epsilon->to_double() : 0.0; }
    std::vector<double> base_point_d() const;
    friend bool operator==(const MBSpec&, const MBSpec&) = default;
};

MBSpec parse_spec(std::string_view text);
MBSpec load_spec(const std::string& path);
std::string serialize_spec(const MBSpec& spec);

cplx evaluate_integrand(const MBSpec& spec, const CVec& z, const ParamMap& params, double eps);
// same, but returns the logarithm (branch not tracked)
cplx log_integrand(const MBSpec& spec, const CVec& z, const ParamMap& params, double eps);

// principal-branch log of every parameter, in spec order
std::vector<cplx> param_logs(const MBSpec& spec, const ParamMap& params);

}  // namespace mb
