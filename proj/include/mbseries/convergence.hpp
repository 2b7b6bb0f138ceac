#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mbseries/geometry.hpp"
#include "mbseries/residue.hpp"

namespace mb {

// Modulus-relevant core of a family's general term: a pure gamma ratio in the
// summation indices, times parameter powers and a sign.
struct GammaTerm {
    struct Factor {
        RVec alpha;      // coefficients of the indices
        EpsAffine c;
        int power = 1;   // Gamma(c+<alpha,k>)^power, or (c+<alpha,k>)^power when !gamma
        bool gamma = true;
    };
    int arity = 0;
    std::vector<Factor> factors;
    // |u_p| exponent per index, and the constant part
    std::vector<std::pair<std::string, RVec>> parameter_powers;
    std::map<std::string, EpsAffine> parameter_offsets;
    RVec sign_factor;  // term carries (-1)^{<sign_factor,k>}
    Rational eps;      // value substituted for eps in exact ratios

    bool integral() const;
    // |X_i| = prod_p |u_p|^{parameter_powers[p][i]}
    double log_x(int i, const std::map<std::string, double>& mags) const;
    // log of the modulus of the gamma core at integer indices (parameters excluded)
    double log_abs_core(const IVec& k, double eps_value) const;
};

GammaTerm gamma_ratio_term(const MBSpec& spec, const IndexedFamily& family, const Setting& st);
GammaTerm gamma_ratio_term(const MBSpec& spec, const IndexedFamily& family);

struct RationalFunction {
    Poly numerator;
    Poly denominator;
    std::string str(const std::vector<std::string>& vars) const;
    // a*d == b*c
    bool equals(const RationalFunction& o) const;
};

struct HornFunctions {
    std::vector<RationalFunction> f;  // a_{k+e_i}/a_k
    std::vector<RationalFunction> F;  // leading homogeneous limits
    std::vector<std::pair<int, int>> degrees;  // (numerator, denominator) of f_i
};

// Throws MathError for non-integer index coefficients.
HornFunctions horn_functions(const GammaTerm& term);

// sum_k coeff_k |monomial_k|^root < 1
struct PowerSumConstraint {
    struct Term {
        double coeff = 1.0;
        std::map<std::string, Rational> monomial;
    };
    std::vector<Term> terms;
    Rational root{1};
    bool holds(const std::map<std::string, double>& mags) const;
    std::string str() const;
};

// Horn data of one family: |F_i(t)| = prod_j |<beta_j,t>|^{w_ji}.
class FamilyRegion {
public:
    FamilyRegion() = default;
    explicit FamilyRegion(const GammaTerm& term, int sweep = 512);
    int arity() const { return arity_; }
    bool contains(const std::map<std::string, double>& mags) const;
    // log |F_i| at a direction t >= 0
    double log_f(int i, const std::vector<double>& t) const;
    const std::vector<double>& net_degrees() const { return net_; }

private:
    double sup_min(const std::vector<int>& subset, const std::vector<double>& lx) const;
    void precompute();

    int arity_ = 0;
    int sweep_ = 512;
    std::vector<std::vector<double>> beta_;
    std::vector<std::vector<double>> weight_;  // [form][index]
    std::vector<double> net_;
    std::vector<std::vector<std::pair<std::string, double>>> x_;  // [index] -> (param, exponent)
    std::vector<std::vector<int>> subsets_;
    // sampled directions and cached log F per subset
    std::vector<std::vector<std::vector<double>>> dirs_;
    std::vector<std::vector<std::vector<double>>> cache_;
};

struct RegionPredicate {
    std::vector<FamilyRegion> parts;
    std::optional<std::vector<PowerSumConstraint>> recognized_form;

    bool contains(const std::map<std::string, double>& mags) const;
    std::vector<std::string> recognized_strings() const;
};

// Intersection of the Horn regions of the non-spurious families.  Throws
// MathError when a family diverges for every nonzero parameter.
RegionPredicate convergence_region(const MBSpec& spec, const Cone& cone);
RegionPredicate family_region(const GammaTerm& term);

std::optional<RegionPredicate> kampe_region(const GammaTerm& term);

struct OnefoldReport {
    Rational delta;
    Rational alpha;
    std::string left_verdict;
    std::string right_verdict;
    std::optional<double> disk_radius;
    RegionPredicate left_region;
    RegionPredicate right_region;
};

OnefoldReport onefold_classify(const MBSpec& spec);

}  // namespace mb
