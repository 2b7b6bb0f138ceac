#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "mbseries/geometry.hpp"

namespace mb {

using BigQ = boost::multiprecision::cpp_rational;

// sparse polynomial in n variables with exact rational coefficients
struct Poly {
    int n = 0;
    std::map<std::vector<int>, BigQ> terms;

    static Poly constant(int n, const BigQ& c);
    static Poly linear(const IVec& a);  // <a,w>
    static Poly monomial(int n, int var, int power);
    bool is_zero() const;
    int degree() const;
    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b);
    Poly pow(int k) const;
    std::string str(const std::vector<std::string>& vars) const;
    friend bool operator==(const Poly& a, const Poly& b);
};

// truncated Taylor series: coefficients for exponents 0..order[i] in each variable
class Jet {
public:
    Jet() = default;
    explicit Jet(std::vector<int> order);

    static Jet constant(std::vector<int> order, cplx c);
    // sum_i a_i w_i
    static Jet linear(std::vector<int> order, const std::vector<cplx>& a);

    int dimension() const { return static_cast<int>(order_.size()); }
    const std::vector<int>& order() const { return order_; }
    std::size_t size() const { return c_.size(); }
    cplx& at(const std::vector<int>& e) { return c_[index(e)]; }
    cplx at(const std::vector<int>& e) const { return c_[index(e)]; }
    bool contains(const std::vector<int>& e) const;
    // coefficient of w^e, zero outside the box
    cplx coeff(const std::vector<int>& e) const { return contains(e) ? at(e) : cplx{}; }

    Jet& operator+=(const Jet& o);
    Jet& operator*=(cplx s);
    friend Jet operator*(const Jet& a, const Jet& b);
    // exp of a series with zero constant term
    Jet exp_nilpotent() const;
    // sum_k c[k] X^k with X a jet with zero constant term
    static Jet compose(const std::vector<cplx>& c, const Jet& x);

    std::vector<int> exponent(std::size_t flat) const;

private:
    std::size_t index(const std::vector<int>& e) const;
    std::vector<int> order_;
    std::vector<cplx> c_;
};

// Integrand around a singular point, in shifted variables w = z - point.
struct LocalForm {
    int dimension = 0;
    struct DivisorPart {
        IVec normal;  // primitive, oriented toward the contour
        int order = 0;
    };
    std::vector<DivisorPart> divisors;
    // numerator: scale * prod <n,w>^k * exp(sum of pieces + <log_params, w>)
    struct Piece {
        enum class Kind { lgamma, log } kind = Kind::lgamma;
        IVec a;
        cplx v;   // value of the argument at the point
        int q = 1;
    };
    std::vector<Piece> pieces;
    std::vector<std::pair<IVec, int>> zeros;
    std::vector<cplx> log_params;
    cplx log_scale;  // log of the constant prefactor (branch irrelevant)
    EVec shift;
};

enum class LocalKind { cauchy, oblique };

struct TransformationCertificate {
    std::vector<std::vector<int>> groups;  // indices into LocalForm::divisors
    std::vector<Poly> f;
    std::vector<int> g_exponents;
    std::vector<std::vector<Poly>> A;
    Poly detA;
    int sign = 1;  // orientation sign applied to the Grothendieck residue
};

LocalForm localize(const MBSpec& spec, const Normalized& nf, const EVec& point, const ParamMap& params,
                   const Setting& st);
LocalForm localize(const MBSpec& spec, const IndexedFamily& family, const IVec& idx, const ParamMap& params,
                   const Setting& st);

LocalKind classify_local(const LocalForm& lf);

// Minimal g = (w_1^{e_1},...) with A f = g; `target` forces the exponents.
TransformationCertificate solve_transformation(const LocalForm& lf, const std::vector<std::vector<int>>& groups,
                                               const std::optional<std::vector<int>>& target = std::nullopt);
// exact check of A f = g
bool verify_certificate(const TransformationCertificate& cert);

Jet local_jet(const LocalForm& lf, const std::vector<int>& orders);

// Residue contribution given a certificate for the divisor configuration.
cplx residue_with(const LocalForm& lf, const TransformationCertificate& cert);

// Groups from the cone orientation; certificate for this point.
TransformationCertificate certificate_for(const Cone& cone, const LocalForm& lf);

// Contribution of family point `idx` to the cone sum.  Throws MathError with
// "undecidable" for spurious families.
cplx residue_at(const MBSpec& spec, const Cone& cone, const IndexedFamily& family, const IVec& idx,
                const ParamMap& params);

// Reusable evaluator: normalises once and caches certificates per family.
class ResidueEngine {
public:
    ResidueEngine(const MBSpec& spec, const Cone& cone, ParamMap params);
    cplx term(const IndexedFamily& family, const IVec& idx);
    const Normalized& normalized() const { return nf_; }

private:
    const MBSpec& spec_;
    const Cone& cone_;
    ParamMap params_;
    Normalized nf_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<const TransformationCertificate>> cache_;
};

}  // namespace mb
