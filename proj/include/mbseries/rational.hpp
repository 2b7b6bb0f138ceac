#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace mb {

// int64 rational, intermediate products in 128 bits; throws on overflow.
class Rational {
public:
    Rational() = default;
    Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    static Rational parse(std::string_view text);
    std::string str() const;
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    bool is_integer() const { return den_ == 1; }
    bool is_zero() const { return num_ == 0; }
    int sign() const { return (num_ > 0) - (num_ < 0); }
    std::int64_t floor() const;
    std::int64_t ceil() const;

    Rational operator-() const;
    Rational& operator+=(const Rational& o);
    Rational& operator-=(const Rational& o);
    Rational& operator*=(const Rational& o);
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    static Rational from_wide(__int128 n, __int128 d);
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

// c + e*eps with eps kept symbolic
struct EpsAffine {
    Rational c;
    Rational e;

    EpsAffine() = default;
    EpsAffine(Rational c_) : c(c_) {}
    EpsAffine(Rational c_, Rational e_) : c(c_), e(e_) {}

    double at(double eps) const { return c.to_double() + e.to_double() * eps; }
    bool has_eps() const { return !e.is_zero(); }
    std::string str() const;

    EpsAffine operator-() const { return {-c, -e}; }
    EpsAffine& operator+=(const EpsAffine& o) { c += o.c; e += o.e; return *this; }
    EpsAffine& operator-=(const EpsAffine& o) { c -= o.c; e -= o.e; return *this; }
    EpsAffine& operator*=(const Rational& k) { c *= k; e *= k; return *this; }
    friend EpsAffine operator+(EpsAffine a, const EpsAffine& b) { return a += b; }
    friend EpsAffine operator-(EpsAffine a, const EpsAffine& b) { return a -= b; }
    friend EpsAffine operator*(EpsAffine a, const Rational& k) { return a *= k; }
    friend EpsAffine operator*(const Rational& k, EpsAffine a) { return a *= k; }
    friend bool operator==(const EpsAffine&, const EpsAffine&) = default;
    friend auto operator<=>(const EpsAffine& a, const EpsAffine& b) {
        if (auto r = a.c <=> b.c; r != 0) return r;
        return a.e <=> b.e;
    }
};

using IVec = std::vector<std::int64_t>;
using RVec = std::vector<Rational>;
using EVec = std::vector<EpsAffine>;

std::int64_t gcd_all(const IVec& v);
IVec primitive(const IVec& v);  // divide by gcd, sign untouched

}  // namespace mb
