#include "mbseries/rational.hpp"

#include <charconv>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace mb {

namespace {

__int128 wgcd(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

constexpr __int128 kMax = INT64_MAX;

}  // namespace

Rational Rational::from_wide(__int128 n, __int128 d) {
    if (d == 0) throw std::domain_error("rational: zero denominator");
    if (d < 0) { n = -n; d = -d; }
    __int128 g = wgcd(n, d);
    if (g > 1) { n /= g; d /= g; }
    if (n > kMax || n < -kMax || d > kMax) throw std::overflow_error("rational: 64-bit overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
}

Rational::Rational(std::int64_t n, std::int64_t d) { *this = from_wide(n, d); }

Rational Rational::parse(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        return s;
    };
    auto parse_int = [&](std::string_view s) {
        s = trim(s);
        if (!s.empty() && s.front() == '+') s.remove_prefix(1);
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || p != s.data() + s.size())
            throw std::invalid_argument("bad rational literal '" + std::string(text) + "'");
        return v;
    };
    text = trim(text);
    auto slash = text.find('/');
    if (slash == std::string_view::npos) return Rational(parse_int(text));
    return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
}

std::string Rational::str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::int64_t Rational::floor() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
}

std::int64_t Rational::ceil() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) ++q;
    return q;
}

Rational Rational::operator-() const { return from_wide(-static_cast<__int128>(num_), den_); }

Rational& Rational::operator+=(const Rational& o) {
    *this = from_wide(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_,
                      static_cast<__int128>(den_) * o.den_);
    return *this;
}

Rational& Rational::operator-=(const Rational& o) { return *this += -o; }

Rational& Rational::operator*=(const Rational& o) {
    *this = from_wide(static_cast<__int128>(num_) * o.num_, static_cast<__int128>(den_) * o.den_);
    return *this;
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.num_ == 0) throw std::domain_error("rational: division by zero");
    *this = from_wide(static_cast<__int128>(num_) * o.den_, static_cast<__int128>(den_) * o.num_);
    return *this;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    __int128 l = static_cast<__int128>(a.num_) * b.den_;
    __int128 r = static_cast<__int128>(b.num_) * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string EpsAffine::str() const {
    if (e.is_zero()) return c.str();
    std::string es = e == Rational(1) ? "eps" : e == Rational(-1) ? "-eps" : e.str() + "*eps";
    if (c.is_zero()) return es;
    if (es.front() == '-') return c.str() + es;
    return c.str() + "+" + es;
}

std::int64_t gcd_all(const IVec& v) {
    std::int64_t g = 0;
    for (auto x : v) g = std::gcd(g, x < 0 ? -x : x);
    return g;
}

IVec primitive(const IVec& v) {
    auto g = gcd_all(v);
    if (g <= 1) return v;
    IVec r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i] / g;
    return r;
}

}  // namespace mb
