#include "mbseries/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "mbseries/special.hpp"

namespace mb {

struct ConstExpr::Node {
    enum class Kind { number, eps, add, sub, mul, div, pow, neg, call } kind;
    cplx value{};
    std::string fn;
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodeP = std::shared_ptr<const ConstExpr::Node>;
using Kind = ConstExpr::Node::Kind;

NodeP make(Kind k, std::vector<NodeP> args = {}, cplx v = {}, std::string fn = {}) {
    auto n = std::make_shared<ConstExpr::Node>();
    n->kind = k;
    n->args = std::move(args);
    n->value = v;
    n->fn = std::move(fn);
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodeP run() {
        auto n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("constant expression: " + what + " at offset " + std::to_string(pos_) +
                                    " in '" + s_ + "'");
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodeP expr() {
        auto l = term();
        for (;;) {
            if (eat('+')) l = make(Kind::add, {l, term()});
            else if (eat('-')) l = make(Kind::sub, {l, term()});
            else return l;
        }
    }
    NodeP term() {
        auto l = unary();
        for (;;) {
            if (eat('*')) l = make(Kind::mul, {l, unary()});
            else if (eat('/')) l = make(Kind::div, {l, unary()});
            else return l;
        }
    }
    NodeP unary() {
        if (eat('-')) return make(Kind::neg, {unary()});
        if (eat('+')) return unary();
        return power();
    }
    NodeP power() {
        auto b = primary();
        if (eat('^')) return make(Kind::pow, {b, unary()});
        return b;
    }
    NodeP primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto n = expr();
            if (!eat(')')) fail("missing ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            return make(Kind::number, {}, cplx(v, 0.0));
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string id = s_.substr(start, pos_ - start);
            if (id == "pi") return make(Kind::number, {}, cplx(kPi, 0.0));
            if (id == "i") return make(Kind::number, {}, cplx(0.0, 1.0));
            if (id == "eps") return make(Kind::eps);
            static const char* fns[] = {"sin", "cos", "exp", "log", "sqrt", "gamma"};
            for (auto f : fns) {
                if (id == f) {
                    if (!eat('(')) fail("expected '(' after " + id);
                    auto a = expr();
                    if (!eat(')')) fail("missing ')'");
                    return make(Kind::call, {a}, {}, id);
                }
            }
            pos_ = start;
            fail("unknown identifier '" + id + "'");
        }
        fail("unexpected character");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

cplx evaluate(const ConstExpr::Node& n, double eps) {
    switch (n.kind) {
        case Kind::number: return n.value;
        case Kind::eps: return cplx(eps, 0.0);
        case Kind::add: return evaluate(*n.args[0], eps) + evaluate(*n.args[1], eps);
        case Kind::sub: return evaluate(*n.args[0], eps) - evaluate(*n.args[1], eps);
        case Kind::mul: return evaluate(*n.args[0], eps) * evaluate(*n.args[1], eps);
        case Kind::div: return evaluate(*n.args[0], eps) / evaluate(*n.args[1], eps);
        case Kind::neg: return -evaluate(*n.args[0], eps);
        case Kind::pow: {
            cplx b = evaluate(*n.args[0], eps);
            cplx e = evaluate(*n.args[1], eps);
            if (e.imag() == 0.0 && e.real() == std::round(e.real()) && std::abs(e.real()) < 64)
                return std::pow(b, static_cast<int>(e.real()));
            return std::pow(b, e);
        }
        case Kind::call: {
            cplx a = evaluate(*n.args[0], eps);
            if (n.fn == "sin") return std::sin(a);
            if (n.fn == "cos") return std::cos(a);
            if (n.fn == "exp") return std::exp(a);
            if (n.fn == "log") return std::log(a);
            if (n.fn == "sqrt") return std::sqrt(a);
            return gamma_c(a);
        }
    }
    return {};
}

}  // namespace

ConstExpr::ConstExpr() : text_("1"), root_(make(Kind::number, {}, cplx(1.0, 0.0))) {}

ConstExpr ConstExpr::parse(const std::string& text) {
    ConstExpr e;
    e.text_ = text;
    e.root_ = Parser(text).run();
    return e;
}

ConstExpr ConstExpr::literal(double v) {
    ConstExpr e;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    e.text_ = buf;
    e.root_ = make(Kind::number, {}, cplx(v, 0.0));
    return e;
}

std::complex<double> ConstExpr::eval(double eps) const { return evaluate(*root_, eps); }

}  // namespace mb
