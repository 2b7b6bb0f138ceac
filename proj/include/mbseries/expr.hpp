#pragma once

#include <complex>
#include <memory>
#include <string>

namespace mb {

// Small arithmetic language over eps, pi, i, numbers and
// sin/cos/exp/log/sqrt/gamma. Evaluates in complex arithmetic.
class ConstExpr {
public:
    struct Node;

    ConstExpr();
    static ConstExpr parse(const std::string& text);
    static ConstExpr literal(double v);

    std::complex<double> eval(double eps) const;
    const std::string& text() const { return text_; }

    friend bool operator==(const ConstExpr& a, const ConstExpr& b) { return a.text_ == b.text_; }

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

}  // namespace mb
