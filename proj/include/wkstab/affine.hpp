#pragma once

#include <vector>

#include "wkstab/polynomial.hpp"
#include "wkstab/rational.hpp"

namespace wkstab {

/// Affine map y -> constant + <gradient, y> with exact coefficients.
struct AffineFunction {
    Rational constant;
    std::vector<Rational> gradient;

    AffineFunction() : constant(0) {}
    AffineFunction(Rational c, std::vector<Rational> g)
        : constant(std::move(c)), gradient(std::move(g)) {}

    static AffineFunction zero(int dim) {
        return AffineFunction(Rational(0), std::vector<Rational>(dim, Rational(0)));
    }

    int dim() const { return static_cast<int>(gradient.size()); }

    Rational value(const Point& y) const {
        Rational s = constant;
        for (std::size_t i = 0; i < gradient.size(); ++i) s += gradient[i] * y[i];
        return s;
    }

    Polynomial to_polynomial() const {
        Polynomial p = Polynomial::constant(dim(), constant);
        for (int i = 0; i < dim(); ++i)
            p = p + gradient[i] * Polynomial::coordinate(dim(), i);
        return p;
    }

    friend AffineFunction operator+(const AffineFunction& a, const AffineFunction& b) {
        AffineFunction r = a;
        r.constant += b.constant;
        for (std::size_t i = 0; i < r.gradient.size(); ++i) r.gradient[i] += b.gradient[i];
        return r;
    }

    friend AffineFunction operator-(const AffineFunction& a, const AffineFunction& b) {
        AffineFunction r = a;
        r.constant -= b.constant;
        for (std::size_t i = 0; i < r.gradient.size(); ++i) r.gradient[i] -= b.gradient[i];
        return r;
    }

    friend AffineFunction operator*(const Rational& c, const AffineFunction& a) {
        AffineFunction r = a;
        r.constant *= c;
        for (auto& g : r.gradient) g *= c;
        return r;
    }

    friend bool operator==(const AffineFunction& a, const AffineFunction& b) {
        return a.constant == b.constant && a.gradient == b.gradient;
    }
    friend bool operator<(const AffineFunction& a, const AffineFunction& b) {
        if (a.constant != b.constant) return a.constant < b.constant;
        return a.gradient < b.gradient;
    }
};

}  // namespace wkstab
