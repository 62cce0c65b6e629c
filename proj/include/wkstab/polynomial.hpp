#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "wkstab/rational.hpp"

namespace wkstab {

/// Sparse multivariate polynomial with exact rational coefficients.
/// Terms are keyed by exponent multi-indices; zero coefficients are never
/// stored, so equality of representations is equality of polynomials.
class Polynomial {
public:
    using Exponents = std::vector<unsigned>;

    explicit Polynomial(int dim = 0) : dim_(dim) {}

    static Polynomial constant(int dim, const Rational& c) {
        Polynomial p(dim);
        p.add_term(Exponents(dim, 0), c);
        return p;
    }

    static Polynomial coordinate(int dim, int i) {
        Polynomial p(dim);
        Exponents e(dim, 0);
        e[i] = 1;
        p.add_term(e, Rational(1));
        return p;
    }

    int dim() const { return dim_; }
    bool is_zero() const { return terms_.empty(); }
    const std::map<Exponents, Rational>& terms() const { return terms_; }

    unsigned degree() const {
        unsigned d = 0;
        for (const auto& [e, c] : terms_) {
            unsigned t = 0;
            for (unsigned k : e) t += k;
            d = std::max(d, t);
        }
        return d;
    }

    void add_term(const Exponents& e, const Rational& c) {
        if (c == 0) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(e, c);
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Rational eval(const Point& y) const {
        Rational s = 0;
        for (const auto& [e, c] : terms_) {
            Rational t = c;
            for (std::size_t i = 0; i < e.size(); ++i)
                for (unsigned k = 0; k < e[i]; ++k) t *= y[i];
            s += t;
        }
        return s;
    }

    double eval_double(const std::vector<double>& y) const {
        double s = 0;
        for (const auto& [e, c] : terms_) {
            double t = to_double(c);
            for (std::size_t i = 0; i < e.size(); ++i)
                for (unsigned k = 0; k < e[i]; ++k) t *= y[i];
            s += t;
        }
        return s;
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        Polynomial r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, c);
        return r;
    }

    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        Polynomial r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, -c);
        return r;
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        Polynomial r(a.dim_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                Exponents e(ea.size());
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
                r.add_term(e, ca * cb);
            }
        return r;
    }

    friend Polynomial operator*(const Rational& c, const Polynomial& p) {
        Polynomial r(p.dim_);
        for (const auto& [e, pc] : p.terms_) r.add_term(e, c * pc);
        return r;
    }

    friend bool operator==(const Polynomial& a, const Polynomial& b) {
        return a.dim_ == b.dim_ && a.terms_ == b.terms_;
    }

    /// Substitutes y_i = shift_i + sum_j basis[i][j] * t_j, producing a
    /// polynomial in the t variables (the workhorse behind simplex pullbacks).
    Polynomial compose_affine(const std::vector<std::vector<Rational>>& basis,
                              const Point& shift, int new_dim) const {
        std::vector<Polynomial> coord(dim_);
        for (int i = 0; i < dim_; ++i) {
            Polynomial a = Polynomial::constant(new_dim, shift[i]);
            for (int j = 0; j < new_dim; ++j)
                a = a + basis[i][j] * Polynomial::coordinate(new_dim, j);
            coord[i] = a;
        }
        Polynomial out(new_dim);
        for (const auto& [e, c] : terms_) {
            Polynomial term = Polynomial::constant(new_dim, c);
            for (int i = 0; i < dim_; ++i)
                for (unsigned k = 0; k < e[i]; ++k) term = term * coord[i];
            out = out + term;
        }
        return out;
    }

private:
    int dim_;
    std::map<Exponents, Rational> terms_;
};

/// Black-box weight evaluated in floating point; integrated only through a
/// fixed-degree symmetric simplex rule. The degree is carried along so every
/// downstream report can state it.
struct SmoothWeight {
    std::function<double(const std::vector<double>&)> evaluator;
    int quadrature_degree = 7;
    std::string name;               // builtin identifier, if any
    std::vector<double> params;

    double eval(const Point& y) const {
        std::vector<double> yd(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) yd[i] = to_double(y[i]);
        return evaluator(yd);
    }
};

/// Named smooth weights constructible from config files. "exp_linear" with
/// params [c, a_1, ..., a_n] is exp(c + <a, y>).
inline SmoothWeight make_builtin_weight(const std::string& name,
                                        const std::vector<double>& params,
                                        int quadrature_degree) {
    SmoothWeight w;
    w.name = name;
    w.params = params;
    w.quadrature_degree = quadrature_degree;
    if (name == "exp_linear") {
        w.evaluator = [params](const std::vector<double>& y) {
            double s = params.empty() ? 0.0 : params[0];
            for (std::size_t i = 0; i < y.size() && i + 1 < params.size(); ++i)
                s += params[i + 1] * y[i];
            return std::exp(s);
        };
        return w;
    }
    throw InvalidArgument("unknown builtin weight '" + name + "'");
}

/// A weight is either a polynomial (exact path) or a sampled-smooth callable.
using Weight = std::variant<Polynomial, SmoothWeight>;

inline bool weight_is_polynomial(const Weight& w) {
    return std::holds_alternative<Polynomial>(w);
}

inline const Polynomial& weight_polynomial(const Weight& w) {
    return std::get<Polynomial>(w);
}

inline double weight_eval_double(const Weight& w, const Point& y) {
    if (weight_is_polynomial(w)) return to_double(weight_polynomial(w).eval(y));
    return std::get<SmoothWeight>(w).eval(y);
}

inline int weight_quadrature_degree(const Weight& w) {
    return weight_is_polynomial(w) ? 0 : std::get<SmoothWeight>(w).quadrature_degree;
}

}  // namespace wkstab
