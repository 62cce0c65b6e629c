#pragma once

#include <map>
#include <mutex>
#include <vector>

#include "wkstab/affine.hpp"
#include "wkstab/polynomial.hpp"
#include "wkstab/triangulation.hpp"

namespace wkstab {

namespace detail {

inline Integer factorial(unsigned k) {
    Integer f = 1;
    for (unsigned i = 2; i <= k; ++i) f *= i;
    return f;
}

/// Dirichlet integral over the standard simplex in R^n:
/// int_Delta lambda^beta dlambda = (prod beta_i!) / (|beta| + n)!.
inline Rational dirichlet_integral(const Polynomial::Exponents& beta, int n) {
    Integer num = 1;
    unsigned total = 0;
    for (unsigned b : beta) {
        num *= factorial(b);
        total += b;
    }
    return Rational(num, factorial(total + static_cast<unsigned>(n)));
}

inline Rational dirichlet_integral_poly(const Polynomial& g, int n) {
    Rational s = 0;
    for (const auto& [e, c] : g.terms()) s += c * dirichlet_integral(e, n);
    return s;
}

struct Pullback {
    Polynomial poly;   // g composed with the simplex parameterization
    Rational jacobian; // |det E| (region case only)
};

/// y(lambda) = s0 + sum lambda_j (s_j - s0) over the standard simplex of
/// dimension |S|-1.
inline Pullback pullback_to_reference(const Polynomial& g, const std::vector<Point>& S) {
    const int n = g.dim();
    const int d = static_cast<int>(S.size()) - 1;
    std::vector<std::vector<Rational>> E(n, std::vector<Rational>(d));
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < n; ++i) E[i][j] = S[j + 1][i] - S[0][i];
    Pullback pb;
    pb.poly = g.compose_affine(E, S[0], d);
    if (d == n) {
        linalg::RatMat M(n, linalg::RatVec(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) M[i][j] = E[i][j];
        pb.jacobian = abs(linalg::determinant(M));
    } else {
        pb.jacobian = 0;
    }
    return pb;
}

/// Barycentric coordinate of local vertex j as a polynomial on the reference
/// simplex (lambda_0 = 1 - sum, lambda_j = coordinate).
inline Polynomial reference_barycentric(int d, int j) {
    if (j == 0) {
        Polynomial p = Polynomial::constant(d, Rational(1));
        for (int i = 0; i < d; ++i) p = p - Polynomial::coordinate(d, i);
        return p;
    }
    return Polynomial::coordinate(d, j - 1);
}

}  // namespace detail

/// Exact integral of the monomial y^alpha over a nondegenerate simplex.
inline Rational integrate_monomial_simplex(const Polynomial::Exponents& alpha,
                                           const std::vector<Point>& S) {
    const int n = static_cast<int>(S[0].size());
    Polynomial mono(n);
    mono.add_term(alpha, Rational(1));
    auto pb = detail::pullback_to_reference(mono, S);
    if (pb.jacobian == 0) throw DegenerateSimplex("simplex is degenerate");
    return pb.jacobian * detail::dirichlet_integral_poly(pb.poly, n);
}

inline Rational integrate_polynomial_simplex(const Polynomial& g, const std::vector<Point>& S) {
    auto pb = detail::pullback_to_reference(g, S);
    if (pb.jacobian == 0) throw DegenerateSimplex("simplex is degenerate");
    return pb.jacobian * detail::dirichlet_integral_poly(pb.poly, g.dim());
}

/// Exact integral of a polynomial over the whole region of a triangulation.
inline Rational integrate_polynomial_region(const Polynomial& g, const Triangulation& T) {
    Rational s = 0;
    for (std::size_t i = 0; i < T.simplices().size(); ++i)
        s += integrate_polynomial_simplex(g, T.simplex_points(static_cast<int>(i)));
    return s;
}

/// Exact lattice-normalized integral of a polynomial over one boundary
/// simplex lying in a facet with primitive normal u.
inline Rational integrate_polynomial_boundary_simplex(const Polynomial& g,
                                                      const std::vector<Point>& S,
                                                      const std::vector<Integer>& u) {
    if (S.size() == 1) return g.eval(S[0]);  // n = 1: unit atom
    Rational scale = detail::sigma_scale(S, u);
    auto pb = detail::pullback_to_reference(g, S);
    return scale * detail::dirichlet_integral_poly(pb.poly, static_cast<int>(S.size()) - 1);
}

/// Exact integral of a polynomial against dsigma over the full boundary.
inline Rational integrate_polynomial_boundary(const Polynomial& g, const Polytope& P) {
    Rational s = 0;
    for (std::size_t f = 0; f < P.facets().size(); ++f) {
        if (P.dim() == 1) {
            s += g.eval(P.vertices()[P.facets()[f].vertex_ids[0]]);
            continue;
        }
        for (const auto& bs : P.facet_simplices(static_cast<int>(f)))
            s += integrate_polynomial_boundary_simplex(g, bs, P.facets()[f].normal);
    }
    return s;
}

/// Exact integral over S of (hat function of local vertex j) * g. The hat is
/// the barycentric coordinate, so it pulls back to a reference coordinate.
inline Rational integrate_hat_times_poly_simplex(int local_vertex, const Polynomial& g,
                                                 const std::vector<Point>& S) {
    auto pb = detail::pullback_to_reference(g, S);
    if (pb.jacobian == 0) throw DegenerateSimplex("simplex is degenerate");
    const int d = static_cast<int>(S.size()) - 1;
    Polynomial prod = pb.poly * detail::reference_barycentric(d, local_vertex);
    return pb.jacobian * detail::dirichlet_integral_poly(prod, d);
}

inline Rational integrate_hat_times_poly_boundary_simplex(int local_vertex, const Polynomial& g,
                                                          const std::vector<Point>& S,
                                                          const std::vector<Integer>& u) {
    if (S.size() == 1) return g.eval(S[0]);
    Rational scale = detail::sigma_scale(S, u);
    auto pb = detail::pullback_to_reference(g, S);
    const int d = static_cast<int>(S.size()) - 1;
    Polynomial prod = pb.poly * detail::reference_barycentric(d, local_vertex);
    return scale * detail::dirichlet_integral_poly(prod, d);
}

// ---------------------------------------------------------------------------
// Grundmann-Moller symmetric simplex rules (degree 2s+1), used only for
// sampled-smooth weights. Nodes and weights are derived exactly and cached.

struct QuadratureNode {
    double weight;
    std::vector<Rational> barycentric;  // d+1 coordinates
};

namespace detail {

inline const std::vector<QuadratureNode>& gm_rule(int d, int degree) {
    if (degree < 1) degree = 1;
    const int s = (degree % 2 == 1) ? (degree - 1) / 2 : degree / 2;
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::vector<QuadratureNode>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(d, s);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    std::vector<QuadratureNode> rule;
    const int dd = 2 * s + 1;
    for (int i = 0; i <= s; ++i) {
        Integer denom_scale = 1;
        for (int t = 0; t < 2 * s; ++t) denom_scale *= 2;
        Integer numer = 1;
        for (int t = 0; t < dd; ++t) numer *= Integer(dd + d - 2 * i);
        Rational w = Rational(numer, denom_scale * factorial(i) * factorial(dd + d - i));
        if (i % 2 == 1) w = -w;
        // all beta in Z_{>=0}^{d+1} with |beta| = s - i
        std::vector<int> beta(d + 1, 0);
        beta[0] = s - i;
        while (true) {
            QuadratureNode node;
            node.weight = to_double(w);
            node.barycentric.resize(d + 1);
            for (int j = 0; j <= d; ++j)
                node.barycentric[j] = Rational(2 * beta[j] + 1, dd + d - 2 * i);
            rule.push_back(std::move(node));
            // next composition
            int j = 0;
            while (j < d && beta[j] == 0) ++j;
            if (j == d) break;
            int v = beta[j];
            beta[j] = 0;
            beta[0] = v - 1;
            beta[j + 1] += 1;
        }
    }
    return cache.emplace(key, std::move(rule)).first->second;
}

}  // namespace detail

/// Numeric integral of a black-box weight over the triangulation, optionally
/// multiplied by a polynomial factor (evaluated exactly, then cast). The node
/// set and summation order are deterministic.
inline double integrate_smooth_region(const SmoothWeight& w, const Triangulation& T,
                                      const Polynomial* poly_factor = nullptr) {
    const int n = T.dim();
    const auto& rule = detail::gm_rule(n, w.quadrature_degree);
    double total = 0;
    for (std::size_t si = 0; si < T.simplices().size(); ++si) {
        auto S = T.simplex_points(static_cast<int>(si));
        auto pb = detail::pullback_to_reference(Polynomial::constant(n, Rational(1)), S);
        double jac = to_double(pb.jacobian);
        double acc = 0;
        for (const auto& node : rule) {
            Point y(n, Rational(0));
            for (int j = 0; j <= n; ++j)
                for (int i = 0; i < n; ++i) y[i] += node.barycentric[j] * S[j][i];
            double v = w.eval(y);
            if (poly_factor) v *= to_double(poly_factor->eval(y));
            acc += node.weight * v;
        }
        total += jac * acc;
    }
    return total;
}

/// Numeric lattice-normalized boundary integral of a black-box weight.
inline double integrate_smooth_boundary(const SmoothWeight& w, const Polytope& P,
                                        const Polynomial* poly_factor = nullptr) {
    const int n = P.dim();
    double total = 0;
    for (std::size_t f = 0; f < P.facets().size(); ++f) {
        if (n == 1) {
            const Point& p = P.vertices()[P.facets()[f].vertex_ids[0]];
            double v = w.eval(p);
            if (poly_factor) v *= to_double(poly_factor->eval(p));
            total += v;
            continue;
        }
        const auto& rule = detail::gm_rule(n - 1, w.quadrature_degree);
        for (const auto& S : P.facet_simplices(static_cast<int>(f))) {
            double scale = to_double(detail::sigma_scale(S, P.facets()[f].normal));
            double acc = 0;
            for (const auto& node : rule) {
                Point y(n, Rational(0));
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < n; ++i) y[i] += node.barycentric[j] * S[j][i];
                double v = w.eval(y);
                if (poly_factor) v *= to_double(poly_factor->eval(y));
                acc += node.weight * v;
            }
            // The GM rule integrates over the reference simplex; sigma_scale
            // carries both the chart Jacobian and the 1/|u| normalization.
            total += scale * acc;
        }
    }
    return total;
}

}  // namespace wkstab
