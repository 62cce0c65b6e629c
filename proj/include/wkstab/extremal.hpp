#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "wkstab/pl_function.hpp"
#include "wkstab/quadrature.hpp"

namespace wkstab {

/// Solution of the weighted extremal equation
///   2 int_{dP} xi v dsigma = int_P xi w l dy  for xi in {1, y_1, ..., y_n}.
/// On the exact path the residual is identically zero and is still recomputed
/// from the solved coefficients as a check.
struct ExtremalSolution {
    AffineFunction ell;
    bool exact = true;
    std::vector<std::vector<double>> gram;
    std::vector<double> rhs;
    double residual = 0.0;
    double min_eigenvalue_estimate = 0.0;
    int quadrature_degree = 0;  // 0 means fully exact inputs
    std::vector<std::vector<Rational>> gram_exact;
    std::vector<Rational> rhs_exact;
};

namespace detail {

inline Polynomial affine_basis_poly(int dim, int i) {
    return i == 0 ? Polynomial::constant(dim, Rational(1)) : Polynomial::coordinate(dim, i - 1);
}

}  // namespace detail

/// Gram matrix M_ij = int_P xi_i xi_j w dy of the affine basis, exact for
/// polynomial weights.
inline std::vector<std::vector<Rational>> gram_matrix(const Polytope& P, const Polynomial& w,
                                                      const Triangulation& T) {
    const int n = P.dim();
    std::vector<std::vector<Rational>> M(n + 1, std::vector<Rational>(n + 1));
    for (int i = 0; i <= n; ++i)
        for (int j = i; j <= n; ++j) {
            Polynomial g = detail::affine_basis_poly(n, i) * detail::affine_basis_poly(n, j) * w;
            M[i][j] = integrate_polynomial_region(g, T);
            M[j][i] = M[i][j];
        }
    return M;
}

inline std::vector<std::vector<double>> gram_matrix(const Polytope& P, const SmoothWeight& w,
                                                    const Triangulation& T) {
    const int n = P.dim();
    std::vector<std::vector<double>> M(n + 1, std::vector<double>(n + 1));
    for (int i = 0; i <= n; ++i)
        for (int j = i; j <= n; ++j) {
            Polynomial factor = detail::affine_basis_poly(n, i) * detail::affine_basis_poly(n, j);
            M[i][j] = integrate_smooth_region(w, T, &factor);
            M[j][i] = M[i][j];
        }
    return M;
}

/// b_i = 2 int_{dP} xi_i v dsigma, exact for polynomial v.
inline std::vector<Rational> boundary_moment_vector(const Polytope& P, const Polynomial& v) {
    const int n = P.dim();
    std::vector<Rational> b(n + 1);
    for (int i = 0; i <= n; ++i)
        b[i] = 2 * integrate_polynomial_boundary(detail::affine_basis_poly(n, i) * v, P);
    return b;
}

inline std::vector<double> boundary_moment_vector(const Polytope& P, const SmoothWeight& v) {
    const int n = P.dim();
    std::vector<double> b(n + 1);
    for (int i = 0; i <= n; ++i) {
        Polynomial factor = detail::affine_basis_poly(n, i);
        b[i] = 2.0 * integrate_smooth_boundary(v, P, &factor);
    }
    return b;
}

/// Sample-based positivity check of a weight on P: polytope vertices, simplex
/// barycenters, and (for smooth weights) the quadrature nodes. A certified
/// global check is out of scope; the sampling basis is what gets reported.
inline void check_weight_positive(const Polytope& P, const Triangulation& T, const Weight& w,
                                  const std::string& label) {
    auto bad = [&](const Point& y) -> bool { return weight_eval_double(w, y) <= 0.0; };
    auto bad_exact = [&](const Point& y) -> bool {
        if (!weight_is_polynomial(w)) return bad(y);
        return weight_polynomial(w).eval(y) <= 0;
    };
    for (const auto& v : P.vertices())
        if (bad_exact(v))
            throw NotPositiveDefinite(label + " is not positive at a polytope vertex");
    for (std::size_t s = 0; s < T.simplices().size(); ++s)
        if (bad_exact(T.simplex_barycenter(static_cast<int>(s))))
            throw NotPositiveDefinite(label + " is not positive at a simplex barycenter");
    if (!weight_is_polynomial(w)) {
        const auto& sw = std::get<SmoothWeight>(w);
        const auto& rule = detail::gm_rule(P.dim(), sw.quadrature_degree);
        for (std::size_t s = 0; s < T.simplices().size(); ++s) {
            auto pts = T.simplex_points(static_cast<int>(s));
            for (const auto& node : rule) {
                Point y(P.dim(), Rational(0));
                for (std::size_t j = 0; j < pts.size(); ++j)
                    for (int i = 0; i < P.dim(); ++i) y[i] += node.barycentric[j] * pts[j][i];
                if (bad(y))
                    throw NotPositiveDefinite(label + " is not positive at a quadrature node");
            }
        }
    }
}

/// Unique affine solution of the weighted extremal equation. Requires w > 0
/// on P (sampled) and a strictly positive definite Gram form, certified by
/// exact leading principal minors on the rational path.
inline ExtremalSolution solve_extremal(const Polytope& P, const Weight& v, const Weight& w,
                                       const Triangulation& T) {
    const int n = P.dim();
    check_weight_positive(P, T, w, "weight w");
    ExtremalSolution sol;
    sol.quadrature_degree =
        std::max(weight_quadrature_degree(v), weight_quadrature_degree(w));
    sol.exact = weight_is_polynomial(v) && weight_is_polynomial(w);

    if (sol.exact) {
        auto M = gram_matrix(P, weight_polynomial(w), T);
        auto b = boundary_moment_vector(P, weight_polynomial(v));
        for (int k = 1; k <= n + 1; ++k) {
            linalg::RatMat lead(k, linalg::RatVec(k));
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) lead[i][j] = M[i][j];
            if (linalg::determinant(lead) <= 0)
                throw NotPositiveDefinite("Gram matrix is not strictly positive definite");
        }
        auto x = linalg::solve(M, b);
        if (!x) throw SingularSystem("Gram system is singular");
        sol.ell.constant = (*x)[0];
        sol.ell.gradient.assign(x->begin() + 1, x->end());
        Rational res = 0;
        for (int i = 0; i <= n; ++i) {
            Rational lhs = b[i];
            for (int j = 0; j <= n; ++j) lhs -= M[i][j] * (*x)[j];
            res = std::max(res, abs(lhs));
        }
        sol.residual = to_double(res);
        sol.gram_exact = M;
        sol.rhs_exact = b;
        sol.gram.assign(n + 1, std::vector<double>(n + 1));
        sol.rhs.assign(n + 1, 0.0);
        for (int i = 0; i <= n; ++i) {
            sol.rhs[i] = to_double(b[i]);
            for (int j = 0; j <= n; ++j) sol.gram[i][j] = to_double(M[i][j]);
        }
    } else {
        std::vector<std::vector<double>> M;
        if (weight_is_polynomial(w)) {
            auto Mx = gram_matrix(P, weight_polynomial(w), T);
            M.assign(n + 1, std::vector<double>(n + 1));
            for (int i = 0; i <= n; ++i)
                for (int j = 0; j <= n; ++j) M[i][j] = to_double(Mx[i][j]);
        } else {
            M = gram_matrix(P, std::get<SmoothWeight>(w), T);
        }
        std::vector<double> b;
        if (weight_is_polynomial(v)) {
            auto bx = boundary_moment_vector(P, weight_polynomial(v));
            for (const auto& e : bx) b.push_back(to_double(e));
        } else {
            b = boundary_moment_vector(P, std::get<SmoothWeight>(v));
        }
        auto ev = linalg::symmetric_eigenvalues(M);
        double min_ev = ev[0];
        for (double e : ev) min_ev = std::min(min_ev, e);
        if (min_ev <= 0)
            throw NotPositiveDefinite("Gram matrix is not positive definite (numeric path)");
        double cond = 0;
        auto x = linalg::solve_double(M, b, &cond);
        if (!x)
            throw SingularSystem("Gram system numerically singular, condition estimate " +
                                 detail::format_double(cond));
        sol.ell.constant = Rational((*x)[0]);  // doubles convert exactly
        sol.ell.gradient.clear();
        for (int i = 1; i <= n; ++i) sol.ell.gradient.push_back(Rational((*x)[i]));
        double res = 0;
        for (int i = 0; i <= n; ++i) {
            double lhs = b[i];
            for (int j = 0; j <= n; ++j) lhs -= M[i][j] * (*x)[j];
            res = std::max(res, std::abs(lhs));
        }
        sol.residual = res;
        sol.gram = M;
        sol.rhs = b;
    }

    {
        auto ev = linalg::symmetric_eigenvalues(sol.gram);
        double min_ev = ev.empty() ? 0.0 : ev[0];
        for (double e : ev) min_ev = std::min(min_ev, e);
        sol.min_eigenvalue_estimate = min_ev;
    }
    return sol;
}

/// Normalizing constant c_{(v,w)} in its toric form
///   2 int_{dP} v dsigma / int_P w dy,
/// with the convention c = 1 when the denominator vanishes.
inline Value c_constant(const Polytope& P, const Weight& v, const Weight& w) {
    Triangulation T = triangulate(std::make_shared<Polytope>(P), 0);
    Value num, den;
    if (weight_is_polynomial(v))
        num = Value(2 * integrate_polynomial_boundary(weight_polynomial(v), P));
    else
        num = Value(2.0 * integrate_smooth_boundary(std::get<SmoothWeight>(v), P));
    if (weight_is_polynomial(w))
        den = Value(integrate_polynomial_region(weight_polynomial(w), T));
    else
        den = Value(integrate_smooth_region(std::get<SmoothWeight>(w), T));
    if (den.is_exact() ? den.exact() == 0 : den.as_double() == 0.0)
        return Value(Rational(1));
    return num / den;
}

struct FamilyEntry {
    Rational eps;
    std::optional<ExtremalSolution> solution;
    std::optional<Value> c;
    std::string error;
};

/// l_ext on the perturbed family P_eps, one entry per requested eps (always
/// including eps = 0). Failures are recorded per entry without aborting.
inline std::vector<FamilyEntry> extremal_family(const Polytope& P,
                                                const std::vector<PerturbCut>& extra,
                                                const Weight& v, const Weight& w,
                                                std::vector<Rational> eps_list) {
    eps_list.push_back(Rational(0));
    std::sort(eps_list.begin(), eps_list.end());
    eps_list.erase(std::unique(eps_list.begin(), eps_list.end()), eps_list.end());
    std::vector<FamilyEntry> out;
    for (const auto& eps : eps_list) {
        FamilyEntry entry;
        entry.eps = eps;
        try {
            Polytope Pe = perturb(P, extra, eps);
            Triangulation T = triangulate(std::make_shared<Polytope>(Pe), 0);
            entry.solution = solve_extremal(Pe, v, w, T);
            entry.c = c_constant(Pe, v, w);
        } catch (const Error& e) {
            entry.error = e.what();
        }
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace wkstab
