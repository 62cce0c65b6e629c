#pragma once

#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wkstab/extremal.hpp"
#include "wkstab/pl_function.hpp"
#include "wkstab/simplex_lp.hpp"

namespace wkstab {

/// Effective weight w * l for an affine l (the extremal-relative form).
inline Weight weight_times_affine(const Weight& w, const AffineFunction& ell) {
    if (weight_is_polynomial(w)) return weight_polynomial(w) * ell.to_polynomial();
    SmoothWeight out = std::get<SmoothWeight>(w);
    std::vector<double> grad(ell.gradient.size());
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = to_double(ell.gradient[i]);
    double c0 = to_double(ell.constant);
    auto base = out.evaluator;
    out.evaluator = [base, grad, c0](const std::vector<double>& y) {
        double l = c0;
        for (std::size_t i = 0; i < grad.size(); ++i) l += grad[i] * y[i];
        return base(y) * l;
    };
    out.name = out.name.empty() ? "smooth*ell" : out.name + "*ell";
    return out;
}

/// Toric weighted Mabuchi functional on a PL convex test function:
///   L_{v,w}(f) = 2 int_{dP} f v dsigma - c int_P f w_eff dy.
/// Exact when every input is rational. T must refine f's linearity domains.
inline Value evaluate_L(const PLConvexFunction& f, const Polytope& P, const Weight& v,
                        const Weight& w_eff, const Value& c, const Triangulation& T) {
    (void)P;
    Value boundary = integrate_pl_weight_boundary(f, v, T);
    Value region = integrate_pl_weight_region(f, w_eff, T);
    return Value(2) * boundary - c * region;
}

/// Weighted Futaki invariant of the product test configuration generated by
/// an affine xi: Fut = 2 int_{dP} xi v dsigma - c int_P xi w dy.
inline Value weighted_futaki(const AffineFunction& xi, const Polytope& P, const Weight& v,
                             const Weight& w, const Value& c) {
    Polynomial xp = xi.to_polynomial();
    Value boundary, region;
    if (weight_is_polynomial(v))
        boundary = Value(integrate_polynomial_boundary(xp * weight_polynomial(v), P));
    else
        boundary = Value(integrate_smooth_boundary(std::get<SmoothWeight>(v), P, &xp));
    Triangulation T = triangulate(std::make_shared<Polytope>(P), 0);
    if (weight_is_polynomial(w))
        region = Value(integrate_polynomial_region(xp * weight_polynomial(w), T));
    else
        region = Value(integrate_smooth_region(std::get<SmoothWeight>(w), T, &xp));
    return Value(2) * boundary - c * region;
}

struct MAAtom {
    Polytope cell;
    std::vector<Rational> gradient;
    Value mass;
};

struct NAMeasureAtoms {
    std::vector<MAAtom> atoms;
    Value total;
};

/// Atomic weighted Monge-Ampere measure of a PL convex potential: one atom
/// per maximal linearity cell, carrying the cell's slope and v-mass. Masses
/// sum to int_P v dy exactly on the rational path.
inline NAMeasureAtoms discrete_MA(const PLConvexFunction& f, const Weight& v,
                                  const Polytope& P) {
    (void)P;
    NAMeasureAtoms out;
    out.total = Value(Rational(0));
    for (auto& [cell, piece] : linearity_cells(f)) {
        MAAtom atom;
        Triangulation Tc = triangulate(std::make_shared<Polytope>(cell), 0);
        if (weight_is_polynomial(v))
            atom.mass = Value(integrate_polynomial_region(weight_polynomial(v), Tc));
        else
            atom.mass = Value(integrate_smooth_region(std::get<SmoothWeight>(v), Tc));
        atom.gradient = piece.gradient;
        atom.cell = std::move(cell);
        out.total += atom.mass;
        out.atoms.push_back(std::move(atom));
    }
    return out;
}

struct NormalizationChecks {
    Value boundary_integral;  // int_{dP} f dsigma, recomputed independently
    Value value_at_y0;
    Value min_vertex_value;
};

/// Outcome of the destabilizer LP. delta < 0 certifies a destabilizer;
/// delta > 0 is evidence of stability relative to the explored subcone only
/// (the caveat string repeats this one-sidedness in every report).
struct StabilityReport {
    double delta = 0.0;
    std::optional<Rational> delta_exact;
    std::optional<PLConvexFunction> minimizer;
    LPStatus lp_status = LPStatus::Infeasible;
    std::string triangulation_id;
    NormalizationChecks normalization_checks;
    Point y0;
    long lp_pivots = 0;
    int quadrature_degree = 0;
    std::optional<Value> recheck_L;  // evaluate_L on the minimizer, independent path
    std::optional<double> delta_refined;
    std::optional<Rational> delta_refined_exact;
    std::string caveat =
        "triangulation-restricted search: delta < 0 is a sound destabilizer "
        "certificate; delta > 0 is evidence relative to this subcone only";
};

namespace detail {

struct LPCoefficients {
    std::vector<Rational> objective;
    std::vector<Rational> boundary_row;  // int_{dP} hat_p dsigma per point
    bool exact = true;
};

/// Per-point coefficients of L and of the boundary normalization, assembled
/// from hat-function integrals over simplices and boundary faces.
inline LPCoefficients lp_coefficients(const Triangulation& T, const Weight& v,
                                      const Weight& w_eff, const Value& c) {
    const int n = T.dim();
    const std::size_t N = T.points().size();
    LPCoefficients out;
    out.objective.assign(N, Rational(0));
    out.boundary_row.assign(N, Rational(0));
    out.exact = weight_is_polynomial(v) && weight_is_polynomial(w_eff) && c.is_exact();
    Rational c_rat = c.is_exact() ? c.exact() : Rational(c.as_double());

    for (std::size_t s = 0; s < T.simplices().size(); ++s) {
        auto pts = T.simplex_points(static_cast<int>(s));
        const auto& ids = T.simplices()[s];
        if (weight_is_polynomial(w_eff)) {
            for (std::size_t j = 0; j < ids.size(); ++j)
                out.objective[ids[j]] -=
                    c_rat * integrate_hat_times_poly_simplex(static_cast<int>(j),
                                                             weight_polynomial(w_eff), pts);
        } else {
            const auto& sw = std::get<SmoothWeight>(w_eff);
            const auto& rule = detail::gm_rule(n, sw.quadrature_degree);
            auto pb = detail::pullback_to_reference(Polynomial::constant(n, Rational(1)), pts);
            double jac = to_double(pb.jacobian);
            for (std::size_t j = 0; j < ids.size(); ++j) {
                double acc = 0;
                for (const auto& node : rule) {
                    Point y(n, Rational(0));
                    for (std::size_t q = 0; q < pts.size(); ++q)
                        for (int i = 0; i < n; ++i) y[i] += node.barycentric[q] * pts[q][i];
                    acc += node.weight * sw.eval(y) * to_double(node.barycentric[j]);
                }
                out.objective[ids[j]] -= c_rat * Rational(jac * acc);
            }
        }
    }

    for (const auto& bf : T.boundary_faces()) {
        std::vector<Point> pts;
        for (int id : bf.face) pts.push_back(T.points()[id]);
        const auto& u = T.polytope().facets()[bf.facet].normal;
        for (std::size_t j = 0; j < bf.face.size(); ++j) {
            Rational one_int = integrate_hat_times_poly_boundary_simplex(
                static_cast<int>(j), Polynomial::constant(n, Rational(1)), pts, u);
            out.boundary_row[bf.face[j]] += one_int;
            if (weight_is_polynomial(v)) {
                out.objective[bf.face[j]] += 2 * integrate_hat_times_poly_boundary_simplex(
                                                     static_cast<int>(j), weight_polynomial(v),
                                                     pts, u);
            } else {
                const auto& sv = std::get<SmoothWeight>(v);
                if (n == 1) {
                    out.objective[bf.face[j]] += 2 * Rational(sv.eval(pts[0]));
                } else {
                    const auto& rule = detail::gm_rule(n - 1, sv.quadrature_degree);
                    double scale = to_double(detail::sigma_scale(pts, u));
                    double acc = 0;
                    for (const auto& node : rule) {
                        Point y(n, Rational(0));
                        for (std::size_t q = 0; q < pts.size(); ++q)
                            for (int i = 0; i < n; ++i) y[i] += node.barycentric[q] * pts[q][i];
                        acc += node.weight * sv.eval(y) * to_double(node.barycentric[j]);
                    }
                    out.objective[bf.face[j]] += 2 * Rational(scale * acc);
                }
            }
        }
    }
    return out;
}

}  // namespace detail

/// Minimizes L_{v,w_eff} over PL convex functions subordinate to T under the
/// normalized-cone constraints f >= 0, f(y0) = 0, int_{dP} f dsigma = 1.
/// The minimum is the delta estimate of the uniform stability threshold.
inline StabilityReport search_destabilizer(const Polytope& P, const Weight& v,
                                           const Weight& w_eff,
                                           std::shared_ptr<const Triangulation> T,
                                           const Point& y0,
                                           const Value& c = Value(Rational(1))) {
    if (!P.contains(y0, /*strict=*/true))
        throw PointNotInterior("normalization point y0 must be interior to P");
    auto loc = T->locate(y0);
    if (!loc) throw PointNotInterior("normalization point not located in the triangulation");

    auto coef = detail::lp_coefficients(*T, v, w_eff, c);
    const std::size_t N = T->points().size();

    LPProblem lp;
    lp.objective = coef.objective;
    lp.nonneg.assign(N, true);  // f >= 0 at every triangulation point

    // Convexity across every interior wall: the affine extension from one
    // side must not exceed the value at the opposite vertex.
    for (const auto& wall : T->interior_walls()) {
        int opposite = -1;
        for (int id : T->simplices()[wall.right])
            if (!std::binary_search(wall.face.begin(), wall.face.end(), id)) opposite = id;
        auto lam = T->barycentric(wall.left, T->points()[opposite]);
        std::map<int, Rational> row;
        row[opposite] += 1;
        const auto& left_ids = T->simplices()[wall.left];
        for (std::size_t j = 0; j < left_ids.size(); ++j) row[left_ids[j]] -= lam[j];
        LinearConstraint cons;
        cons.coeffs.assign(N, Rational(0));
        for (const auto& [id, val] : row) cons.coeffs[id] = val;
        cons.rel = Relation::GreaterEq;
        cons.rhs = 0;
        lp.constraints.push_back(std::move(cons));
    }

    // f(y0) = 0 through the barycentric interpolation in the containing
    // simplex (exactly t_{i0} = 0 when y0 is itself a triangulation point).
    {
        LinearConstraint cons;
        cons.coeffs.assign(N, Rational(0));
        const auto& ids = T->simplices()[loc->first];
        for (std::size_t j = 0; j < ids.size(); ++j) cons.coeffs[ids[j]] += loc->second[j];
        cons.rel = Relation::Equal;
        cons.rhs = 0;
        lp.constraints.push_back(std::move(cons));
    }

    // Boundary normalization int_{dP} f dsigma = 1.
    {
        LinearConstraint cons;
        cons.coeffs = coef.boundary_row;
        cons.rel = Relation::Equal;
        cons.rhs = 1;
        lp.constraints.push_back(std::move(cons));
    }

    LPResult res = lp_solve(lp);

    StabilityReport rep;
    rep.lp_status = res.status;
    rep.lp_pivots = res.pivots;
    rep.triangulation_id = T->id();
    rep.y0 = y0;
    rep.quadrature_degree =
        std::max(weight_quadrature_degree(v), weight_quadrature_degree(w_eff));
    if (res.status == LPStatus::Infeasible) {
        rep.delta = std::numeric_limits<double>::infinity();
        return rep;
    }
    if (res.status == LPStatus::Unbounded) {
        rep.delta = -std::numeric_limits<double>::infinity();
        return rep;
    }

    rep.delta = to_double(res.value);
    if (coef.exact) rep.delta_exact = res.value;
    PLConvexFunction minimizer = PLConvexFunction::from_vertex_values(T, res.point);

    rep.normalization_checks.boundary_integral = Value(integrate_pl_product_boundary(
        minimizer, Polynomial::constant(P.dim(), Rational(1)), *T));
    rep.normalization_checks.value_at_y0 = Value(minimizer.value(y0));
    Rational mn = res.point.empty() ? Rational(0) : res.point[0];
    for (const auto& t : res.point) mn = std::min(mn, t);
    rep.normalization_checks.min_vertex_value = Value(mn);
    if (rep.normalization_checks.boundary_integral.exact() != 1 ||
        rep.normalization_checks.value_at_y0.exact() != 0 || mn < 0)
        throw Error("internal: LP minimizer violates the normalization invariants");

    // Independent re-evaluation of L on the extracted minimizer; on the exact
    // path this must reproduce the LP optimum identically.
    rep.recheck_L = evaluate_L(minimizer, P, v, w_eff, c, *T);
    if (coef.exact && rep.recheck_L->is_exact() && rep.recheck_L->exact() != res.value)
        throw Error("internal: LP optimum disagrees with exact re-evaluation");
    rep.minimizer = std::move(minimizer);
    return rep;
}

inline StabilityReport search_destabilizer(const Polytope& P, const Weight& v,
                                           const Weight& w_eff, const Triangulation& T,
                                           const Point& y0,
                                           const Value& c = Value(Rational(1))) {
    return search_destabilizer(P, v, w_eff, std::make_shared<Triangulation>(T), y0, c);
}

struct StabilityConfig {
    int refine = 1;
    std::optional<Point> y0;
    bool trend = true;  // also solve at refinement k+1
};

struct CheckResult {
    ExtremalSolution extremal;
    Value c_pair;  // c_{(v,w)} of the input pair, for reporting
    StabilityReport report;
};

/// Full stability pipeline: solve l_ext, form the effective weight w*l_ext
/// (for which c = 1), run the destabilizer search at the configured
/// refinement, and report the delta trend one refinement deeper.
inline CheckResult check_stability(const Polytope& P, const Weight& v, const Weight& w,
                                   const StabilityConfig& config) {
    auto Pp = std::make_shared<Polytope>(P);
    Triangulation T0 = triangulate(Pp, 0);
    CheckResult out;
    out.extremal = solve_extremal(P, v, w, T0);
    out.c_pair = c_constant(P, v, w);
    Weight w_eff = weight_times_affine(w, out.extremal.ell);

    Point y0;
    if (config.y0) {
        y0 = *config.y0;
    } else {
        Point origin(P.dim(), Rational(0));
        y0 = P.contains(origin, /*strict=*/true) ? origin : P.barycenter();
    }

    auto Tk = std::make_shared<Triangulation>(triangulate(Pp, config.refine));
    out.report = search_destabilizer(P, v, w_eff, Tk, y0, Value(Rational(1)));
    if (config.trend) {
        auto Tk1 = std::make_shared<Triangulation>(Tk->refine());
        StabilityReport finer = search_destabilizer(P, v, w_eff, Tk1, y0, Value(Rational(1)));
        out.report.delta_refined = finer.delta;
        out.report.delta_refined_exact = finer.delta_exact;
    }
    return out;
}

}  // namespace wkstab
