#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "wkstab/affine.hpp"
#include "wkstab/quadrature.hpp"
#include "wkstab/simplex_lp.hpp"
#include "wkstab/triangulation.hpp"

namespace wkstab {

namespace detail {

/// Affine interpolant of (point, value) pairs on a nondegenerate simplex.
inline AffineFunction affine_interpolant(const std::vector<Point>& pts,
                                         const std::vector<Rational>& vals) {
    const int n = static_cast<int>(pts[0].size());
    linalg::RatMat A(n + 1, linalg::RatVec(n + 1));
    linalg::RatVec b(n + 1);
    for (int r = 0; r <= n; ++r) {
        A[r][0] = 1;
        for (int i = 0; i < n; ++i) A[r][i + 1] = pts[r][i];
        b[r] = vals[r];
    }
    auto x = linalg::solve(A, b);
    if (!x) throw DegenerateSimplex("interpolation simplex is degenerate");
    AffineFunction aff;
    aff.constant = (*x)[0];
    aff.gradient.assign(x->begin() + 1, x->end());
    return aff;
}

}  // namespace detail

/// Convex piecewise-linear function on a polytope, represented either as a
/// max of affine pieces or by values at the points of a triangulation (with
/// the wall convexity inequalities enforced at construction).
class PLConvexFunction {
public:
    struct MaxOfAffine {
        std::vector<AffineFunction> pieces;
    };
    struct VertexValues {
        std::shared_ptr<const Triangulation> tri;
        std::vector<Rational> values;
    };

    static PLConvexFunction from_pieces(std::shared_ptr<const Polytope> domain,
                                        std::vector<AffineFunction> pieces) {
        if (pieces.empty()) throw InvalidArgument("need at least one affine piece");
        for (const auto& p : pieces)
            if (p.dim() != domain->dim()) throw InvalidArgument("piece dimension mismatch");
        PLConvexFunction f;
        f.domain_ = std::move(domain);
        f.repr_ = MaxOfAffine{std::move(pieces)};
        return f;
    }

    static PLConvexFunction from_pieces(const Polytope& domain,
                                        std::vector<AffineFunction> pieces) {
        return from_pieces(std::make_shared<Polytope>(domain), std::move(pieces));
    }

    /// Validates the convexity inequality across every interior wall: the
    /// affine extension from one side must not exceed the value on the other.
    static PLConvexFunction from_vertex_values(std::shared_ptr<const Triangulation> tri,
                                               std::vector<Rational> values) {
        if (values.size() != tri->points().size())
            throw InvalidArgument("vertex value count does not match triangulation");
        for (const auto& wall : tri->interior_walls()) {
            const auto& left = tri->simplices()[wall.left];
            int opposite = -1;
            for (int id : tri->simplices()[wall.right]) {
                bool in_wall = std::binary_search(wall.face.begin(), wall.face.end(), id);
                if (!in_wall) opposite = id;
            }
            auto lam = tri->barycentric(wall.left, tri->points()[opposite]);
            Rational ext = 0;
            for (std::size_t j = 0; j < left.size(); ++j) ext += lam[j] * values[left[j]];
            if (values[opposite] < ext)
                throw NotConvex("vertex values violate convexity across an interior wall");
        }
        PLConvexFunction f;
        f.domain_ = tri->polytope_ptr();
        f.repr_ = VertexValues{std::move(tri), std::move(values)};
        return f;
    }

    const Polytope& domain() const { return *domain_; }
    std::shared_ptr<const Polytope> domain_ptr() const { return domain_; }
    int dim() const { return domain_->dim(); }
    bool is_max_of_affine() const { return std::holds_alternative<MaxOfAffine>(repr_); }
    const MaxOfAffine* max_of_affine() const { return std::get_if<MaxOfAffine>(&repr_); }
    const VertexValues* vertex_values() const { return std::get_if<VertexValues>(&repr_); }

    Rational value(const Point& y) const {
        if (auto* m = std::get_if<MaxOfAffine>(&repr_)) {
            Rational best = m->pieces[0].value(y);
            for (std::size_t i = 1; i < m->pieces.size(); ++i)
                best = std::max(best, m->pieces[i].value(y));
            return best;
        }
        const auto& vv = std::get<VertexValues>(repr_);
        auto loc = vv.tri->locate(y);
        if (!loc) throw InvalidArgument("point outside the function's domain");
        Rational s = 0;
        const auto& ids = vv.tri->simplices()[loc->first];
        for (std::size_t j = 0; j < ids.size(); ++j) s += loc->second[j] * vv.values[ids[j]];
        return s;
    }

    /// Affine pieces in deterministic order (first occurrence wins on ties).
    std::vector<AffineFunction> as_max_of_affine() const {
        if (auto* m = std::get_if<MaxOfAffine>(&repr_)) {
            std::vector<AffineFunction> out;
            for (const auto& p : m->pieces)
                if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
            return out;
        }
        const auto& vv = std::get<VertexValues>(repr_);
        std::vector<AffineFunction> out;
        for (std::size_t s = 0; s < vv.tri->simplices().size(); ++s) {
            std::vector<Point> pts;
            std::vector<Rational> vals;
            for (int id : vv.tri->simplices()[s]) {
                pts.push_back(vv.tri->points()[id]);
                vals.push_back(vv.values[id]);
            }
            AffineFunction piece = detail::affine_interpolant(pts, vals);
            if (std::find(out.begin(), out.end(), piece) == out.end())
                out.push_back(std::move(piece));
        }
        return out;
    }

    /// The affine form of f on a simplex, or nullopt when the simplex
    /// straddles a kink (checked at the vertices plus the barycenter, which
    /// is conclusive for convex f).
    std::optional<AffineFunction> affine_piece_on(const std::vector<Point>& simplex) const {
        std::vector<Rational> vals;
        for (const auto& p : simplex) vals.push_back(value(p));
        AffineFunction cand = detail::affine_interpolant(simplex, vals);
        const int n = static_cast<int>(simplex[0].size());
        Point bary(n, Rational(0));
        for (const auto& p : simplex)
            for (int i = 0; i < n; ++i) bary[i] += p[i];
        for (auto& x : bary) x /= Rational(static_cast<int>(simplex.size()));
        if (cand.value(bary) != value(bary)) return std::nullopt;
        return cand;
    }

    PLConvexFunction plus_affine(const AffineFunction& xi) const {
        PLConvexFunction f = *this;
        if (auto* m = std::get_if<MaxOfAffine>(&f.repr_)) {
            for (auto& p : m->pieces) p = p + xi;
        } else {
            auto& vv = std::get<VertexValues>(f.repr_);
            for (std::size_t i = 0; i < vv.values.size(); ++i)
                vv.values[i] += xi.value(vv.tri->points()[i]);
        }
        return f;
    }

    PLConvexFunction scaled(const Rational& lambda) const {
        if (lambda < 0) throw InvalidArgument("scale must be nonnegative to keep convexity");
        PLConvexFunction f = *this;
        if (auto* m = std::get_if<MaxOfAffine>(&f.repr_)) {
            for (auto& p : m->pieces) p = lambda * p;
        } else {
            for (auto& v : std::get<VertexValues>(f.repr_).values) v *= lambda;
        }
        return f;
    }

private:
    std::shared_ptr<const Polytope> domain_;
    std::variant<MaxOfAffine, VertexValues> repr_;
};

/// Maximal linearity cells of f: for each active piece, the sub-polytope of
/// the domain where that piece attains the max. Cells partition the domain up
/// to measure zero.
inline std::vector<std::pair<Polytope, AffineFunction>> linearity_cells(
    const PLConvexFunction& f) {
    const auto pieces = f.as_max_of_affine();
    const Polytope& P = f.domain();
    const int n = P.dim();
    std::vector<std::pair<Polytope, AffineFunction>> cells;
    for (std::size_t j = 0; j < pieces.size(); ++j) {
        std::vector<Halfspace> hs = P.halfspaces();
        bool degenerate_row = false;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            if (i == j) continue;
            std::vector<Rational> diff(n);
            for (int d = 0; d < n; ++d) diff[d] = pieces[j].gradient[d] - pieces[i].gradient[d];
            Rational off = pieces[j].constant - pieces[i].constant;
            bool zero = true;
            for (const auto& x : diff)
                if (x != 0) zero = false;
            if (zero) {
                if (off < 0) degenerate_row = true;  // piece strictly dominated
                continue;
            }
            Integer scale = 1;
            for (const auto& x : diff) scale = lcm(scale, denominator(x));
            std::vector<Integer> normal(n);
            for (int d = 0; d < n; ++d)
                normal[d] = numerator(diff[d]) * (scale / denominator(diff[d]));
            hs.push_back({std::move(normal), off * Rational(scale)});
        }
        if (degenerate_row) continue;
        try {
            cells.emplace_back(Polytope::from_halfspaces(n, std::move(hs)), pieces[j]);
        } catch (const EmptyPolytope&) {
        } catch (const DegeneratePolytope&) {
        }
    }
    return cells;
}

/// Cells of the common refinement of the linearity domains of f1 and f2.
inline std::vector<Polytope> common_refinement_cells(const PLConvexFunction& f1,
                                                     const PLConvexFunction& f2) {
    auto c1 = linearity_cells(f1);
    auto c2 = linearity_cells(f2);
    std::vector<Polytope> out;
    for (const auto& [a, pa] : c1)
        for (const auto& [b, pb] : c2) {
            std::vector<Halfspace> hs = a.halfspaces();
            for (const auto& h : b.halfspaces()) hs.push_back(h);
            try {
                out.push_back(Polytope::from_halfspaces(a.dim(), std::move(hs)));
            } catch (const EmptyPolytope&) {
            } catch (const DegeneratePolytope&) {
            }
        }
    return out;
}

/// Triangulation of the domain subordinate to f's linearity cells.
inline Triangulation triangulate_subordinate_to(const PLConvexFunction& f, int k) {
    std::vector<Polytope> cells;
    for (auto& [cell, piece] : linearity_cells(f)) cells.push_back(cell);
    return triangulate_subordinate(f.domain_ptr(), cells, k);
}

inline Triangulation triangulate_subordinate_to_pair(const PLConvexFunction& f1,
                                                     const PLConvexFunction& f2, int k) {
    return triangulate_subordinate(f1.domain_ptr(), common_refinement_cells(f1, f2), k);
}

struct Normalized {
    PLConvexFunction fn;
    int support_index;  // active piece (MaxOfAffine; -1 for the flat support)
                        // or containing simplex (VertexValues)
};

namespace detail {

/// Exact minimum of a max-of-affine function over a polytope, as the tiny LP
/// min t subject to t >= piece_j(y), y in P.
inline Rational pl_minimum(const std::vector<AffineFunction>& pieces, const Polytope& P) {
    const int n = P.dim();
    LPProblem lp;
    lp.objective.assign(n + 1, Rational(0));
    lp.objective[n] = 1;  // variables (y_1..y_n, t), all free
    for (const auto& piece : pieces) {
        LinearConstraint c;
        c.coeffs.assign(n + 1, Rational(0));
        for (int i = 0; i < n; ++i) c.coeffs[i] = -piece.gradient[i];
        c.coeffs[n] = 1;
        c.rel = Relation::GreaterEq;
        c.rhs = piece.constant;
        lp.constraints.push_back(std::move(c));
    }
    for (const auto& h : P.halfspaces()) {
        LinearConstraint c;
        c.coeffs.assign(n + 1, Rational(0));
        for (int i = 0; i < n; ++i) c.coeffs[i] = Rational(h.normal[i]);
        c.rel = Relation::GreaterEq;
        c.rhs = -h.offset;
        lp.constraints.push_back(std::move(c));
    }
    LPResult r = lp_solve(lp);
    if (r.status != LPStatus::Optimal) throw Error("internal: PL minimum LP failed");
    return r.value;
}

}  // namespace detail

/// Subtracts a supporting affine function of f at the interior point y0,
/// leaving a function that is >= 0 on the domain and vanishes at y0. When y0
/// minimizes f the flat support f(y0) is used (so minimizers are shifted, not
/// tilted); otherwise ties go to the first active piece. For vertex-value
/// data the slope always comes from the first containing simplex, recorded
/// for reproducibility.
inline Normalized normalize(const PLConvexFunction& f, const Point& y0) {
    if (!f.domain().contains(y0, /*strict=*/true))
        throw PointNotInterior("normalization point must lie in the interior");
    if (auto* m = f.max_of_affine()) {
        Rational best = f.value(y0);
        AffineFunction supp;
        int idx;
        if (detail::pl_minimum(m->pieces, f.domain()) == best) {
            supp = AffineFunction(best, std::vector<Rational>(f.dim(), Rational(0)));
            idx = -1;
        } else {
            idx = -1;
            for (std::size_t i = 0; i < m->pieces.size(); ++i)
                if (m->pieces[i].value(y0) == best) {
                    idx = static_cast<int>(i);
                    break;
                }
            supp = m->pieces[idx];
        }
        std::vector<AffineFunction> pieces;
        for (const auto& p : m->pieces) pieces.push_back(p - supp);
        return {PLConvexFunction::from_pieces(f.domain_ptr(), std::move(pieces)), idx};
    }
    const auto* vv = f.vertex_values();
    auto loc = vv->tri->locate(y0);
    if (!loc) throw PointNotInterior("normalization point not found in triangulation");
    std::vector<Point> pts;
    std::vector<Rational> vals;
    for (int id : vv->tri->simplices()[loc->first]) {
        pts.push_back(vv->tri->points()[id]);
        vals.push_back(vv->values[id]);
    }
    AffineFunction supp = detail::affine_interpolant(pts, vals);
    std::vector<Rational> values = vv->values;
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] -= supp.value(vv->tri->points()[i]);
    return {PLConvexFunction::from_vertex_values(vv->tri, std::move(values)), loc->first};
}

// ---------------------------------------------------------------------------
// Integration of PL x weight products. The triangulation must refine the
// linearity domains; a straddled simplex raises TriangulationTooCoarse.

inline Rational integrate_pl_product(const PLConvexFunction& f, const Polynomial& g,
                                     const Triangulation& T) {
    Rational total = 0;
    for (std::size_t s = 0; s < T.simplices().size(); ++s) {
        auto pts = T.simplex_points(static_cast<int>(s));
        auto piece = f.affine_piece_on(pts);
        if (!piece)
            throw TriangulationTooCoarse("simplex straddles a kink of the PL function");
        total += integrate_polynomial_simplex(piece->to_polynomial() * g, pts);
    }
    return total;
}

inline Rational integrate_pl_product_boundary(const PLConvexFunction& f, const Polynomial& g,
                                              const Triangulation& T) {
    Rational total = 0;
    for (const auto& bf : T.boundary_faces()) {
        auto owner_pts = T.simplex_points(bf.simplex);
        auto piece = f.affine_piece_on(owner_pts);
        if (!piece)
            throw TriangulationTooCoarse("boundary simplex straddles a kink of the PL function");
        std::vector<Point> face_pts;
        for (int id : bf.face) face_pts.push_back(T.points()[id]);
        total += integrate_polynomial_boundary_simplex(
            piece->to_polynomial() * g, face_pts, T.polytope().facets()[bf.facet].normal);
    }
    return total;
}

inline double integrate_pl_smooth_region(const PLConvexFunction& f, const SmoothWeight& w,
                                         const Triangulation& T) {
    const int n = T.dim();
    const auto& rule = detail::gm_rule(n, w.quadrature_degree);
    double total = 0;
    for (std::size_t s = 0; s < T.simplices().size(); ++s) {
        auto pts = T.simplex_points(static_cast<int>(s));
        auto piece = f.affine_piece_on(pts);
        if (!piece)
            throw TriangulationTooCoarse("simplex straddles a kink of the PL function");
        auto pb = detail::pullback_to_reference(Polynomial::constant(n, Rational(1)), pts);
        double acc = 0;
        for (const auto& node : rule) {
            Point y(n, Rational(0));
            for (int j = 0; j <= n; ++j)
                for (int i = 0; i < n; ++i) y[i] += node.barycentric[j] * pts[j][i];
            acc += node.weight * w.eval(y) * to_double(piece->value(y));
        }
        total += to_double(pb.jacobian) * acc;
    }
    return total;
}

inline double integrate_pl_smooth_boundary(const PLConvexFunction& f, const SmoothWeight& w,
                                           const Triangulation& T) {
    const int n = T.dim();
    double total = 0;
    for (const auto& bf : T.boundary_faces()) {
        auto owner_pts = T.simplex_points(bf.simplex);
        auto piece = f.affine_piece_on(owner_pts);
        if (!piece)
            throw TriangulationTooCoarse("boundary simplex straddles a kink of the PL function");
        std::vector<Point> face_pts;
        for (int id : bf.face) face_pts.push_back(T.points()[id]);
        const auto& u = T.polytope().facets()[bf.facet].normal;
        if (n == 1) {
            total += w.eval(face_pts[0]) * to_double(piece->value(face_pts[0]));
            continue;
        }
        const auto& rule = detail::gm_rule(n - 1, w.quadrature_degree);
        double scale = to_double(detail::sigma_scale(face_pts, u));
        double acc = 0;
        for (const auto& node : rule) {
            Point y(n, Rational(0));
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) y[i] += node.barycentric[j] * face_pts[j][i];
            acc += node.weight * w.eval(y) * to_double(piece->value(y));
        }
        total += scale * acc;
    }
    return total;
}

/// Weight-generic product integrals; exact on the polynomial path.
inline Value integrate_pl_weight_region(const PLConvexFunction& f, const Weight& w,
                                        const Triangulation& T) {
    if (weight_is_polynomial(w)) return Value(integrate_pl_product(f, weight_polynomial(w), T));
    return Value(integrate_pl_smooth_region(f, std::get<SmoothWeight>(w), T));
}

inline Value integrate_pl_weight_boundary(const PLConvexFunction& f, const Weight& w,
                                          const Triangulation& T) {
    if (weight_is_polynomial(w))
        return Value(integrate_pl_product_boundary(f, weight_polynomial(w), T));
    return Value(integrate_pl_smooth_boundary(f, std::get<SmoothWeight>(w), T));
}

}  // namespace wkstab
