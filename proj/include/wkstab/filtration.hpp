#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "wkstab/pl_function.hpp"
#include "wkstab/quadrature.hpp"

namespace wkstab {

/// Toric filtration induced by a rational PL convex function, together with
/// the denominator clearing all slopes and values to integers.
struct ToricFiltration {
    PLConvexFunction f;
    Integer denominator;
};

inline ToricFiltration make_filtration(const PLConvexFunction& f) {
    Integer m0 = 1;
    for (const auto& piece : f.as_max_of_affine()) {
        m0 = lcm(m0, denominator(piece.constant));
        for (const auto& g : piece.gradient) m0 = lcm(m0, denominator(g));
    }
    return {f, m0};
}

/// Weighted volume of the filtration of f in its exact polytope-integral
/// form: int_P f v dy. T must refine f's linearity domains.
inline Value weighted_volume_exact(const PLConvexFunction& f, const Weight& v,
                                   const Polytope& P, const Triangulation& T) {
    (void)P;
    return integrate_pl_weight_region(f, v, T);
}

namespace detail {

/// Enumerates mP intersect Z^n through a bounding-box scan with halfspace
/// filtering; the callback receives eta/m. Guarded at ten million points.
template <class Fn>
void for_each_lattice_point(const Polytope& P, long m, Fn&& fn) {
    const int n = P.dim();
    std::vector<long> lo(n), hi(n);
    double count = 1;
    for (int i = 0; i < n; ++i) {
        Rational mn = P.vertices()[0][i], mx = mn;
        for (const auto& vtx : P.vertices()) {
            mn = std::min(mn, vtx[i]);
            mx = std::max(mx, vtx[i]);
        }
        Integer lo_i = ceil_rational(Rational(m) * mn);
        Integer hi_i = floor_rational(Rational(m) * mx);
        if (abs(lo_i) > 1000000000 || abs(hi_i) > 1000000000)
            throw LatticeTooLarge("lattice bounding box out of range");
        lo[i] = static_cast<long>(lo_i);
        hi[i] = static_cast<long>(hi_i);
        count *= std::max<double>(0, static_cast<double>(hi[i] - lo[i] + 1));
    }
    if (count > 1e7) throw LatticeTooLarge("more than 1e7 candidate lattice points");

    std::vector<long> eta(n, 0);
    Point y(n, Rational(0));
    std::function<void(int)> rec = [&](int d) {
        if (d == n) {
            for (const auto& h : P.halfspaces())
                if (h.eval(y) < 0) return;
            fn(static_cast<const Point&>(y));
            return;
        }
        for (long t = lo[d]; t <= hi[d]; ++t) {
            eta[d] = t;
            y[d] = Rational(t, m);
            rec(d + 1);
        }
    };
    rec(0);
}

inline Rational eval_pieces(const std::vector<AffineFunction>& pieces, const Point& y) {
    Rational best = pieces[0].value(y);
    for (std::size_t i = 1; i < pieces.size(); ++i) best = std::max(best, pieces[i].value(y));
    return best;
}

}  // namespace detail

/// Finite lattice-sum form of the weighted volume:
///   m^{-(n+1)} sum_{eta in mP cap Z^n} v(eta/m) * (m f(eta/m)),
/// converging to the exact integral at rate O(1/m). With `rounded` the
/// successive minima are floored to integers (differs by O(1/m)).
inline Value weighted_volume_lattice(const PLConvexFunction& f, const Weight& v,
                                     const Polytope& P, long m, bool rounded = false) {
    if (m < 1) throw InvalidArgument("lattice parameter m must be positive");
    const int n = P.dim();
    auto pieces = f.as_max_of_affine();
    Rational scale(1);
    for (int i = 0; i <= n; ++i) scale /= m;
    if (weight_is_polynomial(v)) {
        const Polynomial& vp = weight_polynomial(v);
        Rational sum = 0;
        detail::for_each_lattice_point(P, m, [&](const Point& y) {
            Rational lam = Rational(m) * detail::eval_pieces(pieces, y);
            if (rounded) lam = Rational(floor_rational(lam));
            sum += vp.eval(y) * lam;
        });
        return Value(sum * scale);
    }
    const auto& sv = std::get<SmoothWeight>(v);
    double sum = 0;
    detail::for_each_lattice_point(P, m, [&](const Point& y) {
        Rational lam = Rational(m) * detail::eval_pieces(pieces, y);
        if (rounded) lam = Rational(floor_rational(lam));
        sum += sv.eval(y) * to_double(lam);
    });
    return Value(sum * to_double(scale));
}

struct DHMeasureHistogram {
    std::vector<double> bin_edges;  // bins+1 increasing edges
    std::vector<double> masses;
    double total = 0.0;
    std::optional<Rational> total_exact;  // rational path only
    long lattice_m = 0;
};

/// Weighted Duistermaat-Heckman histogram: pushforward of v(eta/m)/m^n under
/// f over the lattice points of mP. Total mass approaches int_P v dy.
inline DHMeasureHistogram dh_histogram(const PLConvexFunction& f, const Weight& v,
                                       const Polytope& P, int bins, long m) {
    if (bins < 1) throw InvalidArgument("need at least one bin");
    const int n = P.dim();
    auto pieces = f.as_max_of_affine();
    std::vector<std::pair<Rational, Rational>> samples;  // (f value, v weight or 0)
    std::vector<double> smooth_weights;
    const bool exact = weight_is_polynomial(v);
    detail::for_each_lattice_point(P, m, [&](const Point& y) {
        Rational fv = detail::eval_pieces(pieces, y);
        if (exact) {
            samples.emplace_back(fv, weight_polynomial(v).eval(y));
        } else {
            samples.emplace_back(fv, Rational(0));
            smooth_weights.push_back(std::get<SmoothWeight>(v).eval(y));
        }
    });
    if (samples.empty()) throw Error("internal: no lattice points found");

    Rational cell(1);
    for (int i = 0; i < n; ++i) cell /= m;
    Rational lo = samples[0].first, hi = samples[0].first;
    for (const auto& [fv, wv] : samples) {
        lo = std::min(lo, fv);
        hi = std::max(hi, fv);
    }
    bool flat = (lo == hi);
    Rational width = flat ? Rational(1) : Rational(hi - lo);
    if (flat) {
        lo -= Rational(1, 2);
        hi += Rational(1, 2);
    }

    DHMeasureHistogram out;
    out.lattice_m = m;
    out.bin_edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b)
        out.bin_edges[b] = to_double(lo + width * Rational(b, bins));
    out.masses.assign(bins, 0.0);
    Rational total_exact = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Integer idx = flat ? Integer(0)
                           : floor_rational((samples[i].first - lo) * Rational(bins) / width);
        long b = std::min<long>(static_cast<long>(idx), bins - 1);
        double wv = exact ? to_double(samples[i].second * cell)
                          : smooth_weights[i] * to_double(cell);
        out.masses[b] += wv;
        out.total += wv;
        if (exact) total_exact += samples[i].second * cell;
    }
    if (exact) out.total_exact = total_exact;
    return out;
}

namespace detail {

/// Integral of an affine function times a weight over a convex cell.
inline Value integrate_affine_weight_cell(const AffineFunction& ell, const Weight& v,
                                          const Polytope& cell) {
    Triangulation Tc = triangulate(std::make_shared<Polytope>(cell), 0);
    if (weight_is_polynomial(v))
        return Value(
            integrate_polynomial_region(ell.to_polynomial() * weight_polynomial(v), Tc));
    Polynomial factor = ell.to_polynomial();
    return Value(integrate_smooth_region(std::get<SmoothWeight>(v), Tc, &factor));
}

/// Splits a simplex along the zero set of an affine delta. Returns the cells
/// where delta <= 0 and delta >= 0 (either may be absent).
struct SimplexSplit {
    std::optional<Polytope> neg;  // delta <= 0
    std::optional<Polytope> pos;  // delta >= 0
};

inline SimplexSplit split_simplex(const std::vector<Point>& S, const AffineFunction& delta) {
    const int n = static_cast<int>(S[0].size());
    bool has_pos = false, has_neg = false;
    for (const auto& p : S) {
        Rational d = delta.value(p);
        if (d > 0) has_pos = true;
        if (d < 0) has_neg = true;
    }
    SimplexSplit out;
    auto simplex_poly = [&]() { return Polytope::from_vertices(S); };
    if (!has_neg) {
        out.pos = simplex_poly();
        return out;
    }
    if (!has_pos) {
        out.neg = simplex_poly();
        return out;
    }
    Integer scale = lcm(denominator(delta.constant), Integer(1));
    for (const auto& g : delta.gradient) scale = lcm(scale, denominator(g));
    std::vector<Integer> normal(n);
    for (int i = 0; i < n; ++i)
        normal[i] = numerator(delta.gradient[i]) * (scale / denominator(delta.gradient[i]));
    Rational off = delta.constant * Rational(scale);
    Polytope base = simplex_poly();
    auto with_cut = [&](bool positive) -> std::optional<Polytope> {
        std::vector<Halfspace> hs = base.halfspaces();
        std::vector<Integer> u = normal;
        Rational a = off;
        if (!positive) {
            for (auto& x : u) x = -x;
            a = -a;
        }
        hs.push_back({std::move(u), a});
        try {
            return Polytope::from_halfspaces(n, std::move(hs));
        } catch (const EmptyPolytope&) {
            return std::nullopt;
        } catch (const DegeneratePolytope&) {
            return std::nullopt;
        }
    };
    out.pos = with_cut(true);
    out.neg = with_cut(false);
    return out;
}

}  // namespace detail

/// d_{v,1}(f1, f2) = vol(f1) + vol(f2) - 2 vol(min(f1, f2)). The min's break
/// locus is resolved inside each simplex, and the result is cross-checked
/// against the direct form int_P |f1 - f2| v dy before returning.
inline Value d_v1(const PLConvexFunction& f1, const PLConvexFunction& f2, const Weight& v,
                  const Polytope& P, const Triangulation& T) {
    (void)P;
    Value vol1(Rational(0)), vol2(Rational(0)), vol_min(Rational(0)), abs_diff(Rational(0));
    for (std::size_t s = 0; s < T.simplices().size(); ++s) {
        auto pts = T.simplex_points(static_cast<int>(s));
        auto p1 = f1.affine_piece_on(pts);
        auto p2 = f2.affine_piece_on(pts);
        if (!p1 || !p2)
            throw TriangulationTooCoarse("simplex straddles a kink of f1 or f2");
        Polytope cell = Polytope::from_vertices(pts);
        vol1 += detail::integrate_affine_weight_cell(*p1, v, cell);
        vol2 += detail::integrate_affine_weight_cell(*p2, v, cell);
        AffineFunction delta = *p1 - *p2;
        auto split = detail::split_simplex(pts, delta);
        if (split.neg) {  // f1 <= f2 here: min = f1, |delta| = -delta
            vol_min += detail::integrate_affine_weight_cell(*p1, v, *split.neg);
            abs_diff += detail::integrate_affine_weight_cell(Rational(-1) * delta, v, *split.neg);
        }
        if (split.pos) {
            vol_min += detail::integrate_affine_weight_cell(*p2, v, *split.pos);
            abs_diff += detail::integrate_affine_weight_cell(delta, v, *split.pos);
        }
    }
    Value lhs = vol1 + vol2 - Value(2) * vol_min;
    if (lhs.is_exact() && abs_diff.is_exact()) {
        if (lhs.exact() != abs_diff.exact())
            throw Error("internal: d_v1 min-formula and |difference| disagree");
    } else if (std::abs(lhs.as_double() - abs_diff.as_double()) >
               1e-9 * (1 + std::abs(lhs.as_double()))) {
        throw Error("internal: d_v1 cross-check failed on the numeric path");
    }
    return lhs;
}

struct QuotientResult {
    Value distance;
    Rational c_star;     // optimal shift applied to f2
    bool c_at_knot = false;  // exact knot minimizer (rational-path certificate)
};

namespace detail {

/// v-measure of {f1 - f2 <= c} (or strict) over the triangulated domain.
inline Value sublevel_mass(const PLConvexFunction& f1, const PLConvexFunction& f2,
                           const Weight& v, const Triangulation& T, const Rational& c,
                           bool include_equal) {
    Value mass(Rational(0));
    for (std::size_t s = 0; s < T.simplices().size(); ++s) {
        auto pts = T.simplex_points(static_cast<int>(s));
        auto p1 = f1.affine_piece_on(pts);
        auto p2 = f2.affine_piece_on(pts);
        if (!p1 || !p2)
            throw TriangulationTooCoarse("simplex straddles a kink of f1 or f2");
        AffineFunction delta = *p1 - *p2;
        delta.constant -= c;
        bool all_zero = delta.constant == 0;
        for (const auto& g : delta.gradient) all_zero = all_zero && g == 0;
        AffineFunction one = AffineFunction(Rational(1),
                                            std::vector<Rational>(pts[0].size(), Rational(0)));
        if (all_zero) {
            if (include_equal)
                mass += integrate_affine_weight_cell(one, v, Polytope::from_vertices(pts));
            continue;
        }
        auto split = split_simplex(pts, delta);
        if (split.neg) mass += integrate_affine_weight_cell(one, v, *split.neg);
    }
    return mass;
}

}  // namespace detail

/// Quotient pseudo-metric inf_c d_{v,1}(f1, f2 + c). The minimizer is the
/// v-weighted median of f1 - f2: located by an exact subgradient scan over
/// the PL breakpoint values, then bisection when it falls between knots.
inline QuotientResult quotient_distance(const PLConvexFunction& f1, const PLConvexFunction& f2,
                                        const Weight& v, const Polytope& P,
                                        const Triangulation& T) {
    std::vector<Rational> knots;
    for (const auto& p : T.points()) knots.push_back(f1.value(p) - f2.value(p));
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    Triangulation T0 = triangulate(std::make_shared<Polytope>(P), 0);
    Value total = weight_is_polynomial(v)
                      ? Value(integrate_polynomial_region(weight_polynomial(v), T0))
                      : Value(integrate_smooth_region(std::get<SmoothWeight>(v), T0));

    auto subgrad_left = [&](const Rational& c) {
        return Value(2) * detail::sublevel_mass(f1, f2, v, T, c, /*include_equal=*/false) - total;
    };
    auto subgrad_right = [&](const Rational& c) {
        return Value(2) * detail::sublevel_mass(f1, f2, v, T, c, /*include_equal=*/true) - total;
    };

    Rational c_star = knots.front();
    bool at_knot = false;
    Rational zero(0);
    std::optional<Rational> bracket_lo, bracket_hi;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        Value dl = subgrad_left(knots[i]);
        Value dr = subgrad_right(knots[i]);
        if (!(dl > Value(zero)) && !(dr < Value(zero))) {
            c_star = knots[i];
            at_knot = true;
            break;
        }
        if (dr < Value(zero) && i + 1 < knots.size()) {
            Value next_dl = subgrad_left(knots[i + 1]);
            if (next_dl > Value(zero)) {
                bracket_lo = knots[i];
                bracket_hi = knots[i + 1];
                break;
            }
        }
    }
    if (!at_knot && bracket_lo) {
        // No atoms strictly between knots, so the subgradient is continuous
        // there and plain bisection on rational midpoints converges.
        Rational lo = *bracket_lo, hi = *bracket_hi;
        for (int iter = 0; iter < 80; ++iter) {
            Rational mid = (lo + hi) / 2;
            Value d = subgrad_right(mid);
            if (d < Value(zero))
                lo = mid;
            else
                hi = mid;
            if (to_double(hi - lo) < 1e-13 * (1.0 + std::abs(to_double(hi)))) break;
        }
        c_star = (lo + hi) / 2;
    }

    // Distance at the located shift: int |(f1 - f2) - c*| v dy.
    Value dist(Rational(0));
    for (std::size_t s = 0; s < T.simplices().size(); ++s) {
        auto pts = T.simplex_points(static_cast<int>(s));
        auto p1 = f1.affine_piece_on(pts);
        auto p2 = f2.affine_piece_on(pts);
        AffineFunction delta = *p1 - *p2;
        delta.constant -= c_star;
        auto split = detail::split_simplex(pts, delta);
        if (split.neg)
            dist += detail::integrate_affine_weight_cell(Rational(-1) * delta, v, *split.neg);
        if (split.pos) dist += detail::integrate_affine_weight_cell(delta, v, *split.pos);
    }
    QuotientResult out;
    out.distance = at_knot ? dist : Value(dist.as_double());
    out.c_star = c_star;
    out.c_at_knot = at_knot;
    return out;
}

}  // namespace wkstab
