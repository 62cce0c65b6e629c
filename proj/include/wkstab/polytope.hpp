#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "wkstab/errors.hpp"
#include "wkstab/rational.hpp"

namespace wkstab {

/// Closed halfspace <normal, y> + offset >= 0 with a primitive integer normal.
struct Halfspace {
    std::vector<Integer> normal;
    Rational offset;

    Rational eval(const Point& y) const {
        Rational s = offset;
        for (std::size_t i = 0; i < normal.size(); ++i) s += Rational(normal[i]) * y[i];
        return s;
    }

    friend bool operator==(const Halfspace& a, const Halfspace& b) {
        return a.normal == b.normal && a.offset == b.offset;
    }
    friend bool operator<(const Halfspace& a, const Halfspace& b) {
        if (a.normal != b.normal) return a.normal < b.normal;
        return a.offset < b.offset;
    }
};

/// Extra halfspace of a perturbation family: <u,y> + base_offset - eps*rate >= 0.
struct PerturbCut {
    std::vector<Integer> normal;
    Rational base_offset;
    Rational rate;
};

/// Facet of a full-dimensional polytope. The lattice-normalized boundary
/// measure dsigma on the facet is Euclidean (n-1)-measure divided by |u|;
/// that ratio is rational even though both factors are irrational, so we
/// keep |u|^2 exactly and only expose 1/|u| as a float.
struct Facet {
    std::vector<Integer> normal;
    Rational offset;
    std::vector<int> vertex_ids;
    Integer norm_sq;

    double lattice_density() const { return 1.0 / std::sqrt(static_cast<double>(norm_sq)); }
};

namespace detail {

inline void primitivize(std::vector<Integer>& normal, Rational& offset) {
    Integer g = 0;
    for (const auto& x : normal) g = gcd(g, x);
    if (g == 0) throw InvalidArgument("halfspace normal must be nonzero");
    if (g != 1) {
        for (auto& x : normal) x /= g;
        offset /= Rational(g);
    }
}

inline int affine_rank(const std::vector<Point>& pts) {
    if (pts.empty()) return -1;
    linalg::RatMat rows;
    for (std::size_t i = 1; i < pts.size(); ++i) rows.push_back(linalg::sub(pts[i], pts[0]));
    if (rows.empty()) return 0;
    return linalg::rank(rows);
}

/// All subsets of {0..m-1} of size k, lexicographic. Guarded against blowup.
inline void for_each_subset(int m, int k, const std::function<void(const std::vector<int>&)>& fn) {
    if (k < 0 || k > m) return;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == m - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

inline double binomial_estimate(int m, int k) {
    double b = 1;
    for (int i = 0; i < k; ++i) b = b * (m - i) / (i + 1);
    return b;
}

/// Brute-force facet enumeration of conv(points) in R^d: every d-subset
/// spanning a hyperplane is a candidate; keep those with all points on one
/// side. Adequate for the desk scale this library targets (d <= 6).
struct HullFacet {
    std::vector<Integer> normal;  // inward
    Rational offset;
    std::vector<int> point_ids;   // points on the hyperplane
};

inline std::vector<HullFacet> hull_facets(const std::vector<Point>& pts, int d) {
    const int m = static_cast<int>(pts.size());
    if (binomial_estimate(m, d) > 2e6)
        throw InvalidArgument("too many points for brute-force hull enumeration");
    std::set<std::pair<std::vector<Integer>, Rational>> seen;
    std::vector<HullFacet> out;
    for_each_subset(m, d, [&](const std::vector<int>& sub) {
        linalg::RatMat rows;
        for (int i = 1; i < d; ++i) rows.push_back(linalg::sub(pts[sub[i]], pts[sub[0]]));
        linalg::RatMat a = rows;
        auto kv = linalg::kernel_vector(a, d);
        if (!kv) return;
        std::vector<Integer> u = linalg::primitive_direction(*kv);
        Rational off = -linalg::dot_iq(u, pts[sub[0]]);
        bool pos = false, neg = false;
        for (const auto& p : pts) {
            Rational v = linalg::dot_iq(u, p) + off;
            if (v > 0) pos = true;
            if (v < 0) neg = true;
            if (pos && neg) return;
        }
        if (neg) {  // flip inward
            for (auto& x : u) x = -x;
            off = -off;
        }
        if (!seen.insert({u, off}).second) return;
        HullFacet f;
        f.normal = u;
        f.offset = off;
        for (int i = 0; i < m; ++i)
            if (linalg::dot_iq(u, pts[i]) + off == 0) f.point_ids.push_back(i);
        out.push_back(std::move(f));
    });
    return out;
}

/// Chart coordinates of a point set inside its affine hull: origin is the
/// lexicographically least point, basis is a greedy independent edge set.
inline std::vector<Point> chart_coordinates(const std::vector<Point>& pts, int d) {
    const Point& origin = pts[0];
    linalg::RatMat basis;  // rows are basis vectors in R^n
    for (std::size_t i = 1; i < pts.size() && static_cast<int>(basis.size()) < d; ++i) {
        linalg::RatMat cand = basis;
        cand.push_back(linalg::sub(pts[i], origin));
        if (linalg::rank(cand) == static_cast<int>(cand.size())) basis = std::move(cand);
    }
    if (static_cast<int>(basis.size()) != d)
        throw DegeneratePolytope("point set does not span the expected dimension");
    // Normal equations: z solves (B B^T) z = B (p - o).
    linalg::RatMat gram(d, linalg::RatVec(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) gram[i][j] = linalg::dot(basis[i], basis[j]);
    std::vector<Point> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
        linalg::RatVec rhs(d);
        auto e = linalg::sub(p, pts[0]);
        for (int i = 0; i < d; ++i) rhs[i] = linalg::dot(basis[i], e);
        auto z = linalg::solve(gram, rhs);
        if (!z) throw DegeneratePolytope("chart solve failed");
        out.push_back(*z);
    }
    return out;
}

/// Pulling triangulation of the vertex set of a face: cone from the
/// lexicographically least vertex over the recursively triangulated facets
/// that do not contain it. Depends only on the vertex set, so adjacent faces
/// triangulate consistently and the result is conforming.
inline std::vector<std::vector<Point>> pulling_simplices(std::vector<Point> pts, int d) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (d == 0) return {{pts[0]}};
    if (d == 1) {
        std::vector<std::vector<Point>> out;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) out.push_back({pts[i], pts[i + 1]});
        return out;
    }
    if (pts.size() == static_cast<std::size_t>(d) + 1) return {pts};

    const int n = static_cast<int>(pts[0].size());
    std::vector<Point> chart =
        (d == n) ? pts : chart_coordinates(pts, d);
    auto facets = hull_facets(chart, d);

    std::vector<std::vector<Point>> out;
    for (const auto& f : facets) {
        bool contains_apex = false;
        for (int id : f.point_ids)
            if (id == 0) contains_apex = true;
        if (contains_apex) continue;
        std::vector<Point> face_pts;
        for (int id : f.point_ids) face_pts.push_back(pts[id]);
        for (auto& s : pulling_simplices(std::move(face_pts), d - 1)) {
            s.insert(s.begin(), pts[0]);
            out.push_back(std::move(s));
        }
    }
    return out;
}

/// |det(p1-p0, ..., p_{n-1}-p0, u)| / |u|^2 — the exact rational scale that
/// converts the reference-simplex integral of a pullback into the
/// lattice-normalized facet integral.
inline Rational sigma_scale(const std::vector<Point>& simplex,
                            const std::vector<Integer>& u) {
    const int n = static_cast<int>(u.size());
    linalg::RatMat M(n, linalg::RatVec(n));
    for (int j = 0; j + 1 < n; ++j) {
        auto e = linalg::sub(simplex[j + 1], simplex[0]);
        for (int i = 0; i < n; ++i) M[i][j] = e[i];
    }
    Integer nsq = 0;
    for (int i = 0; i < n; ++i) {
        M[i][n - 1] = Rational(u[i]);
        nsq += u[i] * u[i];
    }
    Rational det = linalg::determinant(M);
    return abs(det) / Rational(nsq);
}

}  // namespace detail

/// Full-dimensional rational convex polytope with both representations kept
/// consistent: primitive-normal halfspaces, enumerated vertices, and
/// per-facet incidence. Immutable after construction.
class Polytope {
public:
    static Polytope from_halfspaces(int dim, std::vector<Halfspace> hs);
    static Polytope from_vertices(const std::vector<Point>& pts);

    int dim() const { return dim_; }
    const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<Facet>& facets() const { return facets_; }

    bool contains(const Point& y, bool strict = false) const {
        for (const auto& h : halfspaces_) {
            Rational v = h.eval(y);
            if (strict ? (v <= 0) : (v < 0)) return false;
        }
        return true;
    }

    Point barycenter() const {
        Point b(dim_, Rational(0));
        for (const auto& v : vertices_)
            for (int i = 0; i < dim_; ++i) b[i] += v[i];
        for (auto& x : b) x /= Rational(static_cast<int>(vertices_.size()));
        return b;
    }

    /// (n-1)-simplices covering facet f, as coordinate tuples.
    std::vector<std::vector<Point>> facet_simplices(int f) const {
        std::vector<Point> pts;
        for (int id : facets_[f].vertex_ids) pts.push_back(vertices_[id]);
        return detail::pulling_simplices(std::move(pts), dim_ - 1);
    }

    friend bool operator==(const Polytope& a, const Polytope& b) {
        return a.dim_ == b.dim_ && a.halfspaces_ == b.halfspaces_;
    }
    friend bool operator!=(const Polytope& a, const Polytope& b) { return !(a == b); }

private:
    int dim_ = 0;
    std::vector<Halfspace> halfspaces_;
    std::vector<Point> vertices_;
    std::vector<Facet> facets_;
};

inline Polytope Polytope::from_halfspaces(int dim, std::vector<Halfspace> hs) {
    if (dim < 1 || dim > 6) throw InvalidArgument("dimension must be in 1..6");
    if (hs.empty()) throw InvalidArgument("halfspace list must be nonempty");
    for (auto& h : hs) {
        if (static_cast<int>(h.normal.size()) != dim)
            throw InvalidArgument("halfspace dimension mismatch");
        detail::primitivize(h.normal, h.offset);
    }
    // Identical normals keep only the tightest offset.
    std::map<std::vector<Integer>, Rational> tight;
    for (const auto& h : hs) {
        auto it = tight.find(h.normal);
        if (it == tight.end())
            tight.emplace(h.normal, h.offset);
        else
            it->second = std::min(it->second, h.offset);
    }
    hs.clear();
    for (const auto& [u, a] : tight) hs.push_back({u, a});

    const int m = static_cast<int>(hs.size());
    linalg::RatMat normal_rows;
    for (const auto& h : hs) {
        linalg::RatVec r(dim);
        for (int i = 0; i < dim; ++i) r[i] = Rational(h.normal[i]);
        normal_rows.push_back(std::move(r));
    }
    const int nrank = linalg::rank(normal_rows);
    if (nrank < dim) {
        // The normals span a proper subspace: P is either empty or contains a
        // line of the kernel. Decide feasibility in the reduced coordinates.
        linalg::RatMat basis;
        for (const auto& r : normal_rows) {
            linalg::RatMat cand = basis;
            cand.push_back(r);
            if (linalg::rank(cand) == static_cast<int>(cand.size())) basis = std::move(cand);
            if (static_cast<int>(basis.size()) == nrank) break;
        }
        std::vector<linalg::RatVec> reduced(m, linalg::RatVec(nrank));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < nrank; ++j) reduced[i][j] = linalg::dot(normal_rows[i], basis[j]);
        bool feasible = false;
        detail::for_each_subset(m, nrank, [&](const std::vector<int>& sub) {
            if (feasible) return;
            linalg::RatMat A;
            linalg::RatVec b;
            for (int i : sub) {
                A.push_back(reduced[i]);
                b.push_back(-hs[i].offset);
            }
            auto z = linalg::solve(A, b);
            if (!z) return;
            for (int i = 0; i < m; ++i) {
                Rational v = linalg::dot(reduced[i], *z) + hs[i].offset;
                if (v < 0) return;
            }
            feasible = true;
        });
        if (feasible) throw UnboundedPolytope("normals do not span: recession cone contains a line");
        throw EmptyPolytope("infeasible halfspace system");
    }

    // Pointed cone: unbounded iff some extreme recession ray survives all
    // constraints. Rays come from (dim-1)-subsets with one-dimensional kernel.
    if (detail::binomial_estimate(m, dim - 1) > 2e6 ||
        detail::binomial_estimate(m, dim) > 2e6)
        throw InvalidArgument("too many halfspaces for brute-force enumeration");
    bool unbounded = false;
    detail::for_each_subset(m, dim - 1, [&](const std::vector<int>& sub) {
        if (unbounded) return;
        linalg::RatMat A;
        for (int i : sub) A.push_back(normal_rows[i]);
        auto kv = linalg::kernel_vector(A, dim);
        if (!kv) return;
        for (int sign = 0; sign < 2; ++sign) {
            bool ok = true;
            for (int i = 0; i < m && ok; ++i) {
                Rational v = linalg::dot(normal_rows[i], *kv);
                if (sign) v = -v;
                if (v < 0) ok = false;
            }
            if (ok) {
                unbounded = true;
                return;
            }
        }
    });
    if (unbounded) throw UnboundedPolytope("recession cone is nontrivial");

    std::set<Point> vertex_set;
    detail::for_each_subset(m, dim, [&](const std::vector<int>& sub) {
        linalg::RatMat A;
        linalg::RatVec b;
        for (int i : sub) {
            A.push_back(normal_rows[i]);
            b.push_back(-hs[i].offset);
        }
        auto y = linalg::solve(A, b);
        if (!y) return;
        for (int i = 0; i < m; ++i)
            if (hs[i].eval(*y) < 0) return;
        vertex_set.insert(*y);
    });
    if (vertex_set.empty()) throw EmptyPolytope("infeasible halfspace system");

    Polytope P;
    P.dim_ = dim;
    P.vertices_.assign(vertex_set.begin(), vertex_set.end());
    if (detail::affine_rank(P.vertices_) < dim)
        throw DegeneratePolytope("polytope is not full-dimensional");

    // Facet-defining halfspaces are those whose incident vertices span an
    // (n-1)-dimensional set; for a full-dimensional polytope the rest are
    // redundant and dropped.
    struct Row {
        Halfspace h;
        Facet f;
    };
    std::vector<Row> rows;
    for (const auto& h : hs) {
        Facet f;
        std::vector<Point> inc;
        for (std::size_t vi = 0; vi < P.vertices_.size(); ++vi)
            if (h.eval(P.vertices_[vi]) == 0) {
                f.vertex_ids.push_back(static_cast<int>(vi));
                inc.push_back(P.vertices_[vi]);
            }
        if (detail::affine_rank(inc) != dim - 1) continue;
        f.normal = h.normal;
        f.offset = h.offset;
        f.norm_sq = 0;
        for (const auto& x : h.normal) f.norm_sq += x * x;
        rows.push_back({h, std::move(f)});
    }
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.h < b.h; });
    for (auto& r : rows) {
        P.halfspaces_.push_back(std::move(r.h));
        P.facets_.push_back(std::move(r.f));
    }
    return P;
}

inline Polytope Polytope::from_vertices(const std::vector<Point>& pts) {
    if (pts.empty()) throw InvalidArgument("vertex list must be nonempty");
    const int dim = static_cast<int>(pts[0].size());
    for (const auto& p : pts)
        if (static_cast<int>(p.size()) != dim) throw InvalidArgument("point dimension mismatch");
    if (detail::affine_rank(pts) < dim)
        throw DegeneratePolytope("points do not affinely span");
    std::vector<Halfspace> hs;
    for (auto& f : detail::hull_facets(pts, dim)) hs.push_back({std::move(f.normal), f.offset});
    return from_halfspaces(dim, std::move(hs));
}

/// Polytope of the perturbed polarization: P's halfspaces together with
/// <u,y> + base_offset - eps*rate >= 0 per cut. The result is contained in P;
/// each cut must be valid (redundant or supporting) on P at eps = 0.
inline Polytope perturb(const Polytope& P, const std::vector<PerturbCut>& extra,
                        const Rational& eps) {
    if (eps < 0) throw InvalidArgument("eps must be nonnegative");
    std::vector<Halfspace> hs = P.halfspaces();
    for (const auto& cut : extra) {
        Halfspace base{cut.normal, cut.base_offset};
        for (const auto& v : P.vertices())
            if (base.eval(v) < 0)
                throw InvalidPerturbation("extra halfspace cuts the polytope at eps = 0");
        hs.push_back({cut.normal, cut.base_offset - eps * cut.rate});
    }
    return Polytope::from_halfspaces(P.dim(), std::move(hs));
}

/// Total lattice-normalized boundary measure: sum over facets of the
/// Euclidean (n-1)-volume divided by |u_F|. For n = 1 every facet is a unit
/// atom.
inline Rational facet_measure_total(const Polytope& P) {
    const int n = P.dim();
    Rational total = 0;
    Rational fact = 1;
    for (int i = 2; i <= n - 1; ++i) fact *= i;
    for (std::size_t f = 0; f < P.facets().size(); ++f) {
        if (n == 1) {
            total += 1;
            continue;
        }
        for (const auto& s : P.facet_simplices(static_cast<int>(f)))
            total += detail::sigma_scale(s, P.facets()[f].normal) / fact;
    }
    return total;
}

struct DelzantReport {
    bool simple = true;    // every vertex lies on exactly n facets
    bool delzant = true;   // simple and each vertex's normals form a Z-basis
    std::vector<int> non_smooth_vertices;
};

/// Edge-normal determinant test at the vertices. Reported, never required.
inline DelzantReport delzant_check(const Polytope& P) {
    DelzantReport rep;
    const int n = P.dim();
    for (std::size_t vi = 0; vi < P.vertices().size(); ++vi) {
        std::vector<int> inc;
        for (std::size_t f = 0; f < P.facets().size(); ++f) {
            const auto& ids = P.facets()[f].vertex_ids;
            if (std::binary_search(ids.begin(), ids.end(), static_cast<int>(vi)))
                inc.push_back(static_cast<int>(f));
        }
        bool ok = static_cast<int>(inc.size()) == n;
        if (ok) {
            linalg::RatMat M(n, linalg::RatVec(n));
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) M[r][c] = Rational(P.facets()[inc[r]].normal[c]);
            Rational det = linalg::determinant(M);
            ok = (det == 1 || det == -1);
        } else {
            rep.simple = false;
        }
        if (!ok) {
            rep.delzant = false;
            rep.non_smooth_vertices.push_back(static_cast<int>(vi));
        }
    }
    return rep;
}

}  // namespace wkstab
