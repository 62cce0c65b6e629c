#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wkstab/polytope.hpp"

namespace wkstab {

namespace detail {

inline Rational simplex_volume(const std::vector<Point>& s) {
    const int n = static_cast<int>(s[0].size());
    linalg::RatMat E(n, linalg::RatVec(n));
    for (int j = 0; j < n; ++j) {
        auto e = linalg::sub(s[j + 1], s[0]);
        for (int i = 0; i < n; ++i) E[i][j] = e[i];
    }
    Rational det = abs(linalg::determinant(E));
    Rational fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    return det / fact;
}

/// Children of the doubled reference simplex under Freudenthal's red
/// refinement, encoded as integer vertex tuples in {0,1,2}^n. Computed once
/// per dimension; always exactly 2^n children.
inline const std::vector<std::vector<std::vector<int>>>& kuhn_children(int n) {
    static std::mutex mu;
    static std::map<int, std::vector<std::vector<std::vector<int>>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    auto monotone = [n](const std::vector<int>& y) {
        for (int i = 0; i + 1 < n; ++i)
            if (y[i] < y[i + 1]) return false;
        return true;
    };
    std::set<std::vector<std::vector<int>>> children;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> offset(n, 0);
    for (int mask = 0; mask < (1 << n); ++mask) {
        for (int i = 0; i < n; ++i) offset[i] = (mask >> i) & 1;
        std::sort(perm.begin(), perm.end());
        do {
            std::vector<std::vector<int>> verts;
            std::vector<int> cur = offset;
            verts.push_back(cur);
            bool ok = monotone(cur);
            for (int j = 0; j < n && ok; ++j) {
                cur[perm[j]] += 1;
                ok = monotone(cur);
                verts.push_back(cur);
            }
            if (!ok) continue;
            std::sort(verts.begin(), verts.end());
            children.insert(verts);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    auto& out = cache[n];
    out.assign(children.begin(), children.end());
    if (out.size() != (1u << n))
        throw Error("internal: red refinement produced wrong child count");
    return out;
}

}  // namespace detail

struct InteriorWall {
    std::vector<int> face;  // sorted point ids of the shared (n-1)-face
    int left = -1, right = -1;
};

struct BoundaryFace {
    std::vector<int> face;  // sorted point ids
    int simplex = -1;       // owning simplex
    int facet = -1;         // polytope facet containing the face
};

/// Simplicial subdivision of a polytope with cached wall and boundary
/// structure. Points are stored in lexicographic order, which makes the whole
/// object canonical: two runs over the same input produce identical indices.
class Triangulation {
public:
    static Triangulation build(std::shared_ptr<const Polytope> poly,
                               const std::vector<std::vector<Point>>& raw,
                               int refinement);

    const Polytope& polytope() const { return *poly_; }
    std::shared_ptr<const Polytope> polytope_ptr() const { return poly_; }
    const std::vector<Point>& points() const { return points_; }
    const std::vector<std::vector<int>>& simplices() const { return simplices_; }
    const std::vector<InteriorWall>& interior_walls() const { return walls_; }
    const std::vector<BoundaryFace>& boundary_faces() const { return boundary_; }
    const std::vector<Rational>& simplex_volumes() const { return volumes_; }
    int refinement() const { return refinement_; }
    const std::string& id() const { return id_; }

    int dim() const { return poly_->dim(); }

    std::vector<Point> simplex_points(int s) const {
        std::vector<Point> out;
        for (int id : simplices_[s]) out.push_back(points_[id]);
        return out;
    }

    Point simplex_barycenter(int s) const {
        const int n = dim();
        Point b(n, Rational(0));
        for (int id : simplices_[s])
            for (int i = 0; i < n; ++i) b[i] += points_[id][i];
        for (auto& x : b) x /= Rational(static_cast<int>(simplices_[s].size()));
        return b;
    }

    Rational total_volume() const {
        Rational v = 0;
        for (const auto& x : volumes_) v += x;
        return v;
    }

    std::optional<int> find_point(const Point& p) const {
        auto it = std::lower_bound(points_.begin(), points_.end(), p);
        if (it != points_.end() && *it == p)
            return static_cast<int>(it - points_.begin());
        return std::nullopt;
    }

    /// Barycentric coordinates of y in simplex s (solves the affine system).
    std::vector<Rational> barycentric(int s, const Point& y) const {
        const int n = dim();
        linalg::RatMat A(n + 1, linalg::RatVec(n + 1));
        linalg::RatVec b(n + 1);
        for (int j = 0; j <= n; ++j) {
            A[0][j] = 1;
            for (int i = 0; i < n; ++i) A[i + 1][j] = points_[simplices_[s][j]][i];
        }
        b[0] = 1;
        for (int i = 0; i < n; ++i) b[i + 1] = y[i];
        auto lam = linalg::solve(A, b);
        if (!lam) throw Error("internal: degenerate simplex in barycentric solve");
        return *lam;
    }

    /// First simplex (in canonical order) containing y, with its barycentric
    /// coordinates; nullopt if y is outside the support.
    std::optional<std::pair<int, std::vector<Rational>>> locate(const Point& y) const {
        for (std::size_t s = 0; s < simplices_.size(); ++s) {
            auto lam = barycentric(static_cast<int>(s), y);
            bool inside = true;
            for (const auto& l : lam)
                if (l < 0) {
                    inside = false;
                    break;
                }
            if (inside) return std::make_pair(static_cast<int>(s), lam);
        }
        return std::nullopt;
    }

    /// One round of red refinement (every edge split at its midpoint).
    Triangulation refine() const {
        const int n = dim();
        const auto& children = detail::kuhn_children(n);
        std::vector<std::vector<Point>> raw;
        raw.reserve(simplices_.size() * children.size());
        for (const auto& simplex : simplices_) {
            // Point ids are in lexicographic order, so the sorted vertex tuple
            // is globally consistent across neighbors (Bey's condition for a
            // conforming refinement).
            std::vector<Point> x;
            for (int id : simplex) x.push_back(points_[id]);
            for (const auto& child : children) {
                std::vector<Point> q;
                for (const auto& y : child) {
                    Point p = x[0];
                    for (int i = 1; i <= n; ++i) {
                        Rational c = Rational(y[i - 1]) / 2;
                        for (int d = 0; d < n; ++d) p[d] += c * (x[i][d] - x[i - 1][d]);
                    }
                    q.push_back(std::move(p));
                }
                raw.push_back(std::move(q));
            }
        }
        return build(poly_, raw, refinement_ + 1);
    }

private:
    std::shared_ptr<const Polytope> poly_;
    std::vector<Point> points_;
    std::vector<std::vector<int>> simplices_;
    std::vector<InteriorWall> walls_;
    std::vector<BoundaryFace> boundary_;
    std::vector<Rational> volumes_;
    int refinement_ = 0;
    std::string id_;
};

inline Triangulation Triangulation::build(std::shared_ptr<const Polytope> poly,
                                          const std::vector<std::vector<Point>>& raw,
                                          int refinement) {
    Triangulation T;
    T.poly_ = std::move(poly);
    T.refinement_ = refinement;

    std::set<Point> pset;
    for (const auto& s : raw)
        for (const auto& p : s) pset.insert(p);
    T.points_.assign(pset.begin(), pset.end());

    auto point_id = [&T](const Point& p) {
        auto it = std::lower_bound(T.points_.begin(), T.points_.end(), p);
        return static_cast<int>(it - T.points_.begin());
    };

    for (const auto& s : raw) {
        std::vector<int> ids;
        for (const auto& p : s) ids.push_back(point_id(p));
        std::sort(ids.begin(), ids.end());
        T.simplices_.push_back(std::move(ids));
    }
    std::sort(T.simplices_.begin(), T.simplices_.end());
    T.simplices_.erase(std::unique(T.simplices_.begin(), T.simplices_.end()),
                       T.simplices_.end());

    for (const auto& s : T.simplices_) {
        std::vector<Point> pts;
        for (int id : s) pts.push_back(T.points_[id]);
        Rational vol = detail::simplex_volume(pts);
        if (vol == 0) throw DegenerateSimplex("triangulation contains a flat simplex");
        T.volumes_.push_back(vol);
    }

    // Face incidence: every (n-1)-face belongs to exactly two simplices
    // (interior wall) or one (boundary face on a unique polytope facet).
    std::map<std::vector<int>, std::vector<int>> face_owners;
    for (std::size_t si = 0; si < T.simplices_.size(); ++si) {
        const auto& s = T.simplices_[si];
        for (std::size_t drop = 0; drop < s.size(); ++drop) {
            std::vector<int> face;
            for (std::size_t j = 0; j < s.size(); ++j)
                if (j != drop) face.push_back(s[j]);
            face_owners[face].push_back(static_cast<int>(si));
        }
    }
    const auto& facets = T.poly_->facets();
    for (const auto& [face, owners] : face_owners) {
        if (owners.size() == 2) {
            T.walls_.push_back({face, owners[0], owners[1]});
        } else if (owners.size() == 1) {
            int hit = -1;
            for (std::size_t f = 0; f < facets.size(); ++f) {
                bool on = true;
                for (int id : face) {
                    Halfspace h{facets[f].normal, facets[f].offset};
                    if (h.eval(T.points_[id]) != 0) {
                        on = false;
                        break;
                    }
                }
                if (on) {
                    hit = static_cast<int>(f);
                    break;
                }
            }
            if (hit < 0) throw Error("internal: boundary face lies on no facet");
            T.boundary_.push_back({face, owners[0], hit});
        } else {
            throw Error("internal: non-manifold face in triangulation");
        }
    }

    std::ostringstream key;
    for (const auto& p : T.points_) {
        for (const auto& c : p) key << rational_to_string(c) << ',';
        key << ';';
    }
    for (const auto& s : T.simplices_) {
        for (int id : s) key << id << ',';
        key << ';';
    }
    T.id_ = "T" + detail::fnv1a_hex(key.str()) + "-k" + std::to_string(refinement);
    return T;
}

/// Pulling triangulation of P refined k times. k = 0 uses only polytope
/// vertices; each increment splits every edge at its midpoint.
inline Triangulation triangulate(std::shared_ptr<const Polytope> P, int k) {
    if (k < 0) throw InvalidArgument("refinement must be nonnegative");
    auto raw = detail::pulling_simplices(P->vertices(), P->dim());
    Triangulation T = Triangulation::build(P, raw, 0);
    for (int i = 0; i < k; ++i) T = T.refine();
    return T;
}

inline Triangulation triangulate(const Polytope& P, int k) {
    return triangulate(std::make_shared<Polytope>(P), k);
}

namespace detail {
inline Rational polytope_volume(const Polytope& P) {
    Rational v = 0;
    for (const auto& s : pulling_simplices(P.vertices(), P.dim())) v += simplex_volume(s);
    return v;
}
}  // namespace detail

/// Triangulation of P subordinate to a polytopal subdivision (each simplex
/// lies inside one cell). Cells are pulled independently; shared faces get
/// identical triangulations because pulling depends only on the vertex set.
inline Triangulation triangulate_subordinate(std::shared_ptr<const Polytope> P,
                                             const std::vector<Polytope>& cells, int k) {
    std::vector<std::vector<Point>> raw;
    for (const auto& cell : cells)
        for (auto& s : detail::pulling_simplices(cell.vertices(), cell.dim()))
            raw.push_back(std::move(s));
    Triangulation T = Triangulation::build(P, raw, 0);
    if (T.total_volume() != detail::polytope_volume(*P))
        throw InvalidArgument("cells do not cover the polytope");
    for (int i = 0; i < k; ++i) T = T.refine();
    return T;
}

}  // namespace wkstab
