#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// here must stay independent of the library code paths they check: the LP
// oracle enumerates basic solutions directly, and the simplex-integral oracle
// does iterated one-dimensional integration.

#include <random>
#include <vector>

#include "wkstab/wkstab.hpp"

namespace testutil {

using namespace wkstab;

inline Rational rat(long p, long q = 1) { return Rational(p, q); }

inline Polytope make_interval(const Rational& a, const Rational& b) {
    // y >= a and y <= b
    return Polytope::from_halfspaces(
        1, {{{Integer(1)}, -a}, {{Integer(-1)}, b}});
}

inline Polytope make_square() {
    return Polytope::from_halfspaces(2, {{{Integer(1), Integer(0)}, rat(1)},
                                         {{Integer(-1), Integer(0)}, rat(1)},
                                         {{Integer(0), Integer(1)}, rat(1)},
                                         {{Integer(0), Integer(-1)}, rat(1)}});
}

inline Polytope make_simplex2() {
    return Polytope::from_halfspaces(2, {{{Integer(1), Integer(0)}, rat(0)},
                                         {{Integer(0), Integer(1)}, rat(0)},
                                         {{Integer(-1), Integer(-1)}, rat(1)}});
}

inline Polynomial poly_one(int dim) { return Polynomial::constant(dim, rat(1)); }

inline AffineFunction aff(std::initializer_list<long> numerators, long den = 1) {
    // first entry is the constant, the rest the gradient
    auto it = numerators.begin();
    AffineFunction a;
    a.constant = Rational(*it++, den);
    for (; it != numerators.end(); ++it) a.gradient.push_back(Rational(*it, den));
    return a;
}

/// Exact iterated integral of x^a y^b over the standard 2-simplex:
/// int_0^1 x^a (1-x)^{b+1}/(b+1) dx expanded binomially, all rational.
inline Rational iterated_simplex_integral(unsigned a, unsigned b) {
    Rational sum = 0;
    Integer binom = 1;
    for (unsigned k = 0; k <= b + 1; ++k) {
        Rational term = Rational(binom) / Rational(a + k + 1);
        if (k % 2 == 1) term = -term;
        sum += term;
        binom = binom * Integer(b + 1 - k) / Integer(k + 1);
    }
    return sum / Rational(b + 1);
}

/// Brute-force LP oracle: enumerates all candidate basic points (square
/// subsystems of active constraints, including x_i = 0 walls for restricted
/// variables), keeps the feasible ones, and returns the best objective.
/// Exhaustive and exact for bounded problems.
struct BruteForceLP {
    bool found = false;
    Rational value;
    std::vector<Rational> point;
};

inline BruteForceLP brute_force_lp(const LPProblem& prob) {
    const int n = static_cast<int>(prob.objective.size());
    std::vector<bool> nonneg = prob.nonneg;
    nonneg.resize(n, false);

    struct Row {
        std::vector<Rational> coeffs;
        Rational rhs;
        bool mandatory;  // equality rows must always be active
    };
    std::vector<Row> rows;
    for (const auto& c : prob.constraints)
        rows.push_back({c.coeffs, c.rhs, c.rel == Relation::Equal});
    for (int j = 0; j < n; ++j) {
        if (!nonneg[j]) continue;
        Row r;
        r.coeffs.assign(n, Rational(0));
        r.coeffs[j] = 1;
        r.rhs = 0;
        r.mandatory = false;
        rows.push_back(std::move(r));
    }

    auto feasible = [&](const std::vector<Rational>& x) {
        for (const auto& c : prob.constraints) {
            Rational lhs = 0;
            for (int j = 0; j < n; ++j) lhs += c.coeffs[j] * x[j];
            if (c.rel == Relation::Equal && lhs != c.rhs) return false;
            if (c.rel == Relation::GreaterEq && lhs < c.rhs) return false;
            if (c.rel == Relation::LessEq && lhs > c.rhs) return false;
        }
        for (int j = 0; j < n; ++j)
            if (nonneg[j] && x[j] < 0) return false;
        return true;
    };

    BruteForceLP best;
    const int m = static_cast<int>(rows.size());
    std::vector<int> idx(n);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == n) {
            linalg::RatMat A(n, linalg::RatVec(n));
            linalg::RatVec b(n);
            for (int i = 0; i < n; ++i) {
                A[i] = rows[idx[i]].coeffs;
                b[i] = rows[idx[i]].rhs;
            }
            auto x = linalg::solve(A, b);
            if (!x || !feasible(*x)) return;
            Rational val = 0;
            for (int j = 0; j < n; ++j) val += prob.objective[j] * (*x)[j];
            if (!best.found || val < best.value) {
                best.found = true;
                best.value = val;
                best.point = *x;
            }
            return;
        }
        for (int i = start; i < m; ++i) {
            idx[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    // A candidate set that skips a mandatory equality can only produce points
    // that the feasibility filter rejects, so plain enumeration is sound.
    return best;
}

/// Deterministic random rationals with small numerators and denominators.
class RandomRational {
public:
    explicit RandomRational(unsigned seed) : rng_(seed) {}

    Rational next(int lo, int hi, int max_den = 2) {
        std::uniform_int_distribution<int> num(lo, hi);
        std::uniform_int_distribution<int> den(1, max_den);
        return Rational(num(rng_), den(rng_));
    }

    int next_int(int lo, int hi) {
        std::uniform_int_distribution<int> d(lo, hi);
        return d(rng_);
    }

    std::mt19937& rng() { return rng_; }

private:
    std::mt19937 rng_;
};

/// Random PL convex function as a max of affine pieces on a given domain.
inline PLConvexFunction random_pl(RandomRational& rr, std::shared_ptr<const Polytope> domain,
                                  int npieces) {
    std::vector<AffineFunction> pieces;
    const int n = domain->dim();
    for (int p = 0; p < npieces; ++p) {
        AffineFunction a;
        a.constant = rr.next(-2, 2);
        for (int i = 0; i < n; ++i) a.gradient.push_back(rr.next(-2, 2));
        pieces.push_back(std::move(a));
    }
    return PLConvexFunction::from_pieces(std::move(domain), std::move(pieces));
}

inline AffineFunction random_affine(RandomRational& rr, int dim) {
    AffineFunction a;
    a.constant = rr.next(-3, 3);
    for (int i = 0; i < dim; ++i) a.gradient.push_back(rr.next(-3, 3));
    return a;
}

/// Random positive polynomial weight of degree <= 2: a dominant constant plus
/// small linear/quadratic terms, positive on the polytope by construction
/// (the constant exceeds the sum of term bounds over the vertex box).
inline Polynomial random_positive_weight(RandomRational& rr, const Polytope& P) {
    const int n = P.dim();
    Rational box(1);
    for (const auto& v : P.vertices())
        for (const auto& c : v) box = std::max(box, abs(c));
    Polynomial p(n);
    Rational bound = 0;
    for (int i = 0; i < n; ++i) {
        Rational ci = rr.next(-1, 1, 4);
        Rational cii = rr.next(-1, 1, 4);
        Polynomial::Exponents lin(n, 0), quad(n, 0);
        lin[i] = 1;
        quad[i] = 2;
        p.add_term(lin, ci);
        p.add_term(quad, cii);
        bound += abs(ci) * box + abs(cii) * box * box;
    }
    p.add_term(Polynomial::Exponents(n, 0), bound + 1);
    return p;
}

}  // namespace testutil
