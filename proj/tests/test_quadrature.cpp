#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"

using namespace wkstab;
using namespace testutil;

namespace {

std::vector<Point> std_simplex2() {
    return {{rat(0), rat(0)}, {rat(1), rat(0)}, {rat(0), rat(1)}};
}

}  // namespace

TEST_CASE("monomial integrals over simplices") {
    REQUIRE(integrate_monomial_simplex({0, 0}, std_simplex2()) == rat(1, 2));
    // oracle: iterated integration of x y over the standard simplex
    REQUIRE(iterated_simplex_integral(1, 1) == rat(1, 24));
    REQUIRE(integrate_monomial_simplex({1, 1}, std_simplex2()) == iterated_simplex_integral(1, 1));
    REQUIRE(integrate_monomial_simplex({2}, {{rat(0)}, {rat(1)}}) == rat(1, 3));

    SECTION("iterated oracle agrees on a sweep of exponents") {
        for (unsigned a = 0; a <= 3; ++a)
            for (unsigned b = 0; b <= 3; ++b)
                REQUIRE(integrate_monomial_simplex({a, b}, std_simplex2()) ==
                        iterated_simplex_integral(a, b));
    }
    SECTION("degenerate simplices are rejected") {
        REQUIRE_THROWS_AS(
            integrate_monomial_simplex({0, 0}, {{rat(0), rat(0)}, {rat(1), rat(1)}, {rat(2), rat(2)}}),
            DegenerateSimplex);
    }
}

TEST_CASE("polynomial region integrals") {
    auto SQ = std::make_shared<Polytope>(make_square());
    Triangulation T = triangulate(SQ, 0);
    REQUIRE(integrate_polynomial_region(poly_one(2), T) == rat(4));

    Polynomial y1sq(2);
    y1sq.add_term({2, 0}, rat(1));
    // 1-D factorization oracle: (int_{-1}^{1} t^2 dt) * (int_{-1}^{1} 1 dt) = (2/3)*2
    REQUIRE(integrate_polynomial_region(y1sq, T) == rat(2, 3) * rat(2));

    auto SX = std::make_shared<Polytope>(make_simplex2());
    Polynomial xy(2);
    xy.add_term({1, 1}, rat(1));
    REQUIRE(integrate_polynomial_region(xy, triangulate(SX, 0)) ==
            iterated_simplex_integral(1, 1));
}

TEST_CASE("boundary integrals against the lattice measure") {
    REQUIRE(integrate_polynomial_boundary(poly_one(2), make_square()) == rat(8));
    REQUIRE(integrate_polynomial_boundary(poly_one(2), make_simplex2()) == rat(3));
    // endpoint atoms: g(0) + g(1) for g = y on [0,1]
    Polynomial y(1);
    y.add_term({1}, rat(1));
    REQUIRE(integrate_polynomial_boundary(y, make_interval(rat(0), rat(1))) == rat(1));
}

TEST_CASE("PL times polynomial products") {
    auto SQ = std::make_shared<Polytope>(make_square());
    SECTION("zero function") {
        auto f = PLConvexFunction::from_pieces(SQ, {AffineFunction::zero(2)});
        REQUIRE(integrate_pl_product(f, poly_one(2), triangulate(SQ, 1)) == rat(0));
    }
    SECTION("hinge on the square") {
        auto f = PLConvexFunction::from_pieces(SQ, {AffineFunction::zero(2), aff({0, 1, 0})});
        Triangulation T = triangulate_subordinate_to(f, 0);
        REQUIRE(integrate_pl_product(f, poly_one(2), T) == rat(1));
        REQUIRE(integrate_pl_product_boundary(f, poly_one(2), T) == rat(3));
    }
    SECTION("tent map on the interval") {
        auto I = std::make_shared<Polytope>(make_interval(rat(0), rat(1)));
        auto f = PLConvexFunction::from_pieces(I, {aff({1, -2}, 2), aff({-1, 2}, 2)});
        Triangulation T = triangulate_subordinate_to(f, 0);
        REQUIRE(integrate_pl_product(f, poly_one(1), T) == rat(1, 4));
    }
    SECTION("coarse triangulations are detected") {
        auto f = PLConvexFunction::from_pieces(SQ, {AffineFunction::zero(2), aff({0, 1, 0})});
        REQUIRE_THROWS_AS(integrate_pl_product(f, poly_one(2), triangulate(SQ, 0)),
                          TriangulationTooCoarse);
    }
    SECTION("globally affine f matches the plain polynomial path") {
        auto f = PLConvexFunction::from_pieces(SQ, {aff({1, 2, -1}, 2)});
        Triangulation T = triangulate(SQ, 1);
        Polynomial fg = aff({1, 2, -1}, 2).to_polynomial() * poly_one(2);
        REQUIRE(integrate_pl_product(f, poly_one(2), T) == integrate_polynomial_region(fg, T));
    }
}

TEST_CASE("integrals are invariant under refinement and boundary splitting") {
    RandomRational rr(2024);
    auto SQ = std::make_shared<Polytope>(make_square());
    auto SX = std::make_shared<Polytope>(make_simplex2());
    for (const auto& Pp : {SQ, SX}) {
        Polynomial g(2);
        for (int t = 0; t < 5; ++t) {
            Polynomial::Exponents e = {static_cast<unsigned>(rr.next_int(0, 2)),
                                       static_cast<unsigned>(rr.next_int(0, 2))};
            g.add_term(e, rr.next(-3, 3, 2));
        }
        Triangulation T0 = triangulate(Pp, 0);
        Rational base = integrate_polynomial_region(g, T0);
        Rational boundary_base = integrate_polynomial_boundary(g, *Pp);
        Triangulation T = T0;
        for (int k = 1; k <= 2; ++k) {
            T = T.refine();
            REQUIRE(integrate_polynomial_region(g, T) == base);
            // boundary additivity: sum the refined boundary faces directly
            Rational refined = 0;
            for (const auto& bf : T.boundary_faces()) {
                std::vector<Point> pts;
                for (int id : bf.face) pts.push_back(T.points()[id]);
                refined += integrate_polynomial_boundary_simplex(
                    g, pts, Pp->facets()[bf.facet].normal);
            }
            REQUIRE(refined == boundary_base);
        }
    }
}

TEST_CASE("smooth quadrature path") {
    SmoothWeight expw;
    expw.quadrature_degree = 7;
    expw.evaluator = [](const std::vector<double>& y) { return std::exp(y[0]); };

    auto I = std::make_shared<Polytope>(make_interval(rat(0), rat(1)));
    Triangulation T = triangulate(I, 0);
    REQUIRE(std::abs(integrate_smooth_region(expw, T) - (std::exp(1.0) - 1.0)) < 1e-8);

    SECTION("constant integrates to the volume") {
        SmoothWeight one;
        one.quadrature_degree = 3;
        one.evaluator = [](const std::vector<double>&) { return 1.0; };
        auto SQ = std::make_shared<Polytope>(make_square());
        REQUIRE(std::abs(integrate_smooth_region(one, triangulate(SQ, 0)) - 4.0) < 1e-13);
        REQUIRE(std::abs(integrate_smooth_boundary(one, *SQ) - 8.0) < 1e-13);
    }
    SECTION("rules are exact at their degree") {
        auto SQ = std::make_shared<Polytope>(make_square());
        Triangulation TS = triangulate(SQ, 0);
        Polynomial g(2);
        g.add_term({3, 2}, rat(5, 3));
        g.add_term({1, 0}, rat(-2));
        g.add_term({0, 0}, rat(1, 7));
        SmoothWeight gw;
        gw.quadrature_degree = 7;
        gw.evaluator = [g](const std::vector<double>& y) { return g.eval_double(y); };
        double exact = to_double(integrate_polynomial_region(g, TS));
        REQUIRE(std::abs(integrate_smooth_region(gw, TS) - exact) < 1e-12);
        double bexact = to_double(integrate_polynomial_boundary(g, *SQ));
        REQUIRE(std::abs(integrate_smooth_boundary(gw, *SQ) - bexact) < 1e-12);
    }
}
