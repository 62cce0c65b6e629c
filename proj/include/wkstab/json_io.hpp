#pragma once

#include <fstream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "wkstab/extremal.hpp"
#include "wkstab/pl_function.hpp"
#include "wkstab/polytope.hpp"
#include "wkstab/stability.hpp"

namespace wkstab {

using json = nlohmann::json;

inline json rational_to_json(const Rational& r) { return rational_to_string(r); }

inline Rational rational_from_json(const json& j) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number_float()) return Rational(j.get<double>());
    throw InvalidArgument("expected a rational (string \"p/q\" or number)");
}

inline json value_to_json(const Value& v) {
    if (v.is_exact()) return rational_to_string(v.exact());
    return v.as_double();
}

inline json point_to_json(const Point& p) {
    json a = json::array();
    for (const auto& c : p) a.push_back(rational_to_json(c));
    return a;
}

inline Point point_from_json(const json& j) {
    Point p;
    for (const auto& c : j) p.push_back(rational_from_json(c));
    return p;
}

// --- Polytope ----------------------------------------------------------------
// Schema: {"dim": n, "halfspaces": [{"normal": [ints], "offset": "p/q"}],
//          "vertices": optional [[coords]]}. When vertices are present they
// are cross-checked against the enumerated vertex set.

inline json polytope_to_json(const Polytope& P) {
    json j;
    j["dim"] = P.dim();
    j["halfspaces"] = json::array();
    for (const auto& h : P.halfspaces()) {
        json hj;
        hj["normal"] = json::array();
        for (const auto& x : h.normal) hj["normal"].push_back(x.str());
        hj["offset"] = rational_to_json(h.offset);
        j["halfspaces"].push_back(std::move(hj));
    }
    j["vertices"] = json::array();
    for (const auto& v : P.vertices()) j["vertices"].push_back(point_to_json(v));
    return j;
}

inline Polytope polytope_from_json(const json& j, bool* normalized_warning = nullptr) {
    if (normalized_warning) *normalized_warning = false;
    std::vector<Halfspace> hs;
    std::vector<Point> verts;
    int dim = 0;
    if (j.contains("dim")) dim = j.at("dim").get<int>();
    if (j.contains("halfspaces")) {
        for (const auto& hj : j.at("halfspaces")) {
            Halfspace h;
            for (const auto& x : hj.at("normal")) {
                if (x.is_string())
                    h.normal.push_back(Integer(x.get<std::string>()));
                else
                    h.normal.push_back(Integer(x.get<long long>()));
            }
            h.offset = rational_from_json(hj.at("offset"));
            Integer g = 0;
            for (const auto& x : h.normal) g = gcd(g, x);
            if (normalized_warning && g > 1) *normalized_warning = true;
            hs.push_back(std::move(h));
        }
    }
    if (j.contains("vertices"))
        for (const auto& vj : j.at("vertices")) verts.push_back(point_from_json(vj));
    if (dim == 0) {
        if (!hs.empty()) dim = static_cast<int>(hs[0].normal.size());
        else if (!verts.empty()) dim = static_cast<int>(verts[0].size());
    }
    Polytope P = hs.empty() ? Polytope::from_vertices(verts)
                            : Polytope::from_halfspaces(dim, std::move(hs));
    if (!verts.empty() && !P.halfspaces().empty() && !j.at("halfspaces").empty()) {
        std::set<Point> given(verts.begin(), verts.end());
        std::set<Point> computed(P.vertices().begin(), P.vertices().end());
        if (given != computed)
            throw InvalidArgument("vertex list inconsistent with halfspace representation");
    }
    return P;
}

// --- Polynomials and weights -------------------------------------------------
// Polynomial: {"dim": n, "terms": [{"exponents": [ints], "coeff": "p/q"}]}.
// Smooth weights are declared as {"builtin": name, "params": [...],
// "quadrature_degree": d}.

inline json polynomial_to_json(const Polynomial& p) {
    json j;
    j["dim"] = p.dim();
    j["terms"] = json::array();
    for (const auto& [e, c] : p.terms()) {
        json tj;
        tj["exponents"] = e;
        tj["coeff"] = rational_to_json(c);
        j["terms"].push_back(std::move(tj));
    }
    return j;
}

inline Polynomial polynomial_from_json(const json& j) {
    Polynomial p(j.at("dim").get<int>());
    for (const auto& tj : j.at("terms")) {
        Polynomial::Exponents e = tj.at("exponents").get<Polynomial::Exponents>();
        if (static_cast<int>(e.size()) != p.dim())
            throw InvalidArgument("exponent arity does not match polynomial dimension");
        p.add_term(e, rational_from_json(tj.at("coeff")));
    }
    return p;
}

inline Weight weight_from_json(const json& j, int default_quad_degree = 7) {
    if (j.contains("builtin")) {
        std::vector<double> params;
        if (j.contains("params"))
            for (const auto& x : j.at("params")) params.push_back(x.get<double>());
        int deg = j.value("quadrature_degree", default_quad_degree);
        return make_builtin_weight(j.at("builtin").get<std::string>(), params, deg);
    }
    return polynomial_from_json(j);
}

inline json weight_to_json(const Weight& w) {
    if (weight_is_polynomial(w)) return polynomial_to_json(weight_polynomial(w));
    const auto& s = std::get<SmoothWeight>(w);
    json j;
    j["builtin"] = s.name;
    j["params"] = s.params;
    j["quadrature_degree"] = s.quadrature_degree;
    return j;
}

// --- Affine and PL functions -------------------------------------------------

inline json affine_to_json(const AffineFunction& a) {
    json j;
    j["constant"] = rational_to_json(a.constant);
    j["gradient"] = json::array();
    for (const auto& g : a.gradient) j["gradient"].push_back(rational_to_json(g));
    return j;
}

inline AffineFunction affine_from_json(const json& j) {
    AffineFunction a;
    a.constant = rational_from_json(j.at("constant"));
    for (const auto& g : j.at("gradient")) a.gradient.push_back(rational_from_json(g));
    return a;
}

/// PL function schema: either {"max_of_affine": [affine...]} or
/// {"triangulation_ref": {"refine": k}, "values": [...]}, the latter indexed
/// by the canonical (lexicographic) point order of the triangulation.
inline PLConvexFunction pl_from_json(const json& j, std::shared_ptr<const Polytope> domain) {
    if (j.contains("max_of_affine")) {
        std::vector<AffineFunction> pieces;
        for (const auto& aj : j.at("max_of_affine")) pieces.push_back(affine_from_json(aj));
        return PLConvexFunction::from_pieces(std::move(domain), std::move(pieces));
    }
    if (j.contains("triangulation_ref")) {
        int k = j.at("triangulation_ref").value("refine", 0);
        auto T = std::make_shared<Triangulation>(triangulate(domain, k));
        std::vector<Rational> values;
        for (const auto& vj : j.at("values")) values.push_back(rational_from_json(vj));
        return PLConvexFunction::from_vertex_values(std::move(T), std::move(values));
    }
    throw InvalidArgument("PL function needs 'max_of_affine' or 'triangulation_ref'+'values'");
}

inline json pl_to_json(const PLConvexFunction& f) {
    json j;
    if (f.is_max_of_affine()) {
        j["max_of_affine"] = json::array();
        for (const auto& p : f.max_of_affine()->pieces)
            j["max_of_affine"].push_back(affine_to_json(p));
    } else {
        const auto* vv = f.vertex_values();
        j["triangulation_ref"] = {{"refine", vv->tri->refinement()},
                                  {"id", vv->tri->id()}};
        j["values"] = json::array();
        for (const auto& t : vv->values) j["values"].push_back(rational_to_json(t));
    }
    return j;
}

// --- Perturbation cuts --------------------------------------------------------

inline std::vector<PerturbCut> cuts_from_json(const json& j) {
    std::vector<PerturbCut> cuts;
    for (const auto& cj : j) {
        PerturbCut c;
        for (const auto& x : cj.at("normal")) {
            if (x.is_string())
                c.normal.push_back(Integer(x.get<std::string>()));
            else
                c.normal.push_back(Integer(x.get<long long>()));
        }
        c.base_offset = rational_from_json(cj.at("base_offset"));
        c.rate = rational_from_json(cj.at("rate"));
        cuts.push_back(std::move(c));
    }
    return cuts;
}

// --- Result types --------------------------------------------------------------

inline json extremal_to_json(const ExtremalSolution& s) {
    json j;
    j["ell"] = affine_to_json(s.ell);
    j["exact"] = s.exact;
    j["residual"] = s.residual;
    j["min_eigenvalue_estimate"] = s.min_eigenvalue_estimate;
    j["quadrature_degree"] = s.quadrature_degree;
    j["gram"] = s.gram;
    j["rhs"] = s.rhs;
    return j;
}

inline const char* lp_status_name(LPStatus s) {
    switch (s) {
        case LPStatus::Optimal: return "optimal";
        case LPStatus::Infeasible: return "infeasible";
        case LPStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

inline json stability_report_to_json(const StabilityReport& rep, bool include_minimizer = true) {
    json j;
    j["delta"] = rep.delta;
    if (rep.delta_exact) j["delta_exact"] = rational_to_json(*rep.delta_exact);
    j["lp_status"] = lp_status_name(rep.lp_status);
    j["triangulation_id"] = rep.triangulation_id;
    j["y0"] = point_to_json(rep.y0);
    j["lp_pivots"] = rep.lp_pivots;
    j["quadrature_degree"] = rep.quadrature_degree;
    j["normalization_checks"] = {
        {"boundary_integral", value_to_json(rep.normalization_checks.boundary_integral)},
        {"value_at_y0", value_to_json(rep.normalization_checks.value_at_y0)},
        {"min_vertex_value", value_to_json(rep.normalization_checks.min_vertex_value)}};
    if (rep.recheck_L) j["recheck_L"] = value_to_json(*rep.recheck_L);
    if (rep.delta_refined) j["delta_refined"] = *rep.delta_refined;
    if (rep.delta_refined_exact)
        j["delta_refined_exact"] = rational_to_json(*rep.delta_refined_exact);
    j["caveat"] = rep.caveat;
    if (include_minimizer && rep.minimizer) j["minimizer"] = pl_to_json(*rep.minimizer);
    return j;
}

inline json ma_atoms_to_json(const NAMeasureAtoms& atoms) {
    json j;
    j["atoms"] = json::array();
    for (const auto& a : atoms.atoms) {
        json aj;
        aj["gradient"] = json::array();
        for (const auto& g : a.gradient) aj["gradient"].push_back(rational_to_json(g));
        aj["mass"] = value_to_json(a.mass);
        aj["cell_vertices"] = json::array();
        for (const auto& v : a.cell.vertices()) aj["cell_vertices"].push_back(point_to_json(v));
        j["atoms"].push_back(std::move(aj));
    }
    j["total_mass"] = value_to_json(atoms.total);
    return j;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw InvalidArgument("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

}  // namespace wkstab
