// Command-line toolkit for weighted K-stability of polarized toric varieties
// from moment-polytope data. All commands are batch; inputs are JSON files
// and outputs are JSON/CSV on stdout or content-hashed files.
//
// Exit codes: 0 ok / stable-evidence, 10 destabilizer found, 2 input error,
// 3 internal error.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "wkstab/wkstab.hpp"

namespace {

using namespace wkstab;

std::vector<Rational> parse_rational_list(const std::string& text) {
    std::vector<Rational> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
    return out;
}

Point parse_point(const std::string& text) { return parse_rational_list(text); }

AffineFunction parse_affine(const std::string& text, int dim) {
    auto coeffs = parse_rational_list(text);
    if (static_cast<int>(coeffs.size()) != dim + 1)
        throw InvalidArgument("expected " + std::to_string(dim + 1) + " coefficients b0,b1,...,bn");
    AffineFunction a;
    a.constant = coeffs[0];
    a.gradient.assign(coeffs.begin() + 1, coeffs.end());
    return a;
}

struct CommonPaths {
    std::string polytope, v, w, f, f2, extra, xi;
    std::string eps, y0, c_mode = "auto";
    int refine = 1;
    int quad_degree = 7;
    int workers = 0;
    long lattice = 0;
    int bins = 16;
    bool rounded = false;
    bool quotient = false;
    bool force = false;
    bool no_trend = false;
    std::string output = "out";
    std::string format = "json";
};

std::shared_ptr<Polytope> load_polytope(const std::string& path) {
    return std::make_shared<Polytope>(polytope_from_json(load_json_file(path)));
}

Weight load_weight(const std::string& path, int quad_degree) {
    return weight_from_json(load_json_file(path), quad_degree);
}

/// Triangulation refining f's linearity cells, refined k more times.
Triangulation subordinate_for(const PLConvexFunction& f, int k) {
    return triangulate_subordinate_to(f, k);
}

int cmd_lext(const CommonPaths& opt) {
    auto P = load_polytope(opt.polytope);
    Weight v = load_weight(opt.v, opt.quad_degree);
    Weight w = load_weight(opt.w, opt.quad_degree);
    Triangulation T = triangulate(P, opt.refine);
    ExtremalSolution sol = solve_extremal(*P, v, w, T);
    json j = extremal_to_json(sol);
    j["c"] = value_to_json(c_constant(*P, v, w));
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_lext_sweep(const CommonPaths& opt) {
    auto P = load_polytope(opt.polytope);
    Weight v = load_weight(opt.v, opt.quad_degree);
    Weight w = load_weight(opt.w, opt.quad_degree);
    auto cuts = cuts_from_json(load_json_file(opt.extra));
    auto family = extremal_family(*P, cuts, v, w, parse_rational_list(opt.eps));
    std::cout << "eps";
    for (int i = 0; i <= P->dim(); ++i) std::cout << ",b" << i;
    std::cout << ",residual\n";
    for (const auto& e : family) {
        std::cout << rational_to_string(e.eps);
        if (e.solution) {
            std::cout << ',' << rational_to_string(e.solution->ell.constant);
            for (const auto& g : e.solution->ell.gradient)
                std::cout << ',' << rational_to_string(g);
            std::cout << ',' << detail::format_double(e.solution->residual) << "\n";
        } else {
            for (int i = 0; i <= P->dim(); ++i) std::cout << ',';
            std::cout << "error: " << e.error << "\n";
        }
    }
    return 0;
}

int cmd_eval_L(const CommonPaths& opt) {
    auto P = load_polytope(opt.polytope);
    Weight v = load_weight(opt.v, opt.quad_degree);
    Weight w = load_weight(opt.w, opt.quad_degree);
    PLConvexFunction f = pl_from_json(load_json_file(opt.f), P);

    Weight w_eff = w;
    Value c(Rational(1));
    if (opt.c_mode == "auto") {
        c = c_constant(*P, v, w);
    } else if (opt.c_mode == "extremal") {
        Triangulation T0 = triangulate(P, 0);
        w_eff = weight_times_affine(w, solve_extremal(*P, v, w, T0).ell);
        c = Value(Rational(1));
    } else {
        c = Value(parse_rational(opt.c_mode));
    }
    Triangulation T = f.is_max_of_affine() ? subordinate_for(f, opt.refine)
                                           : *f.vertex_values()->tri;
    Value L = evaluate_L(f, *P, v, w_eff, c, T);
    json j;
    j["L"] = value_to_json(L);
    j["c"] = value_to_json(c);
    j["triangulation_id"] = T.id();
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_futaki(const CommonPaths& opt) {
    auto P = load_polytope(opt.polytope);
    Weight v = load_weight(opt.v, opt.quad_degree);
    Weight w = load_weight(opt.w, opt.quad_degree);
    AffineFunction xi = parse_affine(opt.xi, P->dim());
    Value c = (opt.c_mode == "auto") ? c_constant(*P, v, w) : Value(parse_rational(opt.c_mode));
    json j;
    j["futaki"] = value_to_json(weighted_futaki(xi, *P, v, w, c));
    j["c"] = value_to_json(c);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_ma(const CommonPaths& opt) {
    auto P = load_polytope(opt.polytope);
    Weight v = load_weight(opt.v, opt.quad_degree);
    PLConvexFunction f = pl_from_json(load_json_file(opt.f), P);
    std::cout << ma_atoms_to_json(discrete_MA(f, v, *P)).dump(2) << "\n";
    return 0;
}

int cmd_check(const CommonPaths& opt) {
    auto P = load_polytope(opt.polytope);
    Weight v = load_weight(opt.v, opt.quad_degree);
    Weight w = load_weight(opt.w, opt.quad_degree);
    StabilityConfig sc;
    sc.refine = opt.refine;
    sc.trend = !opt.no_trend;
    if (!opt.y0.empty()) sc.y0 = parse_point(opt.y0);
    CheckResult res = check_stability(*P, v, w, sc);
    json j;
    j["extremal"] = extremal_to_json(res.extremal);
    j["c"] = value_to_json(res.c_pair);
    j["report"] = stability_report_to_json(res.report);
    std::cout << j.dump(2) << "\n";
    return (res.report.lp_status == LPStatus::Optimal && res.report.delta < 0) ? 10 : 0;
}

int cmd_sweep(const CommonPaths& opt) {
    auto P = load_polytope(opt.polytope);
    Weight v = load_weight(opt.v, opt.quad_degree);
    Weight w = load_weight(opt.w, opt.quad_degree);
    auto cuts = cuts_from_json(load_json_file(opt.extra));
    RunConfig cfg;
    cfg.refine = opt.refine;
    cfg.eps_list = parse_rational_list(opt.eps);
    if (!opt.y0.empty()) cfg.y0 = parse_point(opt.y0);
    cfg.quadrature_degree = opt.quad_degree;
    cfg.output_dir = opt.output;
    cfg.workers = workers_from_env(opt.workers);
    cfg.force = opt.force;
    cfg.trend = !opt.no_trend;
    cfg.format = opt.format;
    auto records = run_sweep(*P, cuts, v, w, cfg);
    std::string hash = persist_sweep(records, cfg.output_dir);
    json j = sweep_to_json(records);
    j["determinism_hash"] = hash;
    j["output_dir"] = cfg.output_dir;
    std::cout << (cfg.format == "json" ? j.dump(2) + "\n" : report(records, cfg.format));
    for (const auto& r : records)
        if (r.ok && r.delta < 0) return 10;
    return 0;
}

int cmd_volume(const CommonPaths& opt) {
    auto P = load_polytope(opt.polytope);
    Weight v = load_weight(opt.v, opt.quad_degree);
    PLConvexFunction f = pl_from_json(load_json_file(opt.f), P);
    Triangulation T = f.is_max_of_affine() ? subordinate_for(f, 0) : *f.vertex_values()->tri;
    json j;
    j["volume_exact"] = value_to_json(weighted_volume_exact(f, v, *P, T));
    auto filt = make_filtration(f);
    j["denominator"] = filt.denominator.str();
    if (opt.lattice > 0) {
        j["volume_lattice"] = value_to_json(
            weighted_volume_lattice(f, v, *P, opt.lattice, opt.rounded));
        j["lattice_m"] = opt.lattice;
        j["rounded"] = opt.rounded;
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_dh(const CommonPaths& opt) {
    auto P = load_polytope(opt.polytope);
    Weight v = load_weight(opt.v, opt.quad_degree);
    PLConvexFunction f = pl_from_json(load_json_file(opt.f), P);
    long m = opt.lattice > 0 ? opt.lattice : 100;
    auto h = dh_histogram(f, v, *P, opt.bins, m);
    std::cout << "bin_lo,bin_hi,mass\n";
    for (std::size_t b = 0; b < h.masses.size(); ++b)
        std::cout << detail::format_double(h.bin_edges[b]) << ','
                  << detail::format_double(h.bin_edges[b + 1]) << ','
                  << detail::format_double(h.masses[b]) << "\n";
    std::cerr << "total mass " << detail::format_double(h.total) << " (m = " << m << ")\n";
    return 0;
}

int cmd_dist(const CommonPaths& opt) {
    auto P = load_polytope(opt.polytope);
    Weight v = load_weight(opt.v, opt.quad_degree);
    PLConvexFunction f1 = pl_from_json(load_json_file(opt.f), P);
    PLConvexFunction f2 = pl_from_json(load_json_file(opt.f2), P);
    Triangulation T = triangulate_subordinate_to_pair(f1, f2, 0);
    json j;
    j["d_v1"] = value_to_json(d_v1(f1, f2, v, *P, T));
    if (opt.quotient) {
        auto q = quotient_distance(f1, f2, v, *P, T);
        j["quotient_distance"] = value_to_json(q.distance);
        j["optimal_shift"] = rational_to_string(q.c_star);
        j["shift_at_breakpoint"] = q.c_at_knot;
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_validate(const CommonPaths& opt) {
    auto diags = validate_inputs(load_json_file(opt.polytope), load_json_file(opt.v),
                                 load_json_file(opt.w), opt.refine);
    std::cout << diagnostics_to_json(diags).dump(2) << "\n";
    if (max_severity(diags) >= 2 && !opt.force) return 2;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted K-stability toolkit for polarized toric varieties"};
    app.require_subcommand(1);
    CommonPaths opt;

    auto add_common = [&](CLI::App* sub, bool needs_w = true) {
        sub->add_option("--polytope", opt.polytope, "polytope JSON file")->required();
        sub->add_option("--v", opt.v, "weight v JSON file")->required();
        if (needs_w) sub->add_option("--w", opt.w, "weight w JSON file");
        sub->add_option("--refine", opt.refine, "triangulation refinement level");
        sub->add_option("--quad-degree", opt.quad_degree, "quadrature degree for smooth weights");
    };

    auto* lext = app.add_subcommand("lext", "solve the weighted extremal affine function");
    add_common(lext);

    auto* lsweep = app.add_subcommand("lext-sweep", "l_ext over a perturbation family (CSV)");
    add_common(lsweep);
    lsweep->add_option("--extra", opt.extra, "perturbation cuts JSON")->required();
    lsweep->add_option("--eps", opt.eps, "comma-separated eps list")->required();

    auto* evalL = app.add_subcommand("eval-L", "evaluate the functional L on a PL function");
    add_common(evalL);
    evalL->add_option("--f", opt.f, "PL convex function JSON")->required();
    evalL->add_option("--c", opt.c_mode, "c constant: auto, extremal, or a rational");

    auto* futaki = app.add_subcommand("futaki", "weighted Futaki invariant of an affine field");
    add_common(futaki);
    futaki->add_option("--xi", opt.xi, "affine coefficients b0,b1,...,bn")->required();
    futaki->add_option("--c", opt.c_mode, "c constant: auto or a rational");

    auto* ma = app.add_subcommand("ma", "atomic weighted Monge-Ampere measure of a PL function");
    add_common(ma, /*needs_w=*/false);
    ma->add_option("--f", opt.f, "PL convex function JSON")->required();

    auto* check = app.add_subcommand("check", "full stability check (extremal-relative form)");
    add_common(check);
    check->add_option("--y0", opt.y0, "normalization point, e.g. \"0,0\"");
    check->add_flag("--no-trend", opt.no_trend, "skip the refinement-trend solve");

    auto* sweep = app.add_subcommand("sweep", "openness probe over a perturbation family");
    add_common(sweep);
    sweep->add_option("--extra", opt.extra, "perturbation cuts JSON")->required();
    sweep->add_option("--eps", opt.eps, "comma-separated eps list")->required();
    sweep->add_option("--y0", opt.y0, "normalization point");
    sweep->add_option("--workers", opt.workers, "worker threads (or TORIC_WKSTAB_WORKERS)");
    sweep->add_option("--output", opt.output, "output directory for hashed reports");
    sweep->add_option("--format", opt.format, "stdout format: json, csv, md");
    sweep->add_flag("--force", opt.force, "sweep even if the base check fails");
    sweep->add_flag("--no-trend", opt.no_trend, "skip the refinement-trend solves");

    auto* volume = app.add_subcommand("volume", "weighted volume of a toric filtration");
    add_common(volume, /*needs_w=*/false);
    volume->add_option("--f", opt.f, "PL convex function JSON")->required();
    volume->add_option("--lattice", opt.lattice, "also compute the lattice sum at this m");
    volume->add_flag("--rounded", opt.rounded, "floor the successive minima to integers");

    auto* dh = app.add_subcommand("dh", "weighted Duistermaat-Heckman histogram (CSV)");
    add_common(dh, /*needs_w=*/false);
    dh->add_option("--f", opt.f, "PL convex function JSON")->required();
    dh->add_option("--bins", opt.bins, "number of bins");
    dh->add_option("--lattice", opt.lattice, "lattice parameter m");

    auto* dist = app.add_subcommand("dist", "d_{v,1} distance between two PL functions");
    add_common(dist, /*needs_w=*/false);
    dist->add_option("--f1", opt.f, "first PL function JSON")->required();
    dist->add_option("--f2", opt.f2, "second PL function JSON")->required();
    dist->add_flag("--quotient", opt.quotient, "also minimize over constant shifts");

    auto* validate = app.add_subcommand("validate", "structural input diagnostics");
    add_common(validate);
    validate->add_flag("--force", opt.force, "report diagnostics but exit 0");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (lext->parsed()) return cmd_lext(opt);
        if (lsweep->parsed()) return cmd_lext_sweep(opt);
        if (evalL->parsed()) return cmd_eval_L(opt);
        if (futaki->parsed()) return cmd_futaki(opt);
        if (ma->parsed()) return cmd_ma(opt);
        if (check->parsed()) return cmd_check(opt);
        if (sweep->parsed()) return cmd_sweep(opt);
        if (volume->parsed()) return cmd_volume(opt);
        if (dh->parsed()) return cmd_dh(opt);
        if (dist->parsed()) return cmd_dist(opt);
        if (validate->parsed()) return cmd_validate(opt);
    } catch (const InvalidArgument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const UnboundedPolytope& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const EmptyPolytope& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const DegeneratePolytope& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const NotConvex& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const PointNotInterior& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
