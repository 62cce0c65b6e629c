#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "wkstab/filtration.hpp"
#include "wkstab/json_io.hpp"
#include "wkstab/stability.hpp"

namespace wkstab {

struct RunConfig {
    int refine = 1;
    std::vector<Rational> eps_list;
    std::optional<Point> y0;
    int quadrature_degree = 7;
    std::string output_dir = ".";
    unsigned seed = 0;        // consumed only by randomized property tests
    int workers = 1;
    bool force = false;
    bool trend = true;
    std::string format = "json";
};

inline int workers_from_env(int cli_value) {
    if (cli_value > 0) return cli_value;
    if (const char* env = std::getenv("TORIC_WKSTAB_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

/// One perturbation step of the openness probe. Failures are recorded, never
/// thrown, so a single infeasible eps cannot destroy a study.
struct SweepRecord {
    Rational eps;
    bool ok = false;
    std::string error;
    std::vector<Rational> ell_coeffs;  // b0, b1, ..., bn
    Value c_value;
    double delta = 0.0;
    std::optional<Rational> delta_exact;
    LPStatus lp_status = LPStatus::Infeasible;
    std::string triangulation_id;
    long wall_time_ms = 0;
};

namespace detail {

inline SweepRecord sweep_one(const Polytope& P, const std::vector<PerturbCut>& extra,
                             const Weight& v, const Weight& w, const Rational& eps,
                             const RunConfig& cfg) {
    SweepRecord rec;
    rec.eps = eps;
    auto start = std::chrono::steady_clock::now();
    try {
        Polytope Pe = perturb(P, extra, eps);
        StabilityConfig sc;
        sc.refine = cfg.refine;
        sc.trend = cfg.trend;
        if (cfg.y0) sc.y0 = cfg.y0;
        CheckResult res = check_stability(Pe, v, w, sc);
        rec.ok = true;
        rec.ell_coeffs.push_back(res.extremal.ell.constant);
        for (const auto& g : res.extremal.ell.gradient) rec.ell_coeffs.push_back(g);
        rec.c_value = res.c_pair;
        rec.delta = res.report.delta;
        rec.delta_exact = res.report.delta_exact;
        rec.lp_status = res.report.lp_status;
        rec.triangulation_id = res.report.triangulation_id;
    } catch (const Error& e) {
        rec.error = e.what();
    }
    rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    return rec;
}

}  // namespace detail

/// Runs the perturbation sweep over eps_list. The eps = 0 entry is solved
/// first as the base stability gate (delta(0) > 0 unless forced); remaining
/// entries may execute on a small worker pool, results merged in eps order.
inline std::vector<SweepRecord> run_sweep(const Polytope& P,
                                          const std::vector<PerturbCut>& extra,
                                          const Weight& v, const Weight& w,
                                          const RunConfig& cfg) {
    std::vector<Rational> eps = cfg.eps_list;
    eps.push_back(Rational(0));
    std::sort(eps.begin(), eps.end());
    eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
    if (eps.front() < 0) throw InvalidArgument("eps values must be nonnegative");

    std::vector<SweepRecord> records(eps.size());
    records[0] = detail::sweep_one(P, extra, v, w, eps[0], cfg);
    if (!cfg.force && (!records[0].ok || records[0].delta <= 0))
        throw InvalidArgument(
            "base polytope fails the stability gate (delta(0) <= 0); use --force to sweep anyway");

    const int workers = std::max(1, cfg.workers);
    std::atomic<std::size_t> next{1};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= eps.size()) break;
            records[i] = detail::sweep_one(P, extra, v, w, eps[i], cfg);
        }
    };
    if (workers == 1 || eps.size() <= 2) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return records;
}

inline json sweep_record_to_json(const SweepRecord& r) {
    json j;
    j["eps"] = rational_to_json(r.eps);
    j["ok"] = r.ok;
    if (!r.ok) j["error"] = r.error;
    j["ell_coeffs"] = json::array();
    for (const auto& c : r.ell_coeffs) j["ell_coeffs"].push_back(rational_to_json(c));
    if (r.ok) {
        j["c"] = value_to_json(r.c_value);
        j["delta"] = r.delta;
        if (r.delta_exact) j["delta_exact"] = rational_to_json(*r.delta_exact);
        j["lp_status"] = lp_status_name(r.lp_status);
        j["triangulation_id"] = r.triangulation_id;
    }
    j["wall_time_ms"] = r.wall_time_ms;
    return j;
}

inline SweepRecord sweep_record_from_json(const json& j) {
    SweepRecord r;
    r.eps = rational_from_json(j.at("eps"));
    r.ok = j.at("ok").get<bool>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    for (const auto& c : j.at("ell_coeffs")) r.ell_coeffs.push_back(rational_from_json(c));
    if (r.ok) {
        if (j.at("c").is_string())
            r.c_value = Value(parse_rational(j.at("c").get<std::string>()));
        else
            r.c_value = Value(j.at("c").get<double>());
        r.delta = j.at("delta").get<double>();
        if (j.contains("delta_exact"))
            r.delta_exact = rational_from_json(j.at("delta_exact"));
        std::string st = j.at("lp_status").get<std::string>();
        r.lp_status = st == "optimal" ? LPStatus::Optimal
                      : st == "unbounded" ? LPStatus::Unbounded
                                          : LPStatus::Infeasible;
        r.triangulation_id = j.at("triangulation_id").get<std::string>();
    }
    r.wall_time_ms = j.value("wall_time_ms", 0L);
    return r;
}

/// Canonical JSON document for a sweep. Wall times are serialized but live
/// outside the determinism hash.
inline json sweep_to_json(const std::vector<SweepRecord>& records) {
    json j;
    j["records"] = json::array();
    for (const auto& r : records) j["records"].push_back(sweep_record_to_json(r));
    std::size_t best = records.size();
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].ok && records[i].delta > 0) best = i;
    if (best < records.size())
        j["largest_stable_eps"] = rational_to_json(records[best].eps);
    j["note"] =
        "largest_stable_eps is an empirical lower bound for the openness threshold: "
        "evidence only, not a certificate";
    return j;
}

inline std::string determinism_hash(const std::vector<SweepRecord>& records) {
    json j = sweep_to_json(records);
    for (auto& r : j["records"]) r.erase("wall_time_ms");
    return detail::fnv1a_hex(j.dump());
}

/// CSV with fixed column order: eps, delta, c, b0..bn, status, ms.
inline std::string report_csv(const std::vector<SweepRecord>& records) {
    std::size_t ncoef = 0;
    for (const auto& r : records) ncoef = std::max(ncoef, r.ell_coeffs.size());
    std::ostringstream out;
    out << "eps,delta,c";
    for (std::size_t i = 0; i < ncoef; ++i) out << ",b" << i;
    out << ",status,ms\n";
    for (const auto& r : records) {
        out << rational_to_string(r.eps) << ',';
        if (r.ok)
            out << detail::format_double(r.delta) << ',' << r.c_value.str();
        else
            out << ',';
        for (std::size_t i = 0; i < ncoef; ++i) {
            out << ',';
            if (i < r.ell_coeffs.size()) out << rational_to_string(r.ell_coeffs[i]);
        }
        out << ',' << (r.ok ? lp_status_name(r.lp_status) : "error") << ',' << r.wall_time_ms
            << '\n';
    }
    return out.str();
}

inline std::string report_markdown(const std::vector<SweepRecord>& records) {
    std::ostringstream out;
    out << "# Perturbation sweep\n\n";
    out << "Boundary measure convention: on a facet with primitive integral normal u, "
           "dsigma is Euclidean (n-1)-measure divided by |u| (lattice covolume one).\n\n";
    out << "Stability evidence is one-sided: a negative delta certifies a destabilizer; "
           "a positive delta only bounds the functional on the subcone of PL functions "
           "subordinate to the listed triangulation.\n\n";
    out << "| eps | delta | c | status | triangulation | ms |\n";
    out << "|-----|-------|---|--------|---------------|----|\n";
    for (const auto& r : records) {
        out << "| " << rational_to_string(r.eps) << " | ";
        if (r.ok)
            out << detail::format_double(r.delta) << " | " << r.c_value.str() << " | "
                << lp_status_name(r.lp_status) << " | " << r.triangulation_id;
        else
            out << " | | error: " << r.error << " |";
        out << " | " << r.wall_time_ms << " |\n";
    }
    return out.str();
}

inline std::string report(const std::vector<SweepRecord>& records, const std::string& format) {
    if (format == "json") return sweep_to_json(records).dump(2) + "\n";
    if (format == "csv") return report_csv(records);
    if (format == "md") return report_markdown(records);
    throw InvalidArgument("unknown report format '" + format + "'");
}

/// Persists the three report flavors under content-hash filenames; returns
/// the hash stem.
inline std::string persist_sweep(const std::vector<SweepRecord>& records,
                                 const std::string& output_dir) {
    std::string hash = determinism_hash(records);
    std::filesystem::create_directories(output_dir);
    std::string stem = output_dir + "/sweep-" + hash;
    for (const char* fmt : {"json", "csv", "md"}) {
        std::ofstream out(stem + "." + fmt);
        out << report(records, fmt);
    }
    return hash;
}

// --- Input validation -----------------------------------------------------------

struct Diagnostic {
    int severity = 0;  // 0 info, 1 warning, 2 error
    std::string code;
    std::string message;
};

inline int max_severity(const std::vector<Diagnostic>& ds) {
    int s = 0;
    for (const auto& d : ds) s = std::max(s, d.severity);
    return s;
}

/// Structural checks over parsed inputs: polytope consistency, weight
/// positivity sampling, triangulation integrity. Diagnostics, not exceptions.
inline std::vector<Diagnostic> validate_inputs(const json& polytope_json,
                                               const json& v_json, const json& w_json,
                                               int refine) {
    std::vector<Diagnostic> out;
    std::optional<Polytope> P;
    try {
        bool warn = false;
        P = polytope_from_json(polytope_json, &warn);
        if (warn)
            out.push_back({1, "normal-not-primitive",
                           "a halfspace normal was not primitive; divided by its gcd"});
        auto dz = delzant_check(*P);
        out.push_back({0, "delzant",
                       dz.delzant ? "polytope is Delzant (all vertices smooth)"
                                  : "polytope is not Delzant (reported only, never required)"});
    } catch (const Error& e) {
        out.push_back({2, "polytope", e.what()});
        return out;
    }

    auto check_weight = [&](const json& wj, const std::string& label) -> std::optional<Weight> {
        try {
            Weight w = weight_from_json(wj);
            int wd = weight_is_polynomial(w)
                         ? static_cast<int>(weight_polynomial(w).dim())
                         : P->dim();
            if (wd != P->dim()) {
                out.push_back({2, label, label + " dimension does not match the polytope"});
                return std::nullopt;
            }
            for (std::size_t i = 0; i < P->vertices().size(); ++i) {
                if (weight_eval_double(w, P->vertices()[i]) <= 0) {
                    std::ostringstream msg;
                    msg << label << " is not positive at vertex " << i << " = (";
                    for (std::size_t d = 0; d < P->vertices()[i].size(); ++d)
                        msg << (d ? "," : "") << rational_to_string(P->vertices()[i][d]);
                    msg << ")";
                    out.push_back({2, label + "-positivity", msg.str()});
                    return std::nullopt;
                }
            }
            return w;
        } catch (const Error& e) {
            out.push_back({2, label, e.what()});
            return std::nullopt;
        }
    };
    check_weight(v_json, "weight v");
    check_weight(w_json, "weight w");

    try {
        Triangulation T = triangulate(std::make_shared<Polytope>(*P), refine);
        if (T.total_volume() != detail::polytope_volume(*P))
            out.push_back({2, "triangulation", "triangulation volume mismatch"});
        else
            out.push_back({0, "triangulation",
                           "triangulation " + T.id() + " has " +
                               std::to_string(T.simplices().size()) + " simplices"});
    } catch (const Error& e) {
        out.push_back({2, "triangulation", e.what()});
    }
    return out;
}

inline json diagnostics_to_json(const std::vector<Diagnostic>& ds) {
    json j = json::array();
    for (const auto& d : ds)
        j.push_back({{"severity", d.severity}, {"code", d.code}, {"message", d.message}});
    return j;
}

}  // namespace wkstab
