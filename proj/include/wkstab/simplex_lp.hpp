#pragma once

#include <vector>

#include "wkstab/rational.hpp"

namespace wkstab {

enum class LPStatus { Optimal, Infeasible, Unbounded };

enum class Relation { LessEq, Equal, GreaterEq };

struct LinearConstraint {
    std::vector<Rational> coeffs;
    Relation rel = Relation::GreaterEq;
    Rational rhs;
};

struct LPProblem {
    std::vector<Rational> objective;  // minimize <objective, x>
    std::vector<LinearConstraint> constraints;
    std::vector<bool> nonneg;  // per-variable sign restriction; empty = all free
};

struct LPResult {
    LPStatus status = LPStatus::Infeasible;
    std::vector<Rational> point;
    Rational value;
    long pivots = 0;
};

/// Dense two-phase simplex over exact rationals with Bland's anti-cycling
/// rule, so the solve terminates and is fully deterministic. Free variables
/// are split into positive and negative parts internally.
inline LPResult lp_solve(const LPProblem& prob) {
    const int nvars = static_cast<int>(prob.objective.size());
    std::vector<bool> nonneg = prob.nonneg;
    nonneg.resize(nvars, false);
    for (const auto& c : prob.constraints)
        if (static_cast<int>(c.coeffs.size()) != nvars)
            throw InvalidArgument("constraint dimension mismatch");

    // Column layout: for each variable one column (nonneg) or a +/- pair
    // (free), then one slack per inequality, then one artificial per row.
    std::vector<int> var_pos(nvars), var_neg(nvars, -1);
    int ncols = 0;
    for (int j = 0; j < nvars; ++j) {
        var_pos[j] = ncols++;
        if (!nonneg[j]) var_neg[j] = ncols++;
    }
    const int structural = ncols;
    const int m = static_cast<int>(prob.constraints.size());
    int nslack = 0;
    for (const auto& c : prob.constraints)
        if (c.rel != Relation::Equal) ++nslack;
    const int total = structural + nslack + m;  // artificials last

    std::vector<std::vector<Rational>> T(m + 1, std::vector<Rational>(total + 1, Rational(0)));
    std::vector<int> basis(m);

    int slack_at = structural;
    for (int r = 0; r < m; ++r) {
        const auto& c = prob.constraints[r];
        for (int j = 0; j < nvars; ++j) {
            T[r][var_pos[j]] = c.coeffs[j];
            if (var_neg[j] >= 0) T[r][var_neg[j]] = -c.coeffs[j];
        }
        T[r][total] = c.rhs;
        if (c.rel == Relation::LessEq) T[r][slack_at++] = 1;
        else if (c.rel == Relation::GreaterEq) T[r][slack_at++] = -1;
        if (T[r][total] < 0)
            for (int j = 0; j <= total; ++j) T[r][j] = -T[r][j];
        int art = structural + nslack + r;
        T[r][art] = 1;
        basis[r] = art;
    }

    long pivots = 0;
    auto pivot = [&](int row, int col) {
        Rational p = T[row][col];
        for (int j = 0; j <= total; ++j) T[row][j] /= p;
        for (int r = 0; r <= m; ++r) {
            if (r == row || T[r][col] == 0) continue;
            Rational f = T[r][col];
            for (int j = 0; j <= total; ++j) T[r][j] -= f * T[row][j];
        }
        basis[row] = col;
        ++pivots;
    };

    auto run_simplex = [&](int col_limit) -> bool {
        // Bland: entering = lowest-index negative reduced cost; leaving = min
        // ratio, ties by lowest basic index. Returns false on unbounded.
        while (true) {
            if (pivots > 2000000) throw Error("internal: simplex iteration limit");
            int enter = -1;
            for (int j = 0; j < col_limit; ++j)
                if (T[m][j] < 0) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            int leave = -1;
            Rational best;
            for (int r = 0; r < m; ++r) {
                if (T[r][enter] <= 0) continue;
                Rational ratio = T[r][total] / T[r][enter];
                if (leave < 0 || ratio < best ||
                    (ratio == best && basis[r] < basis[leave])) {
                    leave = r;
                    best = ratio;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    };

    // Phase 1: minimize the artificial sum.
    for (int j = 0; j <= total; ++j) {
        Rational s = 0;
        for (int r = 0; r < m; ++r) s += T[r][j];
        T[m][j] = (j >= structural + nslack && j < total) ? Rational(1) - s : -s;
    }
    run_simplex(total);
    Rational phase1 = -T[m][total];
    if (phase1 != 0) return {LPStatus::Infeasible, {}, Rational(0), pivots};

    // Drive leftover artificials out of the basis; rows with no eligible
    // pivot are redundant and stay parked at zero.
    for (int r = 0; r < m; ++r) {
        if (basis[r] < structural + nslack) continue;
        for (int j = 0; j < structural + nslack; ++j)
            if (T[r][j] != 0) {
                pivot(r, j);
                break;
            }
    }

    // Phase 2 objective row (artificial columns are never re-entered).
    std::vector<Rational> cost(total, Rational(0));
    for (int j = 0; j < nvars; ++j) {
        cost[var_pos[j]] = prob.objective[j];
        if (var_neg[j] >= 0) cost[var_neg[j]] = -prob.objective[j];
    }
    for (int j = 0; j <= total; ++j) {
        Rational s = (j < total) ? cost[j] : Rational(0);
        for (int r = 0; r < m; ++r)
            if (cost[basis[r]] != 0) s -= cost[basis[r]] * T[r][j];
        T[m][j] = s;
    }

    if (!run_simplex(structural + nslack))
        return {LPStatus::Unbounded, {}, Rational(0), pivots};

    std::vector<Rational> cols(total, Rational(0));
    for (int r = 0; r < m; ++r) cols[basis[r]] = T[r][total];
    std::vector<Rational> x(nvars);
    for (int j = 0; j < nvars; ++j) {
        x[j] = cols[var_pos[j]];
        if (var_neg[j] >= 0) x[j] -= cols[var_neg[j]];
    }
    Rational value = 0;
    for (int j = 0; j < nvars; ++j) value += prob.objective[j] * x[j];
    return {LPStatus::Optimal, std::move(x), value, pivots};
}

inline LPResult lp_solve(const std::vector<Rational>& objective,
                         const std::vector<LinearConstraint>& constraints) {
    LPProblem p;
    p.objective = objective;
    p.constraints = constraints;
    return lp_solve(p);
}

}  // namespace wkstab
