#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "subloc/cleanup.hpp"
#include "subloc/model.hpp"
#include "subloc/mp.hpp"
#include "subloc/schedule.hpp"
#include "subloc/voting.hpp"

namespace subloc {

// Planning constants for a two-sided run, derived once per (instance,
// epsilon): degree from the alternating transition, stopping index from
// the predicted trace, step-count constant from the rectangular cleanup
// bound (with a fixed fallback when that bound's regime check fails).
struct Alg3Plan {
    int d = 1;
    int t_star = 2;
    double s_star = 4.0;
};

inline Alg3Plan plan_alg3(const BiclusterInstance& inst, double eps = 1e-4) {
    Alg3Plan plan;
    plan.d = d_star_bicluster(inst.lambda1(), inst.lambda2());
    double M = 8.0 * std::log(1.0 / eps);
    NonlinearitySchedule sched =
        build_schedule_bicluster(inst.lambda1(), inst.lambda2(), plan.d, M);
    plan.t_star = sched.t_star;
    try {
        plan.s_star = s_star_bicluster(
            eps, c0_bicluster(inst.n1, inst.n2, inst.K1, inst.K2, inst.mu));
    } catch (const InvalidRegime&) {
        plan.s_star = 4.0;
    }
    return plan;
}

struct Alg3Result {
    std::vector<int> c1_tilde, c2_tilde;
    std::vector<int> c1_hat, c2_hat;
    ErrorReport report1, report2;
    Eigen::VectorXd row_beliefs, col_beliefs;
    int d = 0;
    int t_star = 0;
};

namespace detail {

inline std::vector<int> top_k_beliefs(const Eigen::VectorXd& beliefs, int K) {
    std::vector<int> all(beliefs.size());
    std::vector<double> score(beliefs.size());
    for (int i = 0; i < static_cast<int>(beliefs.size()); ++i) {
        all[i] = i;
        score[i] = beliefs(i);
    }
    return top_by_score(all, score, K, {}, beliefs);
}

}  // namespace detail

// Two-sided recovery with explicit constants: alternating message passing
// for t_star rounds, belief thresholds at half the predicted means on each
// side, then the rectangular power cleanup. Requires the pair (lambda1,
// lambda2) inside the degree-d feasible region; t_star must be even so the
// final full round lands on row beliefs. As in the square pipeline, an
// empty threshold set on either side downgrades cleanup to plain top-K
// belief ranking on both sides.
inline Alg3Result run_alg3(const BiclusterInstance& inst, int d, int t_star, double s_star,
                           std::uint64_t seed) {
    if (t_star < 2 || t_star % 2 != 0) throw Error("run_alg3: t_star must be even and >= 2");
    if (!in_region_Gd(inst.lambda1(), inst.lambda2(), d)) {
        throw OutsideG("run_alg3: (lambda1, lambda2) outside the degree-" + std::to_string(d) +
                       " feasible region");
    }
    NonlinearitySchedule sched =
        build_schedule_bicluster_horizon(inst.lambda1(), inst.lambda2(), d, t_star);

    Alg3Result res;
    res.d = d;
    res.t_star = t_star;
    BiclusterBeliefs bel = run_mp_bicluster(inst.W, sched);
    res.row_beliefs = bel.rows;
    res.col_beliefs = bel.cols;

    res.c1_tilde = threshold_beliefs(bel.rows, sched.mu_hat.at(t_star));
    res.c2_tilde = threshold_beliefs(bel.cols, sched.mu_hat.at(t_star + 1));

    if (res.c1_tilde.empty() || res.c2_tilde.empty()) {
        res.c1_hat = detail::top_k_beliefs(bel.rows, inst.K1);
        res.c2_hat = detail::top_k_beliefs(bel.cols, inst.K2);
    } else {
        auto cleaned = power_cleanup_bicluster(inst.W, res.c1_tilde, res.c2_tilde, inst.K1,
                                               inst.K2, s_star, seed, bel.rows, bel.cols);
        res.c1_hat = std::move(cleaned.first);
        res.c2_hat = std::move(cleaned.second);
    }
    res.report1 = error_report(res.c1_hat, inst.row_support, inst.K1);
    res.report2 = error_report(res.c2_hat, inst.col_support, inst.K2);
    return res;
}

// Vote totals against a fixed column set: r_a = sum over col_set of
// W(rows[a], j). No disjointness constraint applies across axes. For the
// column side, pass W.transpose() with roles swapped.
template <class Mat>
std::vector<double> bicluster_votes(const Mat& W, const std::vector<int>& col_set,
                                    const std::vector<int>& rows) {
    std::vector<double> r(rows.size(), 0.0);
    for (std::size_t a = 0; a < rows.size(); ++a) {
        double s = 0.0;
        for (int j : col_set) s += W(rows[a], j);
        r[a] = s;
    }
    return r;
}

// Largest grid delta keeping both shrunken pairs (lambda1(1-delta),
// lambda2) and (lambda1, lambda2(1-delta)) feasible for some degree.
inline double choose_delta_bicluster(const BiclusterInstance& inst) {
    for (int m = 2; m <= 40; ++m) {
        double delta = 1.0 / static_cast<double>(m);
        try {
            d_star_bicluster(inst.lambda1() * (1.0 - delta), inst.lambda2());
            d_star_bicluster(inst.lambda1(), inst.lambda2() * (1.0 - delta));
            return delta;
        } catch (const OutsideG&) {
            continue;
        }
    }
    throw NoFeasibleDelta("choose_delta_bicluster: shrunken pair leaves the feasible region");
}

struct BiclusterVotingResult {
    std::vector<int> c1_check, c2_check;
    ErrorReport report1, report2;
    double delta = 0.0;
    double row_margin = 0.0;
    double col_margin = 0.0;
};

namespace detail {

inline double margin_of(const std::vector<double>& votes, const std::vector<int>& support) {
    std::vector<char> in(votes.size(), 0);
    for (int i : support) in[i] = 1;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < votes.size(); ++i) {
        if (in[i]) {
            lo = std::min(lo, votes[i]);
        } else {
            hi = std::max(hi, votes[i]);
        }
    }
    return lo - hi;
}

}  // namespace detail

// Data-splitting exact recovery for the rectangular model. Rows are split
// into 1/delta blocks; each block is withheld, the pipeline reruns on the
// surviving rows, and the withheld rows are scored against that run's
// column estimate. The column side mirrors this with row estimates. Each
// side therefore costs 1/delta full pipeline runs.
inline BiclusterVotingResult run_bicluster_voting(const BiclusterInstance& inst, double delta,
                                                  double eps, std::uint64_t seed) {
    BiclusterVotingResult res;
    res.delta = delta;

    auto run_side = [&](bool row_side) {
        const int n_held = row_side ? inst.n1 : inst.n2;
        const int k_held = row_side ? inst.K1 : inst.K2;
        std::uint64_t side_seed = mix_seed(seed, row_side ? 0 : 1);
        Partition part = partition(n_held, delta, side_seed);
        const std::vector<int>& held_support = row_side ? inst.row_support : inst.col_support;
        std::vector<char> planted(n_held, 0);
        for (int i : held_support) planted[i] = 1;

        std::vector<double> votes(n_held, 0.0);
        for (std::size_t k = 0; k < part.blocks.size(); ++k) {
            const std::vector<int>& held = part.blocks[k];
            std::vector<char> in_block(n_held, 0);
            for (int i : held) in_block[i] = 1;
            std::vector<int> keep;
            for (int i = 0; i < n_held; ++i) {
                if (!in_block[i]) keep.push_back(i);
            }

            BiclusterInstance sub;
            sub.mu = inst.mu;
            sub.seed = inst.seed;
            sub.noiseless = inst.noiseless;
            if (row_side) {
                sub.n1 = static_cast<int>(keep.size());
                sub.n2 = inst.n2;
                sub.K1 = static_cast<int>(std::ceil(inst.K1 * (1.0 - delta)));
                sub.K2 = inst.K2;
                sub.W.resize(sub.n1, sub.n2);
                for (int a = 0; a < sub.n1; ++a) sub.W.row(a) = inst.W.row(keep[a]);
                for (int a = 0; a < sub.n1; ++a) {
                    if (planted[keep[a]]) sub.row_support.push_back(a);
                }
                sub.col_support = inst.col_support;
            } else {
                sub.n1 = inst.n1;
                sub.n2 = static_cast<int>(keep.size());
                sub.K1 = inst.K1;
                sub.K2 = static_cast<int>(std::ceil(inst.K2 * (1.0 - delta)));
                sub.W.resize(sub.n1, sub.n2);
                for (int a = 0; a < sub.n2; ++a) sub.W.col(a) = inst.W.col(keep[a]);
                sub.row_support = inst.row_support;
                for (int a = 0; a < sub.n2; ++a) {
                    if (planted[keep[a]]) sub.col_support.push_back(a);
                }
            }

            Alg3Plan plan = plan_alg3(sub, eps);
            Alg3Result sub_res =
                run_alg3(sub, plan.d, plan.t_star, plan.s_star, mix_seed(side_seed, k + 1));

            std::vector<double> r;
            if (row_side) {
                r = bicluster_votes(inst.W, sub_res.c2_hat, held);
            } else {
                // Row estimate indices refer to kept rows = all rows here.
                r = bicluster_votes(inst.W.transpose(), sub_res.c1_hat, held);
            }
            for (std::size_t a = 0; a < held.size(); ++a) votes[held[a]] = r[a];
        }

        std::vector<int> chosen = select_top_k(votes, k_held);
        double margin = detail::margin_of(votes, held_support);
        if (row_side) {
            res.c1_check = chosen;
            res.report1 = error_report(res.c1_check, inst.row_support, inst.K1);
            res.row_margin = margin;
        } else {
            res.c2_check = chosen;
            res.report2 = error_report(res.c2_check, inst.col_support, inst.K2);
            res.col_margin = margin;
        }
    };

    run_side(true);
    run_side(false);
    return res;
}

}  // namespace subloc
