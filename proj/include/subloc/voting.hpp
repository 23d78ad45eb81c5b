#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "subloc/pipeline.hpp"

namespace subloc {

struct Partition {
    double delta = 0.0;
    std::vector<std::vector<int>> blocks;  // sorted within each block
};

// Seeded uniform partition of [0, n) into 1/delta blocks. 1/delta must be
// an integer in [2, n]. Indices are shuffled once and cut into contiguous
// chunks; the remainder spreads one extra element per block from the
// front, so sizes never differ by more than one.
inline Partition partition(int n, double delta, std::uint64_t seed) {
    if (n < 2) throw Error("partition: need n >= 2");
    if (!(delta > 0.0) || !(delta < 1.0)) throw Error("partition: delta outside (0,1)");
    double inv = 1.0 / delta;
    auto m = static_cast<long long>(std::llround(inv));
    if (std::abs(inv - static_cast<double>(m)) > 1e-9 || m < 2 || m > n) {
        throw Error("partition: 1/delta must be an integer in [2, n]");
    }
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
        auto j = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
        std::swap(order[i], order[j]);
    }
    Partition p;
    p.delta = delta;
    const int base = n / static_cast<int>(m);
    const int rem = n % static_cast<int>(m);
    int at = 0;
    for (int k = 0; k < m; ++k) {
        int len = base + (k < rem ? 1 : 0);
        std::vector<int> blk(order.begin() + at, order.begin() + at + len);
        std::sort(blk.begin(), blk.end());
        p.blocks.push_back(std::move(blk));
        at += len;
    }
    return p;
}

// Vote totals for one held-out block: r_i = sum over the block-k estimate
// of A(i, j), for each i in the block. Works on anything indexable as
// A(i, j) so tests can substitute an access-recording probe. The estimate
// must be disjoint from the held-out block; votes must never touch the
// held-out columns.
template <class Mat>
std::vector<double> block_votes(const Mat& A, const std::vector<int>& c_hat_k,
                                const std::vector<int>& s_k) {
    std::unordered_set<int> held(s_k.begin(), s_k.end());
    for (int j : c_hat_k) {
        if (held.count(j)) throw Error("block_votes: estimate overlaps the held-out block");
    }
    std::vector<double> r(s_k.size(), 0.0);
    for (std::size_t a = 0; a < s_k.size(); ++a) {
        double s = 0.0;
        for (int j : c_hat_k) s += A(s_k[a], j);
        r[a] = s;
    }
    return r;
}

// Indices of the K largest scores, ties to the smaller index, returned
// sorted ascending.
inline std::vector<int> select_top_k(const std::vector<double>& scores, int K) {
    if (K < 0 || K > static_cast<int>(scores.size())) throw Error("select_top_k: bad K");
    std::vector<int> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    std::vector<int> out(order.begin(), order.begin() + K);
    std::sort(out.begin(), out.end());
    return out;
}

// Exact-recovery margin of the voting stage: the vote separation scales
// like K mu (1 - 2 delta) against the extreme-value widths of the two
// Gaussian vote populations plus a cross-term delta sqrt(K).
inline double vote_separation(int n, int K, double mu, double delta) {
    double kd = static_cast<double>(K);
    double denom = std::sqrt(2.0 * kd * std::log(kd)) +
                   std::sqrt(2.0 * kd * std::log(static_cast<double>(n - K))) +
                   delta * std::sqrt(kd);
    return kd * mu * (1.0 - 2.0 * delta) / denom;
}

// Largest delta in {1/2, ..., 1/40} keeping every per-block run
// supercritical (lambda e (1 - delta) > 1) and, unless weak_mode, the
// vote separation above 1. Throws NoFeasibleDelta when the grid is
// exhausted.
inline double choose_delta(int n, int K, double mu, double lambda, bool weak_mode = false) {
    if (K < 1 || K >= n) throw Error("choose_delta: need 1 <= K < n");
    if (!(mu > 0.0) && !weak_mode) throw Error("choose_delta: mu must be positive");
    for (int m = 2; m <= 40; ++m) {
        double delta = 1.0 / static_cast<double>(m);
        if (!(lambda * std::exp(1.0) * (1.0 - delta) > 1.0)) continue;
        if (!weak_mode && !(vote_separation(n, K, mu, delta) > 1.0)) continue;
        return delta;
    }
    throw NoFeasibleDelta("choose_delta: no grid value satisfies the margins");
}

struct VotingResult {
    std::vector<int> c_check;
    ErrorReport report;
    double delta = 0.0;
    double vote_margin = 0.0;  // min vote on the planted set minus max off it
    std::vector<double> block_hat_fractions;
};

// Data-splitting exact recovery: hold out each block in turn, rerun the
// full pipeline on the complement, and score the held-out rows against
// that run's estimate. Every index is held out exactly once, so each vote
// uses an estimate independent of its own row.
inline VotingResult run_alg2(const PlantedInstance& inst, double delta,
                             const PipelineOptions& opt, std::uint64_t seed) {
    if (inst.lambda() <= kInvE && opt.d == 0 && !opt.allow_subcritical) {
        throw SubcriticalLambda("run_alg2: per-block schedules need lambda > 1/e");
    }
    Eigen::MatrixXd A = scale(inst.W, inst.n);
    Partition part = partition(inst.n, delta, mix_seed(seed, 0));

    VotingResult res;
    res.delta = delta;
    std::vector<double> votes(inst.n, 0.0);
    std::vector<char> planted(inst.n, 0);
    for (int i : inst.support) planted[i] = 1;

    const int k_sub = static_cast<int>(std::ceil(inst.K * (1.0 - delta)));
    for (std::size_t k = 0; k < part.blocks.size(); ++k) {
        const std::vector<int>& held = part.blocks[k];
        std::vector<char> in_block(inst.n, 0);
        for (int i : held) in_block[i] = 1;
        std::vector<int> keep;
        for (int i = 0; i < inst.n; ++i) {
            if (!in_block[i]) keep.push_back(i);
        }

        PlantedInstance sub;
        sub.n = static_cast<int>(keep.size());
        sub.K = k_sub;
        sub.mu = inst.mu;
        sub.seed = inst.seed;
        sub.noiseless = inst.noiseless;
        sub.W.resize(sub.n, sub.n);
        for (int a = 0; a < sub.n; ++a) {
            for (int b = 0; b < sub.n; ++b) sub.W(a, b) = inst.W(keep[a], keep[b]);
        }
        for (int a = 0; a < sub.n; ++a) {
            if (planted[keep[a]]) sub.support.push_back(a);
        }

        RecoveryResult rr = run_alg1(sub, opt, mix_seed(seed, k + 1));
        res.block_hat_fractions.push_back(rr.hat_report.fraction);

        std::vector<int> est_global;
        for (int a : rr.c_hat) est_global.push_back(keep[a]);
        std::sort(est_global.begin(), est_global.end());

        std::vector<double> r = block_votes(A, est_global, held);
        for (std::size_t a = 0; a < held.size(); ++a) votes[held[a]] = r[a];
    }

    res.c_check = select_top_k(votes, inst.K);
    res.report = error_report(res.c_check, inst.support, inst.K);

    double lo_in = std::numeric_limits<double>::infinity();
    double hi_out = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < inst.n; ++i) {
        if (planted[i]) {
            lo_in = std::min(lo_in, votes[i]);
        } else {
            hi_out = std::max(hi_out, votes[i]);
        }
    }
    res.vote_margin = lo_in - hi_out;
    return res;
}

}  // namespace subloc
