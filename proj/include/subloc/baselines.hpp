#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "subloc/errors.hpp"
#include "subloc/model.hpp"

namespace subloc {

// Gaussian upper tail Q(x) = P(N(0,1) > x).
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

inline double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Bayes-optimal threshold for deciding N(s,1) (prior pi1) against N(0,1):
// the likelihood-ratio cutoff sits at s/2 + log((1-pi1)/pi1)/s.
inline double gamma_star(double pi1, double s) {
    if (!(pi1 > 0.0) || !(pi1 < 1.0)) throw Error("gamma_star: pi1 outside (0,1)");
    if (!(s > 0.0)) throw Error("gamma_star: s must be positive");
    return 0.5 * s + std::log((1.0 - pi1) / pi1) / s;
}

// Minimal average error probability for that test; at separation zero the
// best rule votes with the prior.
inline double p_e(double pi1, double s2) {
    if (!(pi1 > 0.0) || !(pi1 < 1.0)) throw Error("p_e: pi1 outside (0,1)");
    if (s2 < 0.0) throw Error("p_e: squared separation must be nonnegative");
    if (s2 == 0.0) return std::min(pi1, 1.0 - pi1);
    double s = std::sqrt(s2);
    double g = gamma_star(pi1, s);
    return (1.0 - pi1) * q_function(g) + pi1 * q_function(s - g);
}

// Sum-thresholding baselines support two cutoffs: the midpoint of the two
// conditional means, and the prior-aware Bayes cutoff.
enum class ThresholdRule { midpoint, bayes };

struct RowsumResult {
    std::vector<int> estimate;  // sorted; size is data-dependent, not forced to K
    double threshold = 0.0;
    std::vector<double> sums;
};

// Classifies index i by its full row sum of W (diagonal included), which
// is N(K mu, n) on the planted set and N(0, n) off it.
inline RowsumResult rowsum_threshold(const PlantedInstance& inst, ThresholdRule rule) {
    RowsumResult res;
    res.sums.resize(inst.n);
    for (int i = 0; i < inst.n; ++i) res.sums[i] = inst.W.row(i).sum();
    if (rule == ThresholdRule::midpoint) {
        res.threshold = 0.5 * inst.K * inst.mu;
    } else {
        double s = inst.K * inst.mu / std::sqrt(static_cast<double>(inst.n));
        res.threshold = std::sqrt(static_cast<double>(inst.n)) *
                        gamma_star(static_cast<double>(inst.K) / inst.n, s);
    }
    for (int i = 0; i < inst.n; ++i) {
        if (res.sums[i] >= res.threshold) res.estimate.push_back(i);
    }
    return res;
}

// Expected misclassification count of the rowsum rule (both error types
// summed), exact for the generated model.
inline double expected_rowsum_error(int n, int K, double mu, ThresholdRule rule) {
    double s = K * mu / std::sqrt(static_cast<double>(n));
    if (rule == ThresholdRule::midpoint) return n * q_function(0.5 * s);
    return n * p_e(static_cast<double>(K) / n, s * s);
}

struct ColsumResult {
    std::vector<int> rows, cols;
    double row_threshold = 0.0, col_threshold = 0.0;
};

// Line-sum thresholding for the rectangular model: rows score by their
// sum over all n2 columns (signal K2 mu), columns by their sum over all
// n1 rows (signal K1 mu).
inline ColsumResult colsum_threshold_bicluster(const BiclusterInstance& inst,
                                               ThresholdRule rule) {
    ColsumResult res;
    if (rule == ThresholdRule::midpoint) {
        res.row_threshold = 0.5 * inst.K2 * inst.mu;
        res.col_threshold = 0.5 * inst.K1 * inst.mu;
    } else {
        double s_row = inst.K2 * inst.mu / std::sqrt(static_cast<double>(inst.n2));
        double s_col = inst.K1 * inst.mu / std::sqrt(static_cast<double>(inst.n1));
        res.row_threshold = std::sqrt(static_cast<double>(inst.n2)) *
                            gamma_star(static_cast<double>(inst.K1) / inst.n1, s_row);
        res.col_threshold = std::sqrt(static_cast<double>(inst.n1)) *
                            gamma_star(static_cast<double>(inst.K2) / inst.n2, s_col);
    }
    for (int i = 0; i < inst.n1; ++i) {
        if (inst.W.row(i).sum() >= res.row_threshold) res.rows.push_back(i);
    }
    for (int j = 0; j < inst.n2; ++j) {
        if (inst.W.col(j).sum() >= res.col_threshold) res.cols.push_back(j);
    }
    return res;
}

inline double expected_colsum_col_error(int n1, int n2, int K1, int K2, double mu) {
    double s2 = static_cast<double>(K1) * K1 * mu * mu / n1;
    return n2 * p_e(static_cast<double>(K2) / n2, s2);
}

namespace detail {

inline double choose_count(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c *= static_cast<double>(n - k + i) / i;
        if (c > 1e18) return c;  // far beyond any guard, stop growing
    }
    return c;
}

// Lexicographic successor of a K-subset of [0, n); returns false past the
// last one.
inline bool next_subset(std::vector<int>& idx, int n) {
    int k = static_cast<int>(idx.size());
    for (int pos = k - 1; pos >= 0; --pos) {
        if (idx[pos] < n - k + pos) {
            ++idx[pos];
            for (int q = pos + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
            return true;
        }
    }
    return false;
}

}  // namespace detail

struct MleResult {
    std::vector<int> support;
    double score = 0.0;
};

// Exhaustive maximum-likelihood search for the principal submatrix: the
// score of a candidate C is the sum of W over unordered pairs from C,
// diagonal included, since every such entry carries the mean shift. Ties
// resolve to the lexicographically smallest subset. Used as a
// small-instance oracle; the rectangular model has its own search below.
inline MleResult brute_force_mle(const Eigen::MatrixXd& W, int K) {
    const int n = static_cast<int>(W.rows());
    if (K < 1 || K > n) throw Error("brute_force_mle: need 1 <= K <= n");
    if (detail::choose_count(n, K) > 1e6) {
        throw TooLarge("brute_force_mle: more than 1e6 candidate subsets");
    }
    std::vector<int> idx(K);
    for (int i = 0; i < K; ++i) idx[i] = i;
    MleResult best;
    best.score = -std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (int a = 0; a < K; ++a) {
            for (int b = a; b < K; ++b) s += W(idx[a], idx[b]);
        }
        if (s > best.score) {
            best.score = s;
            best.support = idx;
        }
    } while (detail::next_subset(idx, n));
    return best;
}

struct BiclusterMleResult {
    std::vector<int> rows, cols;
    double score = 0.0;
};

// Rectangular MLE with the column side solved in closed form: for a fixed
// row set the optimum takes the K2 largest column sums restricted to those
// rows (ties to the smaller column index), so only row sets are
// enumerated. This matches a full double enumeration with lexicographic
// tie-breaking on (rows, cols).
inline BiclusterMleResult brute_force_mle_bicluster(const Eigen::MatrixXd& W, int K1, int K2) {
    const int n1 = static_cast<int>(W.rows());
    const int n2 = static_cast<int>(W.cols());
    if (K1 < 1 || K1 > n1 || K2 < 1 || K2 > n2) {
        throw Error("brute_force_mle_bicluster: need 1 <= Ki <= ni");
    }
    if (detail::choose_count(n1, K1) > 1e5) {
        throw TooLarge("brute_force_mle_bicluster: more than 1e5 row subsets");
    }
    std::vector<int> idx(K1);
    for (int i = 0; i < K1; ++i) idx[i] = i;
    BiclusterMleResult best;
    best.score = -std::numeric_limits<double>::infinity();
    std::vector<int> order(n2);
    do {
        std::vector<double> colsum(n2, 0.0);
        for (int j = 0; j < n2; ++j) {
            double s = 0.0;
            for (int a : idx) s += W(a, j);
            colsum[j] = s;
        }
        for (int j = 0; j < n2; ++j) order[j] = j;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (colsum[a] != colsum[b]) return colsum[a] > colsum[b];
            return a < b;
        });
        double s = 0.0;
        for (int r = 0; r < K2; ++r) s += colsum[order[r]];
        if (s > best.score) {
            best.score = s;
            best.rows = idx;
            best.cols.assign(order.begin(), order.begin() + K2);
            std::sort(best.cols.begin(), best.cols.end());
        }
    } while (detail::next_subset(idx, n1));
    return best;
}

}  // namespace subloc
