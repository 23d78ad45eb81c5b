#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "subloc/errors.hpp"
#include "subloc/rng.hpp"

namespace subloc {

// Symmetric data matrix with one planted principal block of elevated mean.
// W = mu * 1_C 1_C^T + Z with Z symmetric standard normal (diagonal
// included). The noiseless flag drops Z entirely.
struct PlantedInstance {
    int n = 0;
    int K = 0;
    double mu = 0.0;
    std::uint64_t seed = 0;
    bool noiseless = false;
    std::vector<int> support;  // sorted indices of the planted block
    Eigen::MatrixXd W;

    double lambda() const { return mu * mu * K * K / static_cast<double>(n); }
};

// Rectangular variant with independent row and column supports.
struct BiclusterInstance {
    int n1 = 0, n2 = 0;
    int K1 = 0, K2 = 0;
    double mu = 0.0;
    std::uint64_t seed = 0;
    bool noiseless = false;
    std::vector<int> row_support;
    std::vector<int> col_support;
    Eigen::MatrixXd W;  // n1 x n2

    double lambda1() const { return K1 * K1 * mu * mu / static_cast<double>(n1); }
    double lambda2() const { return K2 * K2 * mu * mu / static_cast<double>(n2); }
};

// Draw order is part of the contract (tests reconstruct it): first K
// bounded draws pick the support via a Fisher-Yates prefix, then the upper
// triangle is filled row-major (i <= j, diagonal included) with normals.
// The lower triangle is assigned, not redrawn, so W is symmetric
// bit-for-bit. Noiseless instances skip the normal draws entirely.
inline PlantedInstance gen_symmetric(int n, int K, double mu, std::uint64_t seed,
                                     bool noiseless = false) {
    if (K <= 0 || K > n) throw Error("gen_symmetric: need 1 <= K <= n");
    if (mu < 0.0) throw Error("gen_symmetric: mu must be nonnegative");
    PlantedInstance inst;
    inst.n = n;
    inst.K = K;
    inst.mu = mu;
    inst.seed = seed;
    inst.noiseless = noiseless;

    Rng rng(seed);
    inst.support = sample_support(n, K, rng);
    std::vector<char> in(n, 0);
    for (int i : inst.support) in[i] = 1;

    inst.W.setZero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double v = (in[i] && in[j]) ? mu : 0.0;
            if (!noiseless) v += rng.normal();
            inst.W(i, j) = v;
            inst.W(j, i) = v;
        }
    }
    return inst;
}

// Same contract for the rectangular model: row support (K1 draws), then
// column support (K2 draws), then the full matrix row-major.
inline BiclusterInstance gen_bicluster(int n1, int n2, int K1, int K2, double mu,
                                       std::uint64_t seed, bool noiseless = false) {
    if (K1 <= 0 || K1 > n1) throw Error("gen_bicluster: need 1 <= K1 <= n1");
    if (K2 <= 0 || K2 > n2) throw Error("gen_bicluster: need 1 <= K2 <= n2");
    if (mu < 0.0) throw Error("gen_bicluster: mu must be nonnegative");
    BiclusterInstance inst;
    inst.n1 = n1;
    inst.n2 = n2;
    inst.K1 = K1;
    inst.K2 = K2;
    inst.mu = mu;
    inst.seed = seed;
    inst.noiseless = noiseless;

    Rng rng(seed);
    inst.row_support = sample_support(n1, K1, rng);
    inst.col_support = sample_support(n2, K2, rng);
    std::vector<char> in_row(n1, 0), in_col(n2, 0);
    for (int i : inst.row_support) in_row[i] = 1;
    for (int j : inst.col_support) in_col[j] = 1;

    inst.W.setZero(n1, n2);
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
            double v = (in_row[i] && in_col[j]) ? mu : 0.0;
            if (!noiseless) v += rng.normal();
            inst.W(i, j) = v;
        }
    }
    return inst;
}

// Entrywise W / sqrt(n).
inline Eigen::MatrixXd scale(const Eigen::MatrixXd& W, int n) {
    if (n < 1) throw Error("scale: n must be >= 1");
    return W / std::sqrt(static_cast<double>(n));
}

struct ErrorReport {
    int hamming = 0;      // |estimate symmetric-difference truth|
    double fraction = 0;  // hamming / K
    bool exact = false;
};

// Hamming error between index sets; inputs need not be sorted.
inline ErrorReport error_report(std::vector<int> estimate, std::vector<int> truth, int K) {
    std::sort(estimate.begin(), estimate.end());
    std::sort(truth.begin(), truth.end());
    std::size_t a = 0, b = 0;
    int common = 0;
    while (a < estimate.size() && b < truth.size()) {
        if (estimate[a] == truth[b]) {
            ++common;
            ++a;
            ++b;
        } else if (estimate[a] < truth[b]) {
            ++a;
        } else {
            ++b;
        }
    }
    ErrorReport r;
    r.hamming = static_cast<int>(estimate.size() + truth.size()) - 2 * common;
    r.fraction = (K > 0) ? static_cast<double>(r.hamming) / K : 0.0;
    r.exact = (r.hamming == 0);
    return r;
}

}  // namespace subloc
