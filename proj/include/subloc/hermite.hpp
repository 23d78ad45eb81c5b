#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "subloc/errors.hpp"

namespace subloc {

// Probabilists' Hermite polynomial H_k(x), three-term recurrence
// H_{k+1}(x) = x H_k(x) - k H_{k-1}(x), H_0 = 1, H_1 = x.
// These are orthogonal under N(0,1) with E[H_m H_n] = n! delta_{mn},
// and satisfy E[H_k(mu + Z)] = mu^k, the identity everything else
// in this header leans on.
inline double hermite_eval(int k, double x) {
    if (k == 0) return 1.0;
    double hm = 1.0;  // H_{j-1}
    double h = x;     // H_j
    for (int j = 1; j < k; ++j) {
        double hn = x * h - static_cast<double>(j) * hm;
        hm = h;
        h = hn;
    }
    return h;
}

inline double factorial(int k) {
    double f = 1.0;
    for (int j = 2; j <= k; ++j) f *= static_cast<double>(j);
    return f;
}

// Truncated exponential series G_d(x) = sum_{k=0}^{d} x^k / k!.
// Summed forward with an incrementally updated term; for x >= 0 the
// terms are nonnegative so there is no cancellation.
inline double partial_exp(int d, double x) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= d; ++k) {
        term *= x / static_cast<double>(k);
        sum += term;
    }
    return sum;
}

// A degree-d polynomial in the Hermite basis: f(x) = sum_k a[k] H_k(x).
struct HermiteCoeffs {
    int d = 0;
    std::vector<double> a;  // size d+1, a[k] multiplies H_k
};

// Coefficients of the variance-normalized degree-d polynomial maximizing
// the mean shift E[f(mu_hat + Z)] subject to E[f(Z)^2] = 1:
//
//   a_k = (mu_hat^k / k!) / sqrt(G_d(mu_hat^2)),
//
// which gives sum_k k! a_k^2 = 1 exactly.
inline HermiteCoeffs optimal_coeffs(double mu_hat, int d) {
    if (d < 1) throw Error("optimal_coeffs: degree must be >= 1");
    double norm = std::sqrt(partial_exp(d, mu_hat * mu_hat));
    HermiteCoeffs c;
    c.d = d;
    c.a.resize(d + 1);
    double p = 1.0;  // mu_hat^k / k!
    for (int k = 0; k <= d; ++k) {
        c.a[k] = p / norm;
        p *= mu_hat / static_cast<double>(k + 1);
    }
    return c;
}

// Evaluates f(x) = sum_k a[k] H_k(x) with a single pass of the Hermite
// recurrence (no per-term re-evaluation).
inline double eval_nonlinearity(const HermiteCoeffs& c, double x) {
    double sum = c.a[0];
    if (c.d == 0) return sum;
    double hm = 1.0;
    double h = x;
    sum += c.a[1] * h;
    for (int k = 2; k <= c.d; ++k) {
        double hn = x * h - static_cast<double>(k - 1) * hm;
        hm = h;
        h = hn;
        sum += c.a[k] * h;
    }
    return sum;
}

}  // namespace subloc
